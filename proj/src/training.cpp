// Copyright 2026 The occamllm Authors
// SPDX-License-Identifier: Apache-2.0

#include "occamllm/training.hpp"

#include <chrono>
#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "occamllm/errors.hpp"
#include "occamllm/seed.hpp"

namespace occamllm {
namespace {

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double sigmoid(double z) {
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

double reward_sum(const std::vector<double>& rewards) {
  double total = 0.0;
  for (double r : rewards) total += r;
  return total;
}

}  // namespace

double Reward::operator()(std::optional<double> fx, double y) const {
  if (!fx || !std::isfinite(*fx)) return 0.0;
  const double diff = std::abs(*fx - y);
  return diff <= std::max(abs_tol, rel_tol * std::abs(y)) ? 1.0 : 0.0;
}

double reinforce_loss(const NetSpec& spec, const LayerWeights& logits, const std::vector<SampledDag>& samples,
                      const std::vector<double>& rewards) {
  if (samples.size() != rewards.size()) throw StructuralError("one reward per sample required");
  const double total = reward_sum(rewards);
  if (total <= 0.0) return 0.0;
  std::vector<Eigen::MatrixXd> log_p;
  for (const Eigen::MatrixXd& w : logits.layers) log_p.push_back(log_softmax_rows(w));
  double loss = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (rewards[i] == 0.0) continue;
    double lp = 0.0;
    for (const auto& [l, r] : connected_rows(spec, samples[i])) lp += log_p[l - 1](r, samples[i].choice[l - 1][r]);
    loss -= rewards[i] * lp;
  }
  return loss / total;
}

std::vector<Eigen::MatrixXd> reinforce_logit_grad(const NetSpec& spec, const LayerWeights& logits,
                                                  const std::vector<SampledDag>& samples,
                                                  const std::vector<double>& rewards) {
  if (samples.size() != rewards.size()) throw StructuralError("one reward per sample required");
  std::vector<Eigen::MatrixXd> grad;
  std::vector<Eigen::VectorXd> row_weight;
  for (const Eigen::MatrixXd& w : logits.layers) {
    grad.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
    row_weight.push_back(Eigen::VectorXd::Zero(w.rows()));
  }
  const double total = reward_sum(rewards);
  if (total <= 0.0) return grad;
  // d(-log softmax_c)/d logits = softmax - onehot(c), per connected row.
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (rewards[i] == 0.0) continue;
    for (const auto& [l, r] : connected_rows(spec, samples[i])) {
      grad[l - 1](r, samples[i].choice[l - 1][r]) -= rewards[i];
      row_weight[l - 1](r) += rewards[i];
    }
  }
  for (std::size_t l = 0; l < grad.size(); ++l) {
    const Eigen::MatrixXd p = softmax_rows(logits.layers[l]);
    grad[l] += row_weight[l].asDiagonal() * p;
    grad[l] /= total;
  }
  return grad;
}

LossStats loss_and_grad(const NetSpec& spec, const DecoderParams& params, const Eigen::MatrixXd& h,
                        std::span<const double> inputs, double y, int n_samples, std::uint64_t seed,
                        DecoderParams* grad, const Reward& reward) {
  if (n_samples < 1) throw ConfigError("n_samples must be at least 1");
  DecoderCache cache;
  const LayerWeights logits = decode_weights(params, h, grad != nullptr ? &cache : nullptr);
  const Sampler sampler(spec, logits);
  std::mt19937_64 rng(seed);
  std::vector<SampledDag> kept;
  std::vector<double> rewards;
  LossStats stats;
  stats.n_samples = n_samples;
  for (int i = 0; i < n_samples; ++i) {
    SampledDag dag = sampler.draw(rng);
    const double r = reward(evaluate(spec, dag, inputs), y);
    if (r > 0.0) {
      kept.push_back(std::move(dag));
      rewards.push_back(r);
      ++stats.n_rewarded;
    }
  }
  if (kept.empty()) {
    stats.skipped = true;
    return stats;
  }
  double total = 0.0, weighted = 0.0;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    total += rewards[i];
    weighted += rewards[i] * sampler.log_prob(kept[i]);
  }
  stats.loss = -weighted / total;
  if (grad != nullptr) {
    decoder_backward(params, h, cache, reinforce_logit_grad(spec, logits, kept, rewards), *grad);
  }
  return stats;
}

double loss_on_samples(const NetSpec& spec, const DecoderParams& params, const Eigen::MatrixXd& h,
                       const std::vector<SampledDag>& samples, const std::vector<double>& rewards,
                       DecoderParams* grad) {
  DecoderCache cache;
  const LayerWeights logits = decode_weights(params, h, &cache);
  const double loss = reinforce_loss(spec, logits, samples, rewards);
  if (grad != nullptr) {
    decoder_backward(params, h, cache, reinforce_logit_grad(spec, logits, samples, rewards), *grad);
  }
  return loss;
}

double switch_loss_and_grad(const SwitchParams& params, const std::vector<Eigen::MatrixXd>& states,
                            const std::vector<int>& labels, SwitchParams* grad, double scale) {
  if (states.size() != labels.size()) throw StructuralError("one label per token required");
  if (states.empty()) return 0.0;
  const double n = static_cast<double>(states.size());
  double loss = 0.0;
  for (std::size_t t = 0; t < states.size(); ++t) {
    if (labels[t] != 0 && labels[t] != 1) throw StructuralError("switch labels must be 0 or 1");
    Mlp<double>::Cache cache;
    const double z = switch_logit(params, states[t], &cache);
    loss += softplus(z) - labels[t] * z;
    if (grad != nullptr) switch_backward(params, states[t], cache, scale * (sigmoid(z) - labels[t]) / n, *grad);
  }
  return loss / n;
}

AdamW::AdamW(Options opts) : opts_(opts) {
  if (!(opts.lr >= 0) || !(opts.weight_decay >= 0) || !(opts.eps > 0)) throw ConfigError("bad AdamW options");
}

void AdamW::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
  if (m_.size() == 0) {
    m_ = Eigen::VectorXd::Zero(params.size());
    v_ = Eigen::VectorXd::Zero(params.size());
  }
  if (grad.size() != params.size() || m_.size() != params.size()) throw StructuralError("AdamW size mismatch");
  ++t_;
  params *= 1.0 - opts_.lr * opts_.weight_decay;
  m_ = opts_.beta1 * m_ + (1.0 - opts_.beta1) * grad;
  v_ = opts_.beta2 * v_ + (1.0 - opts_.beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(opts_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(opts_.beta2, static_cast<double>(t_));
  params.array() -= opts_.lr * (m_.array() / c1) / ((v_.array() / c2).sqrt() + opts_.eps);
}

DecoderParams train_decoder(const TrainConfig& config, const HiddenStateProvider& provider, const NetSpec& spec,
                            DecoderParams params, const std::vector<std::vector<DecoderItem>>& stages,
                            const MetricsSink& sink) {
  if (config.effective_batch < 1 || config.samples_per_token < 1 || config.max_steps < 0) {
    throw ConfigError("train_decoder: batch, samples and steps must be positive");
  }
  check_compatible(params, spec, provider.n_layers(), provider.hidden_dim());
  AdamW opt({config.learning_rate, 0.9, 0.999, 1e-8, config.weight_decay});
  Eigen::VectorXd flat = flatten(params);
  const auto start = std::chrono::steady_clock::now();
  int global = 0;
  for (std::size_t s = 0; s < stages.size(); ++s) {
    const auto& items = stages[s];
    if (items.empty()) continue;
    std::size_t cursor = 0;
    for (int step = 0; step < config.max_steps; ++step, ++global) {
      DecoderParams grad = zeros_like(params);
      double loss = 0.0, rate = 0.0;
      int skipped = 0;
      for (int k = 0; k < config.effective_batch; ++k) {
        const DecoderItem& item = items[cursor++ % items.size()];
        const Eigen::MatrixXd h = provider.encode_last(item.text);
        const LossStats st =
            loss_and_grad(spec, params, h, item.inputs, item.answer, config.samples_per_token,
                          mix_seed(config.seed, static_cast<std::uint64_t>(global) * 1024 + k), &grad);
        if (!std::isfinite(st.loss)) {
          throw std::runtime_error("non-finite decoder loss at step " + std::to_string(global) + " on \"" +
                                   item.text + "\"");
        }
        loss += st.loss;
        rate += st.reward_rate();
        skipped += st.skipped ? 1 : 0;
      }
      Eigen::VectorXd g = flatten(grad) / static_cast<double>(config.effective_batch);
      if (!g.allFinite()) throw std::runtime_error("non-finite decoder gradient at step " + std::to_string(global));
      opt.step(flat, g);
      unflatten(params, flat);
      const bool last = step + 1 == config.max_steps;
      if (sink && (config.log_every > 0 && (global % config.log_every == 0 || last))) {
        StepMetrics m;
        m.step = global;
        m.stage = static_cast<int>(s) + 1;
        const int counted = config.effective_batch - skipped;
        m.loss = counted > 0 ? loss / counted : 0.0;
        m.reward_rate = rate / config.effective_batch;
        m.skipped = skipped;
        m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        sink(m);
      }
    }
  }
  return params;
}

SwitchParams train_switch(const TrainConfig& config, const HiddenStateProvider& provider, SwitchParams params,
                          const std::vector<SwitchItem>& streams, const MetricsSink& sink) {
  if (config.effective_batch < 1 || config.max_steps < 0) throw ConfigError("train_switch: bad batch or steps");
  if (streams.empty()) throw ConfigError("train_switch: no labeled streams");
  check_compatible(params, provider.n_layers(), provider.hidden_dim());
  AdamW opt({config.learning_rate, 0.9, 0.999, 1e-8, config.weight_decay});
  Eigen::VectorXd flat = flatten(params);
  const auto start = std::chrono::steady_clock::now();
  std::size_t cursor = 0;
  for (int step = 0; step < config.max_steps; ++step) {
    SwitchParams grad = zeros_like(params);
    double loss = 0.0;
    for (int k = 0; k < config.effective_batch; ++k) {
      const SwitchItem& item = streams[cursor++ % streams.size()];
      const HiddenStates hs = provider.encode(item.text);
      if (hs.size() != item.labels.size()) {
        throw ConfigError("switch labels (" + std::to_string(item.labels.size()) + ") do not match token count (" +
                          std::to_string(hs.size()) + ")");
      }
      loss += switch_loss_and_grad(params, hs.tokens, item.labels, &grad, 1.0 / config.effective_batch);
    }
    loss /= config.effective_batch;
    if (!std::isfinite(loss)) throw std::runtime_error("non-finite switch loss at step " + std::to_string(step));
    opt.step(flat, flatten(grad));
    unflatten(params, flat);
    if (sink && config.log_every > 0 && (step % config.log_every == 0 || step + 1 == config.max_steps)) {
      StepMetrics m;
      m.step = step;
      m.loss = loss;
      m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      sink(m);
    }
  }
  return params;
}

}  // namespace occamllm
