// Copyright 2026 The occamllm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "occamllm/controller.hpp"
#include "occamllm/hidden_states.hpp"
#include "occamllm/occamnet.hpp"

namespace occamllm {

/// 1 when f(x) agrees with y (relative 1e-10, absolute 1e-12 near zero),
/// else 0. Invalid evaluations earn 0.
struct Reward {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double operator()(std::optional<double> fx, double y) const;
};

/// Reward-weighted negative log-likelihood over a fixed sample set:
///   -sum_f R_f log p(f) / sum_f R_f,
/// with log p taken over output-connected edges. Zero when every R_f is 0.
double reinforce_loss(const NetSpec& spec, const LayerWeights& logits, const std::vector<SampledDag>& samples,
                      const std::vector<double>& rewards);

/// d reinforce_loss / d logits, treating the 1 / sum R factor as constant.
std::vector<Eigen::MatrixXd> reinforce_logit_grad(const NetSpec& spec, const LayerWeights& logits,
                                                  const std::vector<SampledDag>& samples,
                                                  const std::vector<double>& rewards);

struct LossStats {
  double loss = 0.0;
  int n_samples = 0;
  int n_rewarded = 0;
  bool skipped = false;  // no sample earned a reward; zero gradient
  double reward_rate() const { return n_samples > 0 ? static_cast<double>(n_rewarded) / n_samples : 0.0; }
};

/// Decodes weights from `h`, draws `n_samples` wirings, rewards them against
/// y and accumulates the parameter gradient into `grad` (if non-null).
LossStats loss_and_grad(const NetSpec& spec, const DecoderParams& params, const Eigen::MatrixXd& h,
                        std::span<const double> inputs, double y, int n_samples, std::uint64_t seed,
                        DecoderParams* grad, const Reward& reward = {});

/// As loss_and_grad, but on a caller-supplied wiring set; the loss is a
/// smooth function of the parameters, suitable for finite differences.
double loss_on_samples(const NetSpec& spec, const DecoderParams& params, const Eigen::MatrixXd& h,
                       const std::vector<SampledDag>& samples, const std::vector<double>& rewards,
                       DecoderParams* grad);

/// Mean binary cross-entropy of the switch over a token stream; adds the
/// gradient (scaled by `scale`) to `grad` if non-null.
double switch_loss_and_grad(const SwitchParams& params, const std::vector<Eigen::MatrixXd>& states,
                            const std::vector<int>& labels, SwitchParams* grad, double scale = 1.0);

/// Adam with decoupled weight decay and a constant learning rate.
class AdamW {
 public:
  struct Options {
    double lr = 6e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;
  };
  explicit AdamW(Options opts);
  AdamW() : AdamW(Options{}) {}
  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad);
  long steps() const { return t_; }

 private:
  Options opts_;
  Eigen::VectorXd m_, v_;
  long t_ = 0;
};

struct TrainConfig {
  double learning_rate = 6e-4;
  double weight_decay = 0.01;
  int effective_batch = 8;
  int samples_per_token = 1000;
  int max_steps = 1000;
  std::uint64_t seed = 0;
  int log_every = 50;
};

/// One decoder training item: the text up to the answer point, the operands
/// the parser hands to OccamNet, and the expected result.
struct DecoderItem {
  std::string text;
  std::vector<double> inputs;
  double answer = 0.0;
};

struct StepMetrics {
  int step = 0;
  int stage = 1;
  double loss = 0.0;
  double reward_rate = 0.0;
  int skipped = 0;
  double wall_seconds = 0.0;
  std::optional<double> probe_accuracy;
};

using MetricsSink = std::function<void(const StepMetrics&)>;

/// Runs the decoder schedule: `config.max_steps` steps over each non-empty
/// stage in order, cycling through that stage's items. Each step averages
/// the gradient over `effective_batch` items (skipped items count as zero)
/// and applies one AdamW update. Throws std::runtime_error on a non-finite
/// loss. `sink` sees every `log_every`-th step and the last.
DecoderParams train_decoder(const TrainConfig& config, const HiddenStateProvider& provider, const NetSpec& spec,
                            DecoderParams params, const std::vector<std::vector<DecoderItem>>& stages,
                            const MetricsSink& sink = {});

struct SwitchItem {
  std::string text;
  std::vector<int> labels;  // one per provider token
};

/// Trains the switch by BCE over token streams, `effective_batch` streams per
/// update. The decoder is untouched.
SwitchParams train_switch(const TrainConfig& config, const HiddenStateProvider& provider, SwitchParams params,
                          const std::vector<SwitchItem>& streams, const MetricsSink& sink = {});

}  // namespace occamllm
