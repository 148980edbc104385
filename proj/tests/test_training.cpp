// Copyright 2026 The occamllm Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <map>
#include <random>

#include <doctest.h>

#include "gradcheck.hpp"
#include "occamllm/errors.hpp"
#include "occamllm/toy_encoder.hpp"
#include "occamllm/training.hpp"
#include "oracle.hpp"

using namespace occamllm;

namespace {

NetSpec calculator_net() { return build_complete(primitives::calculator_set(), 2, 1); }

// Total probability, by enumeration, of the wirings that compute y on `x`.
double success_probability(const NetSpec& spec, const LayerWeights& w, std::span<const double> x, double y) {
  double total = 0.0;
  for (const auto& e : oracle::enumerate(spec, w)) {
    if (Reward{}(evaluate(spec, e.dag, x), y) > 0) total += e.probability;
  }
  return total;
}

}  // namespace

TEST_CASE("reward is a tolerant indicator") {
  const Reward r;
  CHECK(r(13.0, 13.0) == 1.0);
  CHECK(r(13.0 * (1 + 5e-11), 13.0) == 1.0);
  CHECK(r(13.0 * (1 + 5e-10), 13.0) == 0.0);
  CHECK(r(1e-13, 0.0) == 1.0);
  CHECK(r(1e-11, 0.0) == 0.0);
  CHECK(r(std::nullopt, 1.0) == 0.0);
  CHECK(r(std::nan(""), 1.0) == 0.0);
}

TEST_CASE("rescaled REINFORCE loss values") {
  const NetSpec spec = build_complete(primitives::basic_arithmetic(), 2, 1);
  std::mt19937_64 rng(3);
  LayerWeights w = zero_weights(spec);
  for (auto& m : w.layers) m = gradcheck::normal_matrix(m.rows(), m.cols(), rng, 1.0);
  const Sampler s(spec, w);

  SUBCASE("one rewarded wiring collapses to -log p") {
    const SampledDag d = s.draw(rng);
    CHECK(reinforce_loss(spec, w, {d, d, d}, {1, 1, 1}) == doctest::Approx(-std::log(probability(spec, w, d))).epsilon(1e-12));
  }
  SUBCASE("three of four rewarded") {
    std::vector<SampledDag> ds;
    for (int i = 0; i < 4; ++i) ds.push_back(s.draw(rng));
    const double a = log_probability(spec, w, ds[0]), b = log_probability(spec, w, ds[1]),
                 c = log_probability(spec, w, ds[3]);
    CHECK(reinforce_loss(spec, w, ds, {1, 1, 0, 1}) == doctest::Approx(-(a + b + c) / 3).epsilon(1e-12));
  }
  SUBCASE("no reward means zero loss and zero gradient") {
    const std::vector<SampledDag> ds{s.draw(rng), s.draw(rng)};
    CHECK(reinforce_loss(spec, w, ds, {0, 0}) == 0.0);
    for (const auto& g : reinforce_logit_grad(spec, w, ds, {0, 0})) CHECK(g.isZero());
  }
  SUBCASE("matches a straight-line evaluation through the enumeration oracle") {
    std::map<SampledDag, double> p;
    for (const auto& e : oracle::enumerate(spec, w)) p[e.dag] = e.probability;
    std::vector<SampledDag> ds;
    std::vector<double> rs;
    double num = 0.0, den = 0.0;
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (int i = 0; i < 40; ++i) {
      ds.push_back(s.draw(rng));
      rs.push_back(i % 3 == 0 ? 0.0 : u(rng));
      num += rs.back() * std::log(p.at(canonicalize(spec, ds.back())));
      den += rs.back();
    }
    CHECK(std::abs(reinforce_loss(spec, w, ds, rs) - (-num / den)) < 1e-12);
  }
}

TEST_CASE("analytic gradients match central differences") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    CAPTURE(seed);
    CHECK(gradcheck::decoder_instance(seed) < 1e-4);
    CHECK(gradcheck::switch_instance(seed) < 1e-4);
  }
}

TEST_CASE("loss_and_grad on a sampled batch") {
  const NetSpec spec = calculator_net();
  const DecoderParams p = make_decoder(spec, 2, 8, 4, 1);
  const Eigen::MatrixXd h = Eigen::MatrixXd::Ones(8, 2);
  const double x[] = {6, 7};
  DecoderParams g = zeros_like(p);
  const LossStats st = loss_and_grad(spec, p, h, x, 13.0, 2000, 5, &g);
  CHECK(st.n_samples == 2000);
  CHECK(st.n_rewarded > 0);
  CHECK(!st.skipped);
  CHECK(std::isfinite(st.loss));
  CHECK(!flatten(g).isZero());
  // An unreachable target produces a skipped, zero-gradient item.
  DecoderParams g2 = zeros_like(p);
  const LossStats none = loss_and_grad(spec, p, h, x, 1234.5678, 500, 5, &g2);
  CHECK(none.skipped);
  CHECK(none.loss == 0.0);
  CHECK(flatten(g2).isZero());
  CHECK_THROWS_AS(loss_and_grad(spec, p, h, x, 13.0, 0, 5, nullptr), ConfigError);
}

TEST_CASE("switch loss reference values") {
  const SwitchParams zero = make_switch(1, 3, 2, 0);
  const std::vector<Eigen::MatrixXd> states(4, Eigen::MatrixXd::Ones(3, 1));
  CHECK(switch_loss_and_grad(zero, states, {0, 1, 1, 0}, nullptr) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  SwitchParams sat = zero;
  sat.mlp.b2(0) = 30;
  CHECK(switch_loss_and_grad(sat, states, {1, 1, 1, 1}, nullptr) < 1e-6);
  sat.mlp.b2(0) = -30;
  CHECK(switch_loss_and_grad(sat, states, {0, 0, 0, 0}, nullptr) < 1e-6);
  CHECK_THROWS_AS(switch_loss_and_grad(zero, states, {0, 1}, nullptr), StructuralError);
}

TEST_CASE("AdamW") {
  AdamW opt({0.1, 0.9, 0.999, 1e-8, 0.0});
  Eigen::VectorXd p(2);
  p << 1.0, -2.0;
  Eigen::VectorXd g(2);
  g << 0.5, -4.0;
  opt.step(p, g);
  // First bias-corrected step moves each coordinate by lr * sign(g).
  CHECK(p(0) == doctest::Approx(0.9).epsilon(1e-7));
  CHECK(p(1) == doctest::Approx(-1.9).epsilon(1e-7));

  AdamW frozen({0.0, 0.9, 0.999, 1e-8, 0.01});
  Eigen::VectorXd q = p;
  frozen.step(q, g);
  CHECK(q == p);

  AdamW decay({0.1, 0.9, 0.999, 1e-8, 0.5});
  Eigen::VectorXd r = Eigen::VectorXd::Constant(1, 2.0);
  decay.step(r, Eigen::VectorXd::Zero(1));
  CHECK(r(0) == doctest::Approx(2.0 * (1 - 0.05)));
}

TEST_CASE("training with learning rate 0 changes nothing") {
  const NetSpec spec = calculator_net();
  const ToyEncoder enc(ToyEncoderConfig{7, 2, 16, 1});
  DecoderParams p = make_decoder(spec, 2, 16, 8, 4);
  TrainConfig cfg;
  cfg.learning_rate = 0.0;
  cfg.max_steps = 3;
  cfg.samples_per_token = 100;
  std::vector<double> rates;
  const DecoderParams out = train_decoder(cfg, enc, spec, p, {{{"6 + 7 = ", {6, 7}, 13}}},
                                          [&](const StepMetrics& m) { rates.push_back(m.reward_rate); });
  CHECK(flatten(out) == flatten(p));
  REQUIRE(rates.size() >= 2);
  CHECK(rates.front() == doctest::Approx(rates.back()).epsilon(0.5));
  // A provider of the wrong shape is refused up front.
  const ToyEncoder wide(ToyEncoderConfig{7, 4, 16, 1});
  CHECK_THROWS_AS(train_decoder(cfg, wide, spec, p, {{{"6 + 7 = ", {6, 7}, 13}}}), ConfigError);
}

TEST_CASE("probability of the correct wiring rises steadily on a fixed prompt") {
  const NetSpec spec = calculator_net();
  const ToyEncoder enc(ToyEncoderConfig{7, 2, 16, 1});
  const std::string prompt = "6 + 7 = ";
  const double x[] = {6, 7};
  const Eigen::MatrixXd h = enc.encode_last(prompt);
  int monotone = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const DecoderParams init = make_decoder(spec, 2, 16, 8, seed);
    TrainConfig cfg;
    cfg.learning_rate = 2e-3;
    cfg.samples_per_token = 200;
    cfg.seed = seed;
    cfg.log_every = 0;
    std::vector<double> trace;
    for (int steps = 0; steps <= 40; steps += 5) {
      cfg.max_steps = steps;
      const DecoderParams p = train_decoder(cfg, enc, spec, init, {{{prompt, {6, 7}, 13}}});
      trace.push_back(success_probability(spec, decode_weights(p, h), x, 13.0));
    }
    bool ok = trace.back() > trace.front();
    for (std::size_t i = 1; i < trace.size(); ++i) ok = ok && trace[i] >= trace[i - 1];
    monotone += ok ? 1 : 0;
  }
  CHECK(monotone >= 19);
}

TEST_CASE("switch trained on all-zero labels stays below 0.5") {
  const ToyEncoder enc(ToyEncoderConfig{7, 2, 16, 1});
  const std::string text = "3 + 4 = 7\n\nhello there";
  const std::size_t n = enc.encode(text).size();
  TrainConfig cfg;
  cfg.learning_rate = 1e-2;
  cfg.max_steps = 30;
  cfg.effective_batch = 1;
  const SwitchParams s = train_switch(cfg, enc, make_switch(2, 16, 8, 1), {{text, std::vector<int>(n, 0)}});
  for (const auto& h : enc.encode(text).tokens) CHECK(decode_switch(s, h) < 0.5);
  CHECK_THROWS_AS(train_switch(cfg, enc, make_switch(2, 16, 8, 1), {{text, {0, 1}}}), ConfigError);
}
