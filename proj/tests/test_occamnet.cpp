// Copyright 2026 The occamllm Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <map>
#include <random>
#include <set>

#include "doctest.h"
#include "occamllm/errors.hpp"
#include "occamllm/network_file.hpp"
#include "occamllm/occamnet.hpp"
#include "oracle.hpp"

using namespace occamllm;
namespace P = occamllm::primitives;

namespace {

LayerWeights random_weights(const NetSpec& spec, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, scale);
  LayerWeights w = zero_weights(spec);
  for (auto& m : w.layers) {
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  }
  return w;
}

// Builds a wiring from explicit per-layer choices.
SampledDag wiring(std::vector<std::vector<int>> choice) { return SampledDag{std::move(choice)}; }

}  // namespace

TEST_CASE("build_complete repeats primitives A^(L-l) times") {
  SUBCASE("single layer, single binary primitive") {
    const NetSpec spec = build_complete({P::add()}, 2, 1);
    CHECK(spec.layer(1).size() == 1);
    CHECK(spec.row_count(1) == 2);
    CHECK(spec.source_count(1) == 2);
    CHECK(spec.source_count(2) == 3);  // skip to both inputs + the image node
  }
  SUBCASE("two layers with + and sin") {
    const NetSpec spec = build_complete({P::add(), P::sin()}, 1, 2);
    REQUIRE(spec.max_arity() == 2);
    std::vector<std::string> l1, l2;
    for (const auto& p : spec.layer(1)) l1.push_back(p.name);
    for (const auto& p : spec.layer(2)) l2.push_back(p.name);
    CHECK(l1 == std::vector<std::string>{"+", "+", "sin", "sin"});
    CHECK(l2 == std::vector<std::string>{"+", "sin"});
    CHECK(spec.row_count(1) == 6);
    CHECK(spec.row_count(2) == 3);
    CHECK(spec.source_count(2) == 1 + 4);
    CHECK(spec.source_count(3) == 1 + 4 + 2);
    CHECK(spec.weight_count() == 6 * 1 + 3 * 5 + 7);
  }
  SUBCASE("configuration errors") {
    CHECK_THROWS_AS(build_complete({P::sin()}, 1, 0), ConfigError);
    CHECK_THROWS_AS(build_complete({}, 1, 1), ConfigError);
  }
}

TEST_CASE("complete {sin, cos} two-layer net represents the seven depth-2 compositions") {
  const NetSpec spec = build_complete({P::sin(), P::cos()}, 1, 2);
  std::set<std::string> functions;
  for (const auto& e : oracle::enumerate(spec, zero_weights(spec))) {
    functions.insert(expression(spec, e.dag));
  }
  const std::set<std::string> expected{"x0",          "sin(x0)",      "cos(x0)",     "sin(sin(x0))",
                                       "sin(cos(x0))", "cos(sin(x0))", "cos(cos(x0))"};
  CHECK(functions == expected);
}

TEST_CASE("evaluate follows the sampled wiring") {
  const NetSpec spec = build_complete({P::add(), P::sub(), P::mul(), P::div()}, 2, 1);
  // Output columns: [x0, x1, +, -, *, /].
  std::vector<std::vector<int>> base{{0, 1, 0, 1, 0, 1, 0, 1}, {0}};
  const double six_seven[] = {6.0, 7.0};

  SUBCASE("skip connection passes the input through") {
    const double six[] = {6.0, 0.0};
    CHECK(evaluate(spec, wiring(base), six) == 6.0);
  }
  SUBCASE("addition of 6 and 7 gives 13") {
    base[1][0] = 2;
    CHECK(evaluate(spec, wiring(base), six_seven) == 13.0);
    CHECK(expression(spec, wiring(base)) == "+(x0,x1)");
  }
  SUBCASE("division by zero is invalid, not a crash") {
    base[1][0] = 5;
    const double one_zero[] = {1.0, 0.0};
    CHECK_FALSE(evaluate(spec, wiring(base), one_zero).has_value());
  }
  SUBCASE("unconnected invalid branches do not matter") {
    base[1][0] = 2;
    const double one_zero[] = {1.0, 0.0};
    CHECK(evaluate(spec, wiring(base), one_zero) == 1.0);
  }
  SUBCASE("wrong input count is a structural error") {
    const double one[] = {1.0};
    CHECK_THROWS_AS(evaluate(spec, wiring(base), one), StructuralError);
  }
}

TEST_CASE("domain guards") {
  const NetSpec spec = build_complete(P::calculator_set(), 2, 1);
  // Rows: + (0,1) - (2,3) * (4,5) / (6,7) sqrt 8 pow (9,10) log 11 exp 12 sin 13 cos 14.
  // Output columns: x0 x1 then the ten primitives.
  auto eval_root = [&](int column, double a, double b) {
    std::vector<std::vector<int>> c{std::vector<int>(15, 0), {column}};
    c[0][10] = 1;  // pow exponent reads x1
    const double in[] = {a, b};
    return evaluate(spec, wiring(c), in);
  };
  CHECK_FALSE(eval_root(2 + 4, -1.0, 0.0).has_value());  // sqrt(-1)
  CHECK_FALSE(eval_root(2 + 6, 0.0, 0.0).has_value());   // log(0)
  CHECK_FALSE(eval_root(2 + 5, -8.0, 0.5).has_value());  // (-8)^0.5
  CHECK(eval_root(2 + 5, -2.0, 3.0) == -8.0);
  CHECK_FALSE(eval_root(2 + 5, 0.0, -1.0).has_value());  // 0^-1
  CHECK(eval_root(2 + 5, 0.0, 2.0) == 0.0);
  CHECK_FALSE(eval_root(2 + 7, 1000.0, 0.0).has_value());  // exp overflow
}

TEST_CASE("probability on small nets") {
  SUBCASE("uniform one-layer {sin, cos}") {
    const NetSpec spec = build_standard({P::sin(), P::cos()}, 1, 1);
    const LayerWeights w = zero_weights(spec);
    CHECK(probability(spec, w, wiring({{0, 0}, {0}})) == doctest::Approx(0.5).epsilon(1e-15));
  }
  SUBCASE("enumeration of the arithmetic net sums to one") {
    const NetSpec spec = build_complete({P::add(), P::sub(), P::mul(), P::div()}, 2, 1);
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const LayerWeights w = random_weights(spec, seed, 2.0);
      double total = 0.0;
      for (const auto& e : oracle::enumerate(spec, w)) {
        const double p = probability(spec, w, e.dag);
        CHECK(p == doctest::Approx(e.probability).epsilon(1e-12));
        total += p;
      }
      CHECK(std::abs(total - 1.0) < 1e-9);
    }
  }
  SUBCASE("the figure example sin(sin(x1) * exp(x0))") {
    const NetSpec spec = build_standard({P::sin(), P::mul(), P::exp()}, 2, 3);
    // Layer rows: sin 0, * (1,2), exp 3.
    const SampledDag dag = wiring({{1, 0, 0, 0}, {0, 0, 2, 0}, {1, 0, 0, 0}, {0}});
    CHECK(expression(spec, dag) == "sin(*(sin(x1),exp(x0)))");
    const double in[] = {0.3, 1.1};
    CHECK(*evaluate(spec, dag, in) == doctest::Approx(std::sin(std::sin(1.1) * std::exp(0.3))));

    const LayerWeights w = random_weights(spec, 7);
    auto edge = [&](int l, int r, int c) { return softmax_rows(w.at(l))(r, c); };
    const double expected = edge(4, 0, 0) * edge(3, 0, 1) * edge(2, 1, 0) * edge(2, 2, 2) *
                            edge(1, 0, 1) * edge(1, 3, 0);
    CHECK(probability(spec, w, dag) == doctest::Approx(expected).epsilon(1e-13));
  }
}

TEST_CASE("sampling") {
  SUBCASE("uniform weights pick sin half the time") {
    const NetSpec spec = build_standard({P::sin(), P::cos()}, 1, 1);
    const int n = 100000;
    const auto samples = sample(spec, zero_weights(spec), 11, n);
    int sin_count = 0;
    for (const auto& s : samples) sin_count += s.dag.choice[1][0] == 0;
    const double sigma = std::sqrt(0.25 / n);
    CHECK(std::abs(sin_count / static_cast<double>(n) - 0.5) < 3 * sigma);
  }
  SUBCASE("a saturated weight wins") {
    const NetSpec spec = build_complete(P::calculator_set(), 2, 1);
    LayerWeights w = zero_weights(spec);
    w.at(2)(0, 4) = 40.0;  // output -> '*'
    // Analytically 1 - p = 11 e^-40 / (e^0 * 11 + e^40), far below 1e-3.
    int hits = 0;
    const int n = 20000;
    for (const auto& s : sample(spec, w, 5, n)) hits += s.dag.choice[1][0] == 4;
    CHECK(hits / static_cast<double>(n) > 0.999);
  }
  SUBCASE("same seed, same stream") {
    const NetSpec spec = build_complete({P::add(), P::sin()}, 2, 2);
    const LayerWeights w = random_weights(spec, 3);
    const auto a = sample(spec, w, 99, 50);
    const auto b = sample(spec, w, 99, 50);
    for (int i = 0; i < 50; ++i) {
      CHECK(a[i].dag == b[i].dag);
      CHECK(a[i].log_prob == b[i].log_prob);
    }
  }
  SUBCASE("log_prob matches probability()") {
    const NetSpec spec = build_complete({P::add(), P::sin()}, 2, 2);
    const LayerWeights w = random_weights(spec, 4);
    for (const auto& s : sample(spec, w, 1, 200)) {
      CHECK(s.log_prob <= 0.0);
      CHECK(s.log_prob == doctest::Approx(log_probability(spec, w, s.dag)).epsilon(1e-12));
    }
  }
  SUBCASE("shape mismatch is structural") {
    const NetSpec spec = build_complete({P::add()}, 2, 1);
    LayerWeights w = zero_weights(spec);
    w.layers[0].resize(3, 2);
    CHECK_THROWS_AS(sample(spec, w, 1, 1), StructuralError);
  }
}

TEST_CASE("lower bound q") {
  const NetSpec spec = build_complete({P::add(), P::sin()}, 2, 2);
  const LayerWeights w = random_weights(spec, 21);
  // Layer 1: + + sin sin -> rows (0,1) (2,3) 4 5. Layer 2: + (0,1), sin 2.
  // Columns of softmax 2: x0 x1 +a +b sinA sinB. Columns of output: those + [+2, sin2].
  SUBCASE("tree wiring: q equals p") {
    const SampledDag dag = wiring({{0, 1, 0, 0, 1, 0}, {2, 4, 0}, {6}});
    CHECK(probability_lower_bound(spec, w, dag) ==
          doctest::Approx(probability(spec, w, dag)).epsilon(1e-12));
  }
  SUBCASE("shared sin node feeding both arguments of + counts its edge twice") {
    const SampledDag dag = wiring({{0, 0, 0, 0, 1, 0}, {4, 4, 0}, {6}});
    CHECK(expression(spec, dag) == "+(sin(x1),sin(x1))");
    const double shared = softmax_rows(w.at(1))(4, 1);
    CHECK(probability_lower_bound(spec, w, dag) ==
          doctest::Approx(probability(spec, w, dag) * shared).epsilon(1e-12));
  }
  SUBCASE("from the inputs, q is one") {
    // Output wired straight to x1: q is just that edge.
    const SampledDag dag = wiring({{0, 0, 0, 0, 0, 0}, {0, 0, 0}, {1}});
    CHECK(probability_lower_bound(spec, w, dag) ==
          doctest::Approx(softmax_rows(w.at(3))(0, 1)).epsilon(1e-14));
  }
  SUBCASE("q <= p on every enumerated wiring, equality on trees") {
    for (const auto& e : oracle::enumerate(spec, w)) {
      const double p = probability(spec, w, e.dag);
      const double q = probability_lower_bound(spec, w, e.dag);
      CHECK(q == doctest::Approx(e.lower_bound).epsilon(1e-12));
      CHECK(q <= p + 1e-12);
      if (e.tree) CHECK(std::abs(q - p) <= 1e-12);
    }
  }
}

TEST_CASE("equal-probability initialisation") {
  SUBCASE("first softmax layer is all zeros") {
    const NetSpec spec = build_complete(P::calculator_set(), 2, 1);
    const LayerWeights w = init_equal_probability(spec);
    CHECK(w.at(1).isZero());
  }
  for (const NetSpec& spec : {build_complete({P::sin(), P::add()}, 1, 2),
                              build_complete({P::add(), P::sub(), P::mul(), P::div()}, 2, 1),
                              build_complete({P::add(), P::mul()}, 2, 2),
                              build_standard({P::add(), P::sin()}, 2, 3)}) {
    const LayerWeights w = init_equal_probability(spec);
    const auto all = oracle::enumerate(spec, w);
    double q_min = 1.0, q_max = 0.0;
    for (const auto& e : all) {
      q_min = std::min(q_min, e.lower_bound);
      q_max = std::max(q_max, e.lower_bound);
    }
    CHECK(q_max / q_min - 1.0 < 1e-9);
    // The swept common value for the output layer is that same q.
    CHECK(equal_probability_sweep_values(spec).back() == doctest::Approx(q_min).epsilon(1e-12));
    // Tree-shaped wirings have p equal to the uniform q.
    for (const auto& e : all) {
      if (e.tree) CHECK(probability(spec, w, e.dag) == doctest::Approx(q_min).epsilon(1e-9));
    }
  }
  SUBCASE("q~ is constant across the rows of every layer") {
    const NetSpec spec = build_complete({P::add(), P::sin()}, 2, 2);
    const LayerWeights w = init_equal_probability(spec);
    std::vector<std::vector<double>> q_image{std::vector<double>(2, 1.0)};
    for (int l = 1; l <= spec.n_softmax_layers(); ++l) {
      const Eigen::MatrixXd p = softmax_rows(w.at(l));
      const double expected = equal_probability_sweep_values(spec)[l - 1];
      for (int r = 0; r < p.rows(); ++r) {
        for (int c = 0; c < p.cols(); ++c) {
          const NodeRef n = spec.source_node(l, c);
          CHECK(p(r, c) * q_image[n.layer][n.index] == doctest::Approx(expected).epsilon(1e-12));
        }
      }
      if (l <= spec.n_layers()) {
        std::vector<double> next;
        for (const auto& prim : spec.layer(l)) next.push_back(std::pow(expected, prim.arity));
        q_image.push_back(next);
      }
    }
  }
}

TEST_CASE("argmax_function") {
  const NetSpec spec = build_complete({P::add(), P::sub(), P::mul(), P::div()}, 2, 1);
  SUBCASE("saturated weights select their wiring") {
    LayerWeights w = zero_weights(spec);
    w.at(2)(0, 2) = 30.0;  // '+'
    w.at(1)(0, 0) = 30.0;
    w.at(1)(1, 1) = 30.0;
    const FunctionSample best = argmax_function(spec, w, 3);
    CHECK(expression(spec, best.dag) == "+(x0,x1)");
    const double in[] = {6.0, 7.0};
    CHECK(evaluate(spec, best.dag, in) == 13.0);
  }
  SUBCASE("deterministic under a fixed seed, result is enumerable") {
    const LayerWeights w = zero_weights(spec);
    const FunctionSample a = argmax_function(spec, w, 17);
    const FunctionSample b = argmax_function(spec, w, 17);
    CHECK(a.dag == b.dag);
    std::set<SampledDag> all;
    for (const auto& e : oracle::enumerate(spec, w)) all.insert(e.dag);
    CHECK(all.count(a.dag) == 1);
  }
  SUBCASE("ties resolve to the smallest canonical wiring") {
    // Uniform weights: all four-row-deep wirings through a binary op tie.
    const NetSpec tiny = build_standard({P::sin(), P::cos()}, 1, 1);
    const FunctionSample best = argmax_function(tiny, zero_weights(tiny), 5, 100);
    CHECK(best.dag == wiring({{0, 0}, {0}}));
  }
}

TEST_CASE("expressions normalise for comparison") {
  const double distinct[] = {2.0, 3.0};
  const double same[] = {4.0, 4.0};
  CHECK(normalize(parse_expr("+(x1,x0)"), distinct) == normalize(parse_expr("+(x0,x1)"), distinct));
  CHECK_FALSE(normalize(parse_expr("-(x1,x0)"), distinct) == normalize(parse_expr("-(x0,x1)"), distinct));
  CHECK(normalize(parse_expr("sqrt(x1)"), same) == normalize(parse_expr("sqrt(x0)"), same));
  CHECK(parse_expr("pow(x0,-(x1,x2))").str() == "pow(x0,-(x1,x2))");
  CHECK_THROWS_AS(parse_expr("+(x0"), ConfigError);
}

TEST_CASE("OCNW checkpoint") {
  const NetSpec spec = build_complete({P::add(), P::sin(), P::power()}, 3, 2);
  const LayerWeights w = random_weights(spec, 8);
  const std::string bytes = encode_network(spec, w);
  CHECK(bytes.substr(0, 4) == "OCNW");
  const auto [spec2, w2] = decode_network(bytes);
  CHECK(spec2.hash() == spec.hash());
  for (int l = 1; l <= spec.n_softmax_layers(); ++l) CHECK(w2.at(l) == w.at(l));
  CHECK(encode_network(spec2, w2) == bytes);

  std::string bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(decode_network(bad), FormatError);
  CHECK_THROWS_AS(decode_network(bytes.substr(0, bytes.size() - 3)), FormatError);
  std::string v2 = bytes;
  v2[4] = 2;
  CHECK_THROWS_AS(decode_network(v2), FormatError);
}
