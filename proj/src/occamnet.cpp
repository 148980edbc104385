// Copyright 2026 The occamllm Authors
// SPDX-License-Identifier: Apache-2.0

#include "occamllm/occamnet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "occamllm/errors.hpp"

namespace occamllm {

NetSpec::NetSpec(int n_inputs, std::vector<std::vector<Primitive>> layers, bool complete)
    : n_inputs_(n_inputs), layers_(std::move(layers)), complete_(complete) {
  if (n_inputs_ < 1) throw ConfigError("OccamNet needs at least one input");
  if (layers_.empty()) throw ConfigError("OccamNet needs at least one layer");
  max_arity_ = 1;
  for (const auto& layer : layers_) {
    if (layer.empty()) throw ConfigError("OccamNet layer without primitives");
    std::vector<int> offsets;
    int offset = 0;
    for (const Primitive& p : layer) {
      if (p.arity < 1 || p.eval == nullptr) {
        throw ConfigError("primitive '" + p.name + "' has no arity or evaluator");
      }
      offsets.push_back(offset);
      offset += p.arity;
      max_arity_ = std::max(max_arity_, p.arity);
    }
    arg_offsets_.push_back(std::move(offsets));
  }
}

int NetSpec::image_count(int l) const {
  if (l == 0) return n_inputs_;
  return static_cast<int>(layers_.at(l - 1).size());
}

int NetSpec::row_count(int l) const {
  if (l == n_layers() + 1) return 1;
  int m = 0;
  for (const Primitive& p : layers_.at(l - 1)) m += p.arity;
  return m;
}

int NetSpec::source_count(int l) const {
  if (!complete_) return image_count(l - 1);
  int width = 0;
  for (int k = 0; k < l; ++k) width += image_count(k);
  return width;
}

NodeRef NetSpec::source_node(int l, int column) const {
  if (!complete_) return {l - 1, column};
  for (int k = 0; k < l; ++k) {
    const int n = image_count(k);
    if (column < n) return {k, column};
    column -= n;
  }
  throw StructuralError("source column out of range for softmax layer " + std::to_string(l));
}

int NetSpec::weight_count() const {
  int total = 0;
  for (int l = 1; l <= n_softmax_layers(); ++l) total += row_count(l) * source_count(l);
  return total;
}

std::uint64_t NetSpec::hash() const {
  std::uint64_t h = 14695981039346656037ull;
  auto mix = [&h](std::string_view bytes) {
    for (unsigned char c : bytes) {
      h ^= c;
      h *= 1099511628211ull;
    }
  };
  mix(std::to_string(n_inputs_));
  mix(complete_ ? "|complete" : "|standard");
  for (const auto& layer : layers_) {
    mix("|L");
    for (const Primitive& p : layer) {
      mix(",");
      mix(p.name);
    }
  }
  return h;
}

namespace {

void check_build_args(const std::vector<Primitive>& base, int n_inputs, int n_layers) {
  if (n_layers < 1) throw ConfigError("n_layers must be >= 1");
  if (base.empty()) throw ConfigError("primitive set is empty");
  if (n_inputs < 1) throw ConfigError("n_inputs must be >= 1");
}

}  // namespace

NetSpec build_complete(const std::vector<Primitive>& base, int n_inputs, int n_layers) {
  check_build_args(base, n_inputs, n_layers);
  int arity = 1;
  for (const Primitive& p : base) arity = std::max(arity, p.arity);
  std::vector<std::vector<Primitive>> layers;
  for (int l = 1; l <= n_layers; ++l) {
    long repeat = 1;
    for (int k = 0; k < n_layers - l; ++k) repeat *= arity;
    std::vector<Primitive> layer;
    // Copies of the same primitive are placed side by side.
    for (const Primitive& p : base) {
      for (long r = 0; r < repeat; ++r) layer.push_back(p);
    }
    layers.push_back(std::move(layer));
  }
  return NetSpec(n_inputs, std::move(layers), true);
}

NetSpec build_standard(const std::vector<Primitive>& base, int n_inputs, int n_layers) {
  check_build_args(base, n_inputs, n_layers);
  return NetSpec(n_inputs, std::vector<std::vector<Primitive>>(n_layers, base), false);
}

LayerWeights zero_weights(const NetSpec& spec) {
  LayerWeights w;
  for (int l = 1; l <= spec.n_softmax_layers(); ++l) {
    w.layers.push_back(Eigen::MatrixXd::Zero(spec.row_count(l), spec.source_count(l)));
  }
  return w;
}

void check_shapes(const NetSpec& spec, const LayerWeights& weights) {
  if (static_cast<int>(weights.layers.size()) != spec.n_softmax_layers()) {
    throw StructuralError("expected " + std::to_string(spec.n_softmax_layers()) +
                          " softmax layers, got " + std::to_string(weights.layers.size()));
  }
  for (int l = 1; l <= spec.n_softmax_layers(); ++l) {
    const Eigen::MatrixXd& m = weights.at(l);
    if (m.rows() != spec.row_count(l) || m.cols() != spec.source_count(l)) {
      throw StructuralError("softmax layer " + std::to_string(l) + " is " +
                            std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                            ", expected " + std::to_string(spec.row_count(l)) + "x" +
                            std::to_string(spec.source_count(l)));
    }
    if (!m.allFinite()) {
      throw StructuralError("softmax layer " + std::to_string(l) + " has non-finite weights");
    }
  }
}

namespace {

void check_dag(const NetSpec& spec, const SampledDag& dag) {
  if (static_cast<int>(dag.choice.size()) != spec.n_softmax_layers()) {
    throw StructuralError("wiring has the wrong number of softmax layers");
  }
  for (int l = 1; l <= spec.n_softmax_layers(); ++l) {
    const auto& rows = dag.choice[l - 1];
    if (static_cast<int>(rows.size()) != spec.row_count(l)) {
      throw StructuralError("wiring has the wrong number of rows in layer " + std::to_string(l));
    }
    for (int c : rows) {
      if (c < 0 || c >= spec.source_count(l)) {
        throw StructuralError("wiring column out of range in layer " + std::to_string(l));
      }
    }
  }
}

}  // namespace

std::vector<std::pair<int, int>> connected_rows(const NetSpec& spec, const SampledDag& dag) {
  check_dag(spec, dag);
  std::vector<std::vector<char>> seen(spec.n_layers() + 1);
  for (int l = 1; l <= spec.n_layers(); ++l) seen[l].assign(spec.image_count(l), 0);

  std::vector<std::pair<int, int>> rows{{spec.n_softmax_layers(), 0}};
  for (std::size_t next = 0; next < rows.size(); ++next) {
    const auto [l, r] = rows[next];
    const NodeRef src = spec.source_node(l, dag.choice[l - 1][r]);
    if (src.layer == 0 || seen[src.layer][src.index]) continue;
    seen[src.layer][src.index] = 1;
    const int offset = spec.arg_offset(src.layer, src.index);
    for (int a = 0; a < spec.primitive(src).arity; ++a) rows.emplace_back(src.layer, offset + a);
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  return rows;
}

SampledDag canonicalize(const NetSpec& spec, const SampledDag& dag) {
  SampledDag out;
  out.choice.reserve(dag.choice.size());
  for (const auto& rows : dag.choice) out.choice.emplace_back(rows.size(), 0);
  for (const auto& [l, r] : connected_rows(spec, dag)) out.choice[l - 1][r] = dag.choice[l - 1][r];
  return out;
}

Sampler::Sampler(const NetSpec& spec, const LayerWeights& weights) : spec_(&spec) {
  check_shapes(spec, weights);
  for (const Eigen::MatrixXd& w : weights.layers) {
    Eigen::MatrixXd p = softmax_rows(w);
    for (Eigen::Index c = 1; c < p.cols(); ++c) p.col(c) += p.col(c - 1);
    cumulative_.push_back(std::move(p));
    log_probs_.push_back(log_softmax_rows(w));
  }
}

SampledDag Sampler::draw(std::mt19937_64& rng) const {
  SampledDag dag;
  dag.choice.resize(cumulative_.size());
  for (std::size_t l = 0; l < cumulative_.size(); ++l) {
    const Eigen::MatrixXd& cdf = cumulative_[l];
    auto& rows = dag.choice[l];
    rows.resize(cdf.rows());
    const Eigen::Index last = cdf.cols() - 1;
    for (Eigen::Index r = 0; r < cdf.rows(); ++r) {
      // 53-bit uniform in [0, 1), scaled by the row total to absorb rounding.
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53 * cdf(r, last);
      Eigen::Index c = 0;
      while (c < last && cdf(r, c) <= u) ++c;
      rows[r] = static_cast<int>(c);
    }
  }
  return dag;
}

double Sampler::log_prob(const SampledDag& dag) const {
  double total = 0.0;
  for (const auto& [l, r] : connected_rows(*spec_, dag)) {
    total += log_probs_[l - 1](r, dag.choice[l - 1][r]);
  }
  return total;
}

std::vector<FunctionSample> sample(const NetSpec& spec, const LayerWeights& weights,
                                   std::uint64_t seed, int count) {
  const Sampler sampler(spec, weights);
  std::mt19937_64 rng(seed);
  std::vector<FunctionSample> out;
  out.reserve(std::max(count, 0));
  for (int i = 0; i < count; ++i) {
    SampledDag dag = sampler.draw(rng);
    const double lp = sampler.log_prob(dag);
    out.push_back({std::move(dag), lp});
  }
  return out;
}

namespace {

struct Evaluator {
  const NetSpec& spec;
  const SampledDag& dag;
  std::span<const double> inputs;
  std::vector<std::vector<std::optional<double>>> memo;
  std::vector<std::vector<char>> done;

  std::optional<double> node(NodeRef n) {
    if (n.layer == 0) return inputs[n.index];
    if (done[n.layer][n.index]) return memo[n.layer][n.index];
    const Primitive& p = spec.primitive(n);
    const int offset = spec.arg_offset(n.layer, n.index);
    double args[8];
    std::vector<double> wide;
    double* buf = args;
    if (p.arity > 8) {
      wide.resize(p.arity);
      buf = wide.data();
    }
    std::optional<double> result;
    bool ok = true;
    for (int a = 0; a < p.arity && ok; ++a) {
      const auto v = row(n.layer, offset + a);
      if (v) {
        buf[a] = *v;
      } else {
        ok = false;
      }
    }
    if (ok) result = p.apply(std::span<const double>(buf, p.arity));
    done[n.layer][n.index] = 1;
    memo[n.layer][n.index] = result;
    return result;
  }

  std::optional<double> row(int l, int r) {
    return node(spec.source_node(l, dag.choice[l - 1][r]));
  }
};

}  // namespace

std::optional<double> evaluate(const NetSpec& spec, const SampledDag& dag,
                               std::span<const double> inputs) {
  if (static_cast<int>(inputs.size()) != spec.n_inputs()) {
    throw StructuralError("evaluate: expected " + std::to_string(spec.n_inputs()) +
                          " inputs, got " + std::to_string(inputs.size()));
  }
  check_dag(spec, dag);
  Evaluator ev{spec, dag, inputs, {}, {}};
  ev.memo.resize(spec.n_layers() + 1);
  ev.done.resize(spec.n_layers() + 1);
  for (int l = 1; l <= spec.n_layers(); ++l) {
    ev.memo[l].resize(spec.image_count(l));
    ev.done[l].assign(spec.image_count(l), 0);
  }
  return ev.row(spec.n_softmax_layers(), 0);
}

double log_probability(const NetSpec& spec, const LayerWeights& weights, const SampledDag& dag) {
  check_shapes(spec, weights);
  double total = 0.0;
  for (const auto& [l, r] : connected_rows(spec, dag)) {
    const Eigen::MatrixXd lp = log_softmax_rows(weights.at(l).row(r));
    total += lp(0, dag.choice[l - 1][r]);
  }
  return total;
}

double probability(const NetSpec& spec, const LayerWeights& weights, const SampledDag& dag) {
  return std::exp(log_probability(spec, weights, dag));
}

double probability_lower_bound(const NetSpec& spec, const LayerWeights& weights,
                               const SampledDag& dag) {
  check_shapes(spec, weights);
  check_dag(spec, dag);
  std::vector<Eigen::MatrixXd> probs;
  for (const Eigen::MatrixXd& w : weights.layers) probs.push_back(softmax_rows(w));

  // q of image nodes, computed on demand; q_i^(0) = 1 for inputs.
  std::vector<std::vector<double>> q(spec.n_layers() + 1);
  for (int l = 1; l <= spec.n_layers(); ++l) q[l].assign(spec.image_count(l), -1.0);

  auto q_tilde = [&](auto&& self, int l, int r) -> double {
    const int c = dag.choice[l - 1][r];
    const NodeRef src = spec.source_node(l, c);
    double q_src = 1.0;
    if (src.layer > 0) {
      double& cached = q[src.layer][src.index];
      if (cached < 0.0) {
        double prod = 1.0;
        const int offset = spec.arg_offset(src.layer, src.index);
        for (int a = 0; a < spec.primitive(src).arity; ++a) prod *= self(self, src.layer, offset + a);
        cached = prod;
      }
      q_src = cached;
    }
    return probs[l - 1](r, c) * q_src;
  };
  return q_tilde(q_tilde, spec.n_softmax_layers(), 0);
}

std::vector<double> equal_probability_sweep_values(const NetSpec& spec) {
  std::vector<double> q_tilde_per_layer;
  // q of every image node seen so far, in concatenation order.
  std::vector<std::vector<double>> q_image{std::vector<double>(spec.n_inputs(), 1.0)};
  for (int l = 1; l <= spec.n_softmax_layers(); ++l) {
    double inv_sum = 0.0;
    for (int c = 0; c < spec.source_count(l); ++c) {
      const NodeRef n = spec.source_node(l, c);
      inv_sum += 1.0 / q_image[n.layer][n.index];
    }
    const double qt = 1.0 / inv_sum;
    q_tilde_per_layer.push_back(qt);
    if (l <= spec.n_layers()) {
      std::vector<double> next;
      for (const Primitive& p : spec.layer(l)) next.push_back(std::pow(qt, p.arity));
      q_image.push_back(std::move(next));
    }
  }
  return q_tilde_per_layer;
}

LayerWeights init_equal_probability(const NetSpec& spec) {
  LayerWeights w = zero_weights(spec);
  std::vector<std::vector<double>> q_image{std::vector<double>(spec.n_inputs(), 1.0)};
  for (int l = 1; l <= spec.n_softmax_layers(); ++l) {
    const int width = spec.source_count(l);
    std::vector<double> q_src(width);
    for (int c = 0; c < width; ++c) {
      const NodeRef n = spec.source_node(l, c);
      q_src[c] = q_image[n.layer][n.index];
    }
    const double q_min = *std::min_element(q_src.begin(), q_src.end());
    Eigen::RowVectorXd row(width);
    for (int c = 0; c < width; ++c) row(c) = std::log(q_min / q_src[c]);
    w.at(l).rowwise() = row;

    if (l <= spec.n_layers()) {
      double inv_sum = 0.0;
      for (double q : q_src) inv_sum += 1.0 / q;
      const double qt = 1.0 / inv_sum;
      std::vector<double> next;
      for (const Primitive& p : spec.layer(l)) next.push_back(std::pow(qt, p.arity));
      q_image.push_back(std::move(next));
    }
  }
  return w;
}

FunctionSample argmax_function(const NetSpec& spec, const LayerWeights& weights,
                               std::uint64_t seed, int n_samples) {
  if (n_samples < 1) throw ConfigError("argmax_function needs n_samples >= 1");
  const Sampler sampler(spec, weights);
  std::mt19937_64 rng(seed);
  FunctionSample best;
  best.log_prob = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n_samples; ++i) {
    SampledDag dag = canonicalize(spec, sampler.draw(rng));
    const double lp = sampler.log_prob(dag);
    const bool tie = std::abs(lp - best.log_prob) <= 1e-12;
    if ((!tie && lp > best.log_prob) || (tie && dag < best.dag)) {
      best.dag = std::move(dag);
      best.log_prob = lp;
    }
  }
  return best;
}

std::string Expr::str() const {
  if (op.empty()) return "x" + std::to_string(input);
  std::string s = op + "(";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) s += ",";
    s += args[i].str();
  }
  return s + ")";
}

Expr to_expr(const NetSpec& spec, const SampledDag& dag) {
  check_dag(spec, dag);
  auto build = [&](auto&& self, int l, int r) -> Expr {
    const NodeRef src = spec.source_node(l, dag.choice[l - 1][r]);
    if (src.layer == 0) return Expr::leaf(src.index);
    const Primitive& p = spec.primitive(src);
    const int offset = spec.arg_offset(src.layer, src.index);
    std::vector<Expr> args;
    for (int a = 0; a < p.arity; ++a) args.push_back(self(self, src.layer, offset + a));
    return Expr::node(p.name, std::move(args));
  };
  return build(build, spec.n_softmax_layers(), 0);
}

std::string expression(const NetSpec& spec, const SampledDag& dag) {
  return to_expr(spec, dag).str();
}

Expr normalize(const Expr& e, std::span<const double> inputs) {
  if (e.op.empty()) {
    if (e.input < 0 || e.input >= static_cast<int>(inputs.size())) return e;
    for (int i = 0; i < e.input; ++i) {
      if (inputs[i] == inputs[e.input]) return Expr::leaf(i);
    }
    return e;
  }
  Expr out = Expr::node(e.op, {});
  for (const Expr& a : e.args) out.args.push_back(normalize(a, inputs));
  if (primitives::by_name(e.op).commutative) {
    std::sort(out.args.begin(), out.args.end(),
              [](const Expr& a, const Expr& b) { return a.str() < b.str(); });
  }
  return out;
}

Expr parse_expr(std::string_view text) {
  std::size_t pos = 0;
  auto fail = [&](const std::string& why) -> Expr {
    throw ConfigError("bad expression '" + std::string(text) + "': " + why);
  };
  auto parse = [&](auto&& self) -> Expr {
    if (pos >= text.size()) return fail("unexpected end");
    if (text[pos] == 'x' && pos + 1 < text.size() && std::isdigit(static_cast<unsigned char>(text[pos + 1]))) {
      ++pos;
      int idx = 0;
      while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
        idx = idx * 10 + (text[pos++] - '0');
      }
      return Expr::leaf(idx);
    }
    const std::size_t open = text.find('(', pos);
    if (open == std::string_view::npos) return fail("missing '('");
    Expr e = Expr::node(std::string(text.substr(pos, open - pos)), {});
    pos = open + 1;
    while (true) {
      e.args.push_back(self(self));
      if (pos >= text.size()) return fail("unterminated call");
      if (text[pos] == ',') {
        ++pos;
        continue;
      }
      if (text[pos] == ')') {
        ++pos;
        break;
      }
      return fail("expected ',' or ')'");
    }
    return e;
  };
  Expr e = parse(parse);
  if (pos != text.size()) fail("trailing characters");
  return e;
}

}  // namespace occamllm
