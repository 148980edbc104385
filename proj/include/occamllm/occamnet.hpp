// Copyright 2026 The occamllm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "occamllm/primitive.hpp"

namespace occamllm {

/// Address of a node in an image sublayer. Layer 0 holds the inputs.
struct NodeRef {
  int layer = 0;
  int index = 0;
  friend bool operator==(const NodeRef&, const NodeRef&) = default;
};

/// Architecture of an OccamNet.
///
/// Softmax layers are numbered 1..L+1. Softmax layer l (l <= L) feeds the
/// arguments sublayer of activation layer l; softmax layer L+1 feeds the single
/// output node. With `complete` set, softmax layer l reads the concatenation
/// [inputs, image 1, ..., image l-1]; otherwise it reads image l-1 only.
class NetSpec {
 public:
  NetSpec() = default;
  NetSpec(int n_inputs, std::vector<std::vector<Primitive>> layers, bool complete);

  int n_inputs() const { return n_inputs_; }
  int n_layers() const { return static_cast<int>(layers_.size()); }
  int n_softmax_layers() const { return n_layers() + 1; }
  bool complete() const { return complete_; }
  int max_arity() const { return max_arity_; }

  const std::vector<Primitive>& layer(int l) const { return layers_.at(l - 1); }
  const std::vector<std::vector<Primitive>>& layers() const { return layers_; }
  const Primitive& primitive(NodeRef node) const { return layers_[node.layer - 1][node.index]; }

  /// N^(l): image nodes in layer l (n_inputs for l = 0).
  int image_count(int l) const;
  /// M^(l): argument nodes in layer l; 1 for the output layer L+1.
  int row_count(int l) const;
  /// Width of the input vector of softmax layer l.
  int source_count(int l) const;
  /// First argument row of primitive `index` in layer l.
  int arg_offset(int l, int index) const { return arg_offsets_[l - 1][index]; }
  /// Maps a column of softmax layer l back to the image node it reads.
  NodeRef source_node(int l, int column) const;

  /// Total number of weights across all softmax layers.
  int weight_count() const;

  /// Stable FNV-1a digest of the architecture (inputs, primitive names, flags).
  std::uint64_t hash() const;

 private:
  int n_inputs_ = 0;
  std::vector<std::vector<Primitive>> layers_;
  bool complete_ = false;
  int max_arity_ = 1;
  std::vector<std::vector<int>> arg_offsets_;
};

/// Complete OccamNet: primitive repetition A^(L-l) in layer l plus skip
/// connections. Throws ConfigError for zero layers or no primitives.
NetSpec build_complete(const std::vector<Primitive>& base, int n_inputs, int n_layers);

/// Plain OccamNet: every primitive once per layer, no skip connections.
NetSpec build_standard(const std::vector<Primitive>& base, int n_inputs, int n_layers);

/// One weight matrix per softmax layer, rows = argument nodes, cols = sources.
struct LayerWeights {
  std::vector<Eigen::MatrixXd> layers;  // index 0 is softmax layer 1

  const Eigen::MatrixXd& at(int l) const { return layers.at(l - 1); }
  Eigen::MatrixXd& at(int l) { return layers.at(l - 1); }
};

LayerWeights zero_weights(const NetSpec& spec);

/// Throws StructuralError if the shapes do not match spec, or if any entry is
/// not finite.
void check_shapes(const NetSpec& spec, const LayerWeights& weights);

/// Row-wise softmax, numerically stabilised.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> softmax_rows(
    const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out =
      (logits.colwise() - logits.rowwise().maxCoeff()).array().exp().matrix();
  out.array().colwise() /= out.rowwise().sum().array();
  return out;
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> log_softmax_rows(
    const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> shifted =
      logits.colwise() - logits.rowwise().maxCoeff();
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> lse = shifted.array().exp().rowwise().sum().log();
  return shifted.colwise() - lse;
}

/// One wiring: for every argument node, the chosen source column.
struct SampledDag {
  std::vector<std::vector<int>> choice;  // [softmax layer - 1][row]

  friend bool operator==(const SampledDag&, const SampledDag&) = default;
  friend auto operator<=>(const SampledDag& a, const SampledDag& b) {
    return a.choice <=> b.choice;
  }
};

struct FunctionSample {
  SampledDag dag;
  double log_prob = 0.0;  // over output-connected edges
};

/// Argument rows reachable from the output, as (softmax layer, row) pairs,
/// ordered by descending layer then row. Each row appears once.
std::vector<std::pair<int, int>> connected_rows(const NetSpec& spec, const SampledDag& dag);

/// Copy of `dag` with every row not connected to the output set to column 0,
/// so wirings of the same computational graph compare equal.
SampledDag canonicalize(const NetSpec& spec, const SampledDag& dag);

/// Draws wirings from fixed weights. Holds per-row cumulative distributions so
/// repeated draws cost one uniform and one binary search per row.
class Sampler {
 public:
  Sampler(const NetSpec& spec, const LayerWeights& weights);

  SampledDag draw(std::mt19937_64& rng) const;
  double log_prob(const SampledDag& dag) const;
  const NetSpec& spec() const { return *spec_; }
  const std::vector<Eigen::MatrixXd>& log_probs() const { return log_probs_; }

 private:
  const NetSpec* spec_;
  std::vector<Eigen::MatrixXd> cumulative_;  // row-wise running sums
  std::vector<Eigen::MatrixXd> log_probs_;
};

std::vector<FunctionSample> sample(const NetSpec& spec, const LayerWeights& weights,
                                   std::uint64_t seed, int count);

/// Forward pass through the wiring. Returns nullopt on a domain violation or
/// a non-finite intermediate. Throws StructuralError only if `inputs` has the
/// wrong length.
std::optional<double> evaluate(const NetSpec& spec, const SampledDag& dag,
                               std::span<const double> inputs);

/// Exact probability of the output-connected subgraph.
double probability(const NetSpec& spec, const LayerWeights& weights, const SampledDag& dag);
double log_probability(const NetSpec& spec, const LayerWeights& weights, const SampledDag& dag);

/// Propagated lower bound q_W: shared subgraphs contribute once per use.
double probability_lower_bound(const NetSpec& spec, const LayerWeights& weights,
                               const SampledDag& dag);

/// Weights that make the lower bound q identical for every wiring.
LayerWeights init_equal_probability(const NetSpec& spec);

/// Common value of q after init_equal_probability, per softmax layer (the
/// q~ of that layer's argument nodes). Exposed for tests of the sweep.
std::vector<double> equal_probability_sweep_values(const NetSpec& spec);

/// Best of `n_samples` draws by exact probability. Ties within 1e-12 in log
/// space go to the lexicographically smallest canonical wiring.
FunctionSample argmax_function(const NetSpec& spec, const LayerWeights& weights,
                               std::uint64_t seed, int n_samples = 100);

/// Symbolic form of a wiring, e.g. "+(x0,*(x1,x2))".
std::string expression(const NetSpec& spec, const SampledDag& dag);

/// Expression tree used to compare wirings against expected functions.
struct Expr {
  std::string op;  // empty for an input leaf
  int input = -1;
  std::vector<Expr> args;

  static Expr leaf(int i) { return Expr{"", i, {}}; }
  static Expr node(std::string op, std::vector<Expr> args) {
    return Expr{std::move(op), -1, std::move(args)};
  }
  std::string str() const;
  friend bool operator==(const Expr&, const Expr&) = default;
};

Expr to_expr(const NetSpec& spec, const SampledDag& dag);

/// Normal form for structural comparison: input leaves are replaced by the
/// first input index holding the same value, and arguments of commutative
/// operators are sorted.
Expr normalize(const Expr& e, std::span<const double> inputs);

/// Parses the output of Expr::str() or expression(). Throws ConfigError.
Expr parse_expr(std::string_view text);

}  // namespace occamllm
