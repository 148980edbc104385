// Copyright 2026 The occamllm Authors
// SPDX-License-Identifier: Apache-2.0
//
// Test-only enumeration oracle. It re-derives the column layout and the
// softmax from the architecture lists alone and walks every output-connected
// wiring by recursive expansion over argument rows. Nothing here calls the
// library's sampling or probability code.

#pragma once

#include <cmath>
#include <map>
#include <utility>
#include <vector>

#include "occamllm/occamnet.hpp"

namespace oracle {

struct Enumerated {
  occamllm::SampledDag dag;  // unconnected rows set to column 0
  double probability = 0.0;  // product over connected rows, each counted once
  double lower_bound = 0.0;  // shared sub-graphs multiplied once per use
  bool tree = true;          // no image node feeds two argument rows
};

class Enumerator {
 public:
  Enumerator(const occamllm::NetSpec& spec, const occamllm::LayerWeights& w) : spec_(spec) {
    for (int l = 1; l <= spec.n_layers() + 1; ++l) {
      const auto& m = w.layers[l - 1];
      std::vector<std::vector<double>> rows;
      for (int r = 0; r < m.rows(); ++r) {
        double z = 0.0;
        double mx = m(r, 0);
        for (int c = 0; c < m.cols(); ++c) mx = std::max(mx, m(r, c));
        std::vector<double> p(m.cols());
        for (int c = 0; c < m.cols(); ++c) z += (p[c] = std::exp(m(r, c) - mx));
        for (double& v : p) v /= z;
        rows.push_back(std::move(p));
      }
      probs_.push_back(std::move(rows));
    }
  }

  // Column c of softmax layer l -> (image layer, node index).
  std::pair<int, int> node_of(int l, int c) const {
    if (!spec_.complete()) return {l - 1, c};
    for (int k = 0; k < l; ++k) {
      const int width = k == 0 ? spec_.n_inputs() : static_cast<int>(spec_.layers()[k - 1].size());
      if (c < width) return {k, c};
      c -= width;
    }
    return {-1, -1};
  }

  int columns(int l) const { return static_cast<int>(probs_[l - 1][0].size()); }

  int first_arg_row(int layer, int index) const {
    int row = 0;
    for (int i = 0; i < index; ++i) row += spec_.layers()[layer - 1][i].arity;
    return row;
  }

  std::vector<Enumerated> all() {
    out_.clear();
    assignment_.clear();
    expanded_.clear();
    expand({{spec_.n_layers() + 1, 0}});
    return out_;
  }

 private:
  using Row = std::pair<int, int>;

  void expand(std::vector<Row> pending) {
    if (pending.empty()) {
      emit();
      return;
    }
    const Row row = pending.back();
    pending.pop_back();
    for (int c = 0; c < columns(row.first); ++c) {
      assignment_[row] = c;
      const auto node = node_of(row.first, c);
      std::vector<Row> next = pending;
      const bool fresh = node.first > 0 && !expanded_.count(node);
      if (fresh) {
        expanded_[node] = true;
        const int arity = spec_.layers()[node.first - 1][node.second].arity;
        const int first = first_arg_row(node.first, node.second);
        for (int a = 0; a < arity; ++a) next.push_back({node.first, first + a});
      }
      expand(std::move(next));
      if (fresh) expanded_.erase(node);
    }
    assignment_.erase(row);
  }

  void emit() {
    Enumerated e;
    e.dag.choice.resize(spec_.n_layers() + 1);
    for (int l = 1; l <= spec_.n_layers() + 1; ++l) {
      const int rows = l == spec_.n_layers() + 1 ? 1 : first_arg_row(l, static_cast<int>(spec_.layers()[l - 1].size()));
      e.dag.choice[l - 1].assign(rows, 0);
    }
    e.probability = 1.0;
    std::map<std::pair<int, int>, int> uses;
    for (const auto& [row, c] : assignment_) {
      e.dag.choice[row.first - 1][row.second] = c;
      e.probability *= probs_[row.first - 1][row.second][c];
      const auto node = node_of(row.first, c);
      if (node.first > 0 && ++uses[node] > 1) e.tree = false;
    }
    e.lower_bound = bound({spec_.n_layers() + 1, 0});
    out_.push_back(std::move(e));
  }

  double bound(Row row) const {
    const int c = assignment_.at(row);
    const auto node = node_of(row.first, c);
    double q = probs_[row.first - 1][row.second][c];
    if (node.first > 0) {
      const int arity = spec_.layers()[node.first - 1][node.second].arity;
      const int first = first_arg_row(node.first, node.second);
      for (int a = 0; a < arity; ++a) q *= bound({node.first, first + a});
    }
    return q;
  }

  const occamllm::NetSpec& spec_;
  std::vector<std::vector<std::vector<double>>> probs_;
  std::map<Row, int> assignment_;
  std::map<std::pair<int, int>, bool> expanded_;
  std::vector<Enumerated> out_;
};

inline std::vector<Enumerated> enumerate(const occamllm::NetSpec& spec,
                                         const occamllm::LayerWeights& w) {
  return Enumerator(spec, w).all();
}

}  // namespace oracle
