// Copyright 2026 The occamllm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "occamllm/hidden_states.hpp"

namespace occamllm {

enum class TokenKind : std::uint8_t { Space, Special, Number, Word, Symbol, Newline };

/// A token of the toy tokenizer. `text` includes trailing spaces; `core`
/// does not.
struct Token {
  std::string text;
  std::string core;
  std::size_t begin = 0;
  std::size_t end = 0;
  TokenKind kind = TokenKind::Symbol;
};

/// Splits text into numbers (digits with an optional fraction), ASCII words,
/// role tags such as "<|user|>", runs of newlines, and single other code
/// points ("**" is kept whole). Spaces after a token belong to it; spaces at
/// the very start form their own token. Concatenating `text` of all tokens
/// gives back the input.
std::vector<Token> tokenize(std::string_view text);

struct ToyEncoderConfig {
  std::uint64_t seed = 7;
  int n_layers = 4;
  int hidden_dim = 1024;
  int version = 1;  // feature-set version; stored with checkpoints
};

using SparseFeatures = std::vector<std::pair<int, double>>;

/// Deterministic stand-in for a frozen language model.
///
/// Each token is described by a causal sparse feature vector: hashed
/// identities of the current and three previous tokens, an operator-cue
/// lexicon, summaries of the clause in progress and of the two most recent
/// completed clauses that contained numbers (operators in order, with
/// bracket depth), counts since the last role tag, and exponentially decayed
/// bags. Pseudo-layer 1 is a fixed random projection of the features;
/// layers 2..L pass other projections through tanh.
class ToyEncoder : public HiddenStateProvider {
 public:
  explicit ToyEncoder(const ToyEncoderConfig& config = {});

  std::string name() const override { return "toy"; }
  int n_layers() const override { return config_.n_layers; }
  int hidden_dim() const override { return config_.hidden_dim; }
  const ToyEncoderConfig& config() const { return config_; }

  HiddenStates encode(std::string_view text) const override;
  Eigen::MatrixXd encode_last(std::string_view text) const override;

  static int feature_count();
  /// [begin, end) of the clause-summary features (operator slots, counts, cues).
  static std::pair<int, int> clause_feature_range();
  /// Features of every token of `text`, in token order.
  static std::vector<SparseFeatures> features(const std::vector<Token>& tokens);

 private:
  Eigen::MatrixXd project(const SparseFeatures& f) const;

  ToyEncoderConfig config_;
  std::vector<Eigen::MatrixXd> projections_;  // per layer: hidden_dim x feature_count
};

}  // namespace occamllm
