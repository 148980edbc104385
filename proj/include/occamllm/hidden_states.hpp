// Copyright 2026 The occamllm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace occamllm {

/// Per-token hidden states of a stream. Token t is a hidden_dim x n_layers
/// matrix whose column j is h_{j+1}.
struct HiddenStates {
  int n_layers = 0;
  int hidden_dim = 0;
  std::vector<Eigen::MatrixXd> tokens;
  std::vector<std::string> token_text;  // may be empty when unknown

  std::size_t size() const { return tokens.size(); }
};

/// Source of hidden states for text. Implementations are deterministic.
class HiddenStateProvider {
 public:
  virtual ~HiddenStateProvider() = default;
  virtual std::string name() const = 0;
  virtual int n_layers() const = 0;
  virtual int hidden_dim() const = 0;
  virtual HiddenStates encode(std::string_view text) const = 0;
  /// States of the final token only.
  virtual Eigen::MatrixXd encode_last(std::string_view text) const {
    HiddenStates all = encode(text);
    return all.tokens.back();
  }
};

/// 64-bit FNV-1a of the UTF-8 bytes, as 16 lowercase hex digits. Hidden-state
/// files are keyed by this digest of the prompt text.
std::string prompt_hash(std::string_view text);

// Hidden-state file ("OCHS" v1), little-endian:
//   magic "OCHS", u32 version, u32 n_tokens, u32 n_layers, u32 hidden_dim,
//   f32 data[n_tokens][n_layers][hidden_dim],
//   u32 metadata length, metadata bytes (UTF-8 JSON object).
// Metadata keys read here: "tokenizer", "prompt_hash", optional "tokens".
struct HiddenStateFile {
  std::vector<float> data;  // token-major, then layer, then dim
  std::uint32_t n_tokens = 0;
  std::uint32_t n_layers = 0;
  std::uint32_t hidden_dim = 0;
  std::string metadata_json = "{}";

  HiddenStates widen() const;
};

std::string encode_hidden_states(const HiddenStateFile& file);
/// Throws FormatError naming the offending byte offset.
HiddenStateFile decode_hidden_states(std::string_view bytes, const std::string& what = "OCHS");
void save_hidden_states(const std::string& path, const HiddenStateFile& file);
HiddenStateFile read_hidden_state_file(const std::string& path);
HiddenStates load_hidden_states(const std::string& path);

/// Serves states from a directory of exported OCHS files, matched to text by
/// the metadata prompt hash.
class FileProvider : public HiddenStateProvider {
 public:
  explicit FileProvider(const std::string& directory);
  std::string name() const override { return "file"; }
  int n_layers() const override { return n_layers_; }
  int hidden_dim() const override { return hidden_dim_; }
  HiddenStates encode(std::string_view text) const override;
  std::size_t file_count() const { return by_hash_.size(); }

 private:
  std::map<std::string, std::string> by_hash_;
  int n_layers_ = 0;
  int hidden_dim_ = 0;
};

}  // namespace occamllm
