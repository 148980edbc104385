// Copyright 2026 The occamllm Authors
// SPDX-License-Identifier: Apache-2.0

#include "occamllm/hidden_states.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include <json.hpp>

#include "occamllm/binary_io.hpp"
#include "occamllm/errors.hpp"

namespace occamllm {
namespace {

constexpr std::uint32_t kVersion = 1;

}  // namespace

std::string prompt_hash(std::string_view text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

HiddenStates HiddenStateFile::widen() const {
  HiddenStates out;
  out.n_layers = static_cast<int>(n_layers);
  out.hidden_dim = static_cast<int>(hidden_dim);
  const std::size_t per_token = std::size_t{n_layers} * hidden_dim;
  for (std::uint32_t t = 0; t < n_tokens; ++t) {
    Eigen::MatrixXd m(hidden_dim, n_layers);
    const float* base = data.data() + t * per_token;
    for (std::uint32_t j = 0; j < n_layers; ++j) {
      for (std::uint32_t d = 0; d < hidden_dim; ++d) m(d, j) = base[j * hidden_dim + d];
    }
    out.tokens.push_back(std::move(m));
  }
  const auto meta = nlohmann::json::parse(metadata_json, nullptr, false);
  if (meta.is_object() && meta.contains("tokens") && meta["tokens"].is_array()) {
    for (const auto& t : meta["tokens"]) out.token_text.push_back(t.is_string() ? t.get<std::string>() : "");
    if (out.token_text.size() != out.tokens.size()) out.token_text.clear();
  }
  return out;
}

std::string encode_hidden_states(const HiddenStateFile& file) {
  if (file.data.size() != std::size_t{file.n_tokens} * file.n_layers * file.hidden_dim) {
    throw StructuralError("hidden-state data size does not match its header");
  }
  io::Writer w;
  w.bytes("OCHS");
  w.u32(kVersion);
  w.u32(file.n_tokens);
  w.u32(file.n_layers);
  w.u32(file.hidden_dim);
  for (float v : file.data) w.f32(v);
  w.str(file.metadata_json);
  return w.data();
}

HiddenStateFile decode_hidden_states(std::string_view bytes, const std::string& what) {
  io::Reader r(bytes, what);
  r.magic("OCHS");
  const std::uint32_t version = r.u32();
  if (version != kVersion) {
    r.fail("unsupported version " + std::to_string(version));
  }
  HiddenStateFile f;
  f.n_tokens = r.u32();
  f.n_layers = r.u32();
  f.hidden_dim = r.u32();
  if (f.n_layers == 0 || f.hidden_dim == 0) r.fail("zero layer count or hidden dim");
  const std::uint64_t count = std::uint64_t{f.n_tokens} * f.n_layers * f.hidden_dim;
  if (count * sizeof(float) > r.remaining()) {
    r.fail("truncated state block: header promises " + std::to_string(count) + " floats");
  }
  f.data.resize(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    f.data[i] = r.f32();
  }
  for (std::uint64_t i = 0; i < count; ++i) {
    if (!std::isfinite(f.data[i])) {
      throw FormatError(what + ": non-finite state value at offset " +
                        std::to_string(20 + i * sizeof(float)));
    }
  }
  f.metadata_json = r.str();
  if (!nlohmann::json::accept(f.metadata_json)) r.fail("metadata is not valid JSON");
  if (r.remaining() != 0) r.fail("trailing bytes after metadata");
  return f;
}

void save_hidden_states(const std::string& path, const HiddenStateFile& file) {
  io::write_file(path, encode_hidden_states(file));
}

HiddenStateFile read_hidden_state_file(const std::string& path) {
  return decode_hidden_states(io::read_file(path), path);
}

HiddenStates load_hidden_states(const std::string& path) { return read_hidden_state_file(path).widen(); }

FileProvider::FileProvider(const std::string& directory) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(directory)) throw ConfigError("hidden-state directory not found: " + directory);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(directory)) {
    if (entry.is_regular_file() && entry.path().extension() == ".ochs") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const fs::path& p : files) {
    const HiddenStateFile f = read_hidden_state_file(p.string());
    const auto meta = nlohmann::json::parse(f.metadata_json);
    if (!meta.contains("prompt_hash") || !meta["prompt_hash"].is_string()) {
      throw FormatError(p.string() + ": metadata lacks \"prompt_hash\"");
    }
    if (n_layers_ == 0) {
      n_layers_ = static_cast<int>(f.n_layers);
      hidden_dim_ = static_cast<int>(f.hidden_dim);
    } else if (n_layers_ != static_cast<int>(f.n_layers) || hidden_dim_ != static_cast<int>(f.hidden_dim)) {
      throw ConfigError(p.string() + ": dimensions differ from the rest of the directory");
    }
    by_hash_[meta["prompt_hash"].get<std::string>()] = p.string();
  }
  if (by_hash_.empty()) throw ConfigError("no .ochs files in " + directory);
}

HiddenStates FileProvider::encode(std::string_view text) const {
  const auto it = by_hash_.find(prompt_hash(text));
  if (it == by_hash_.end()) {
    throw ConfigError("no exported hidden states for prompt hash " + prompt_hash(text));
  }
  HiddenStates s = load_hidden_states(it->second);
  if (s.tokens.empty()) throw FormatError(it->second + ": zero tokens");
  return s;
}

}  // namespace occamllm
