// Copyright 2026 The occamllm Authors
// SPDX-License-Identifier: Apache-2.0

#include "occamllm/network_file.hpp"

namespace occamllm {

void write_spec_descriptor(io::Writer& out, const NetSpec& spec) {
  out.u32(static_cast<std::uint32_t>(spec.n_inputs()));
  out.u32(static_cast<std::uint32_t>(spec.n_layers()));
  out.u8(spec.complete() ? 1 : 0);
  for (const auto& layer : spec.layers()) {
    out.u32(static_cast<std::uint32_t>(layer.size()));
    for (const Primitive& p : layer) out.str(p.name);
  }
}

NetSpec read_spec_descriptor(io::Reader& in) {
  const std::uint32_t n_inputs = in.u32();
  const std::uint32_t n_layers = in.u32();
  const std::uint8_t complete = in.u8();
  if (n_inputs == 0 || n_layers == 0 || n_layers > 64) in.fail("implausible network dimensions");
  if (complete > 1) in.fail("complete flag must be 0 or 1");
  std::vector<std::vector<Primitive>> layers;
  for (std::uint32_t l = 0; l < n_layers; ++l) {
    const std::uint32_t count = in.u32();
    if (count == 0 || count > in.remaining()) in.fail("bad primitive count");
    std::vector<Primitive> layer;
    for (std::uint32_t i = 0; i < count; ++i) {
      const std::string name = in.str();
      try {
        layer.push_back(primitives::by_name(name));
      } catch (const ConfigError& e) {
        in.fail(e.what());
      }
    }
    layers.push_back(std::move(layer));
  }
  return NetSpec(static_cast<int>(n_inputs), std::move(layers), complete == 1);
}

std::string encode_network(const NetSpec& spec, const LayerWeights& weights) {
  check_shapes(spec, weights);
  io::Writer out;
  out.bytes("OCNW");
  out.u32(kNetworkFileVersion);
  write_spec_descriptor(out, spec);
  out.u32(static_cast<std::uint32_t>(weights.layers.size()));
  for (const Eigen::MatrixXd& m : weights.layers) {
    out.u32(static_cast<std::uint32_t>(m.rows()));
    out.u32(static_cast<std::uint32_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) out.f64(m(r, c));
    }
  }
  return out.data();
}

std::pair<NetSpec, LayerWeights> decode_network(std::string_view bytes) {
  io::Reader in(bytes, "OCNW");
  in.magic("OCNW");
  const std::uint32_t version = in.u32();
  if (version != kNetworkFileVersion) {
    in.fail("unsupported version " + std::to_string(version));
  }
  NetSpec spec = read_spec_descriptor(in);
  const std::uint32_t n_softmax = in.u32();
  if (static_cast<int>(n_softmax) != spec.n_softmax_layers()) in.fail("softmax layer count mismatch");
  LayerWeights w;
  for (int l = 1; l <= spec.n_softmax_layers(); ++l) {
    const std::uint32_t rows = in.u32();
    const std::uint32_t cols = in.u32();
    if (static_cast<int>(rows) != spec.row_count(l) || static_cast<int>(cols) != spec.source_count(l)) {
      in.fail("weight shape mismatch in softmax layer " + std::to_string(l));
    }
    Eigen::MatrixXd m(rows, cols);
    for (std::uint32_t r = 0; r < rows; ++r) {
      for (std::uint32_t c = 0; c < cols; ++c) m(r, c) = in.f64();
    }
    w.layers.push_back(std::move(m));
  }
  if (in.remaining() != 0) in.fail("trailing bytes");
  check_shapes(spec, w);
  return {std::move(spec), std::move(w)};
}

void save_network(const std::string& path, const NetSpec& spec, const LayerWeights& weights) {
  io::write_file(path, encode_network(spec, weights));
}

std::pair<NetSpec, LayerWeights> load_network(const std::string& path) {
  return decode_network(io::read_file(path));
}

}  // namespace occamllm
