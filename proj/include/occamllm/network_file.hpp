// Copyright 2026 The occamllm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>

#include "occamllm/binary_io.hpp"
#include "occamllm/occamnet.hpp"

namespace occamllm {

/// OCNW network checkpoint, version 1:
///
///   "OCNW"            4 bytes
///   version           u32 (= 1)
///   n_inputs          u32
///   n_layers          u32  (activation layers L)
///   complete          u8
///   per layer 1..L:   u32 count, then count primitive names (u32 length + UTF-8)
///   n_softmax         u32  (= L + 1)
///   per softmax layer u32 rows, u32 cols, rows*cols f64, row-major
///
/// All integers and floats little-endian.
inline constexpr std::uint32_t kNetworkFileVersion = 1;

void write_spec_descriptor(io::Writer& out, const NetSpec& spec);
NetSpec read_spec_descriptor(io::Reader& in);

std::string encode_network(const NetSpec& spec, const LayerWeights& weights);
std::pair<NetSpec, LayerWeights> decode_network(std::string_view bytes);

void save_network(const std::string& path, const NetSpec& spec, const LayerWeights& weights);
std::pair<NetSpec, LayerWeights> load_network(const std::string& path);

}  // namespace occamllm
