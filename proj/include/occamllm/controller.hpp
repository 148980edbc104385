// Copyright 2026 The occamllm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "occamllm/mlp.hpp"
#include "occamllm/occamnet.hpp"

namespace occamllm {

/// Decoder for one softmax layer: logits = MLP(H w) + init_offset, where H is
/// the token's hidden_dim x L state matrix and w the layer-mixing weights.
struct LayerDecoder {
  Eigen::VectorXd mixing;
  Mlp<double> mlp;
  Eigen::MatrixXd init_offset;  // fixed; never trained
};

struct DecoderParams {
  std::uint64_t spec_hash = 0;
  int n_state_layers = 0;
  int hidden_dim = 0;
  std::vector<LayerDecoder> layers;  // one per softmax layer, 1..L+1
};

struct SwitchParams {
  int n_state_layers = 0;
  int hidden_dim = 0;
  Eigen::VectorXd mixing;
  Mlp<double> mlp;  // single output
};

/// Fresh decoder: mixing 1/L, random first layer, zero final layer, and the
/// equal-probability weights of `spec` as offsets.
DecoderParams make_decoder(const NetSpec& spec, int n_state_layers, int hidden_dim, int width,
                           std::uint64_t seed);
/// Fresh switch; the zero final layer makes every score start at 0.5.
SwitchParams make_switch(int n_state_layers, int hidden_dim, int width, std::uint64_t seed);

/// Intermediate values kept for the backward pass.
struct DecoderCache {
  std::vector<Mlp<double>::Cache> layers;
};

/// Throws StructuralError when `h` has the wrong shape.
LayerWeights decode_weights(const DecoderParams& params, const Eigen::MatrixXd& h,
                            DecoderCache* cache = nullptr);

/// Back-propagates d loss / d logits (one matrix per softmax layer) into
/// `grad`, which accumulates and must be shaped like `params`.
void decoder_backward(const DecoderParams& params, const Eigen::MatrixXd& h, const DecoderCache& cache,
                      const std::vector<Eigen::MatrixXd>& d_logits, DecoderParams& grad);

/// Raw switch logit before the sigmoid.
double switch_logit(const SwitchParams& params, const Eigen::MatrixXd& h,
                    Mlp<double>::Cache* cache = nullptr);
/// Routing score in (0, 1); above 0.5 means "use OccamNet".
double decode_switch(const SwitchParams& params, const Eigen::MatrixXd& h);
void switch_backward(const SwitchParams& params, const Eigen::MatrixXd& h, const Mlp<double>::Cache& cache,
                     double d_logit, SwitchParams& grad);

/// Same shapes, all trainable entries zero.
DecoderParams zeros_like(const DecoderParams& params);
SwitchParams zeros_like(const SwitchParams& params);

/// Trainable parameters in a fixed order (mixing then perceptron blocks, per
/// layer). init_offset is excluded.
Eigen::VectorXd flatten(const DecoderParams& params);
Eigen::VectorXd flatten(const SwitchParams& params);
void unflatten(DecoderParams& params, const Eigen::VectorXd& flat);
void unflatten(SwitchParams& params, const Eigen::VectorXd& flat);

/// Everything a trained run produces.
struct Controller {
  std::optional<DecoderParams> decoder;
  std::optional<SwitchParams> switcher;
};

// Controller checkpoint ("OCCT" v1), little-endian:
//   magic "OCCT", u32 version, u64 spec hash, u32 state layers, u32 hidden dim,
//   u8 has_decoder, [u32 n_decoders, per decoder: u32 width, u32 rows,
//   u32 cols, f64 mixing[L], w1[width][hidden], b1[width],
//   w2[rows*cols][width], b2[rows*cols], init_offset[rows][cols]],
//   u8 has_switch, [u32 width, f64 mixing[L], w1, b1, w2[1][width], b2[1]].
// Matrices are row-major.
std::string encode_controller(const Controller& c);
Controller decode_controller(std::string_view bytes, const std::string& what = "OCCT");
void save_controller(const std::string& path, const Controller& c);
Controller load_controller(const std::string& path);

/// Throws ConfigError when the decoder was trained for another network or
/// other hidden-state dimensions.
void check_compatible(const DecoderParams& params, const NetSpec& spec, int n_state_layers, int hidden_dim);
void check_compatible(const SwitchParams& params, int n_state_layers, int hidden_dim);

}  // namespace occamllm
