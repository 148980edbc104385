// Copyright 2026 The occamllm Authors
// SPDX-License-Identifier: Apache-2.0

#include "occamllm/controller.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "occamllm/binary_io.hpp"
#include "occamllm/errors.hpp"

namespace occamllm {
namespace {

constexpr std::uint32_t kVersion = 1;

void check_states(int n_layers, int hidden_dim, const Eigen::MatrixXd& h) {
  if (h.rows() != hidden_dim || h.cols() != n_layers) {
    throw StructuralError("hidden states are " + std::to_string(h.rows()) + "x" + std::to_string(h.cols()) +
                          ", parameters expect " + std::to_string(hidden_dim) + "x" +
                          std::to_string(n_layers));
  }
}

template <typename Fn>
void visit(DecoderParams& p, Fn&& fn) {
  for (LayerDecoder& d : p.layers) {
    fn(d.mixing.data(), d.mixing.size());
    d.mlp.for_each_block(fn);
  }
}
template <typename Fn>
void visit(const DecoderParams& p, Fn&& fn) {
  for (const LayerDecoder& d : p.layers) {
    fn(d.mixing.data(), d.mixing.size());
    d.mlp.for_each_block(fn);
  }
}
template <typename Fn>
void visit(SwitchParams& p, Fn&& fn) {
  fn(p.mixing.data(), p.mixing.size());
  p.mlp.for_each_block(fn);
}
template <typename Fn>
void visit(const SwitchParams& p, Fn&& fn) {
  fn(p.mixing.data(), p.mixing.size());
  p.mlp.for_each_block(fn);
}

template <typename P>
Eigen::VectorXd flatten_any(const P& p) {
  Eigen::Index n = 0;
  visit(p, [&n](const double*, Eigen::Index size) { n += size; });
  Eigen::VectorXd out(n);
  Eigen::Index at = 0;
  visit(p, [&](const double* data, Eigen::Index size) {
    out.segment(at, size) = Eigen::Map<const Eigen::VectorXd>(data, size);
    at += size;
  });
  return out;
}

template <typename P>
void unflatten_any(P& p, const Eigen::VectorXd& flat) {
  Eigen::Index at = 0;
  visit(p, [&](double* data, Eigen::Index size) {
    if (at + size > flat.size()) throw StructuralError("flat parameter vector too short");
    Eigen::Map<Eigen::VectorXd>(data, size) = flat.segment(at, size);
    at += size;
  });
  if (at != flat.size()) throw StructuralError("flat parameter vector too long");
}

void write_matrix(io::Writer& w, const Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) w.f64(m(r, c));
}

Eigen::MatrixXd read_matrix(io::Reader& r, Eigen::Index rows, Eigen::Index cols) {
  if (static_cast<std::uint64_t>(rows) * cols * 8 > r.remaining()) r.fail("truncated matrix");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) {
      m(i, j) = r.f64();
      if (!std::isfinite(m(i, j))) r.fail("non-finite parameter");
    }
  return m;
}

void write_mlp(io::Writer& w, const Mlp<double>& mlp) {
  write_matrix(w, mlp.w1);
  write_matrix(w, mlp.b1);
  write_matrix(w, mlp.w2);
  write_matrix(w, mlp.b2);
}

Mlp<double> read_mlp(io::Reader& r, int in, int width, int out) {
  Mlp<double> m;
  m.w1 = read_matrix(r, width, in);
  m.b1 = read_matrix(r, width, 1);
  m.w2 = read_matrix(r, out, width);
  m.b2 = read_matrix(r, out, 1);
  return m;
}

std::uint32_t read_dim(io::Reader& r, const char* what, std::uint32_t max = 1u << 24) {
  const std::uint32_t v = r.u32();
  if (v == 0 || v > max) r.fail(std::string("implausible ") + what + " " + std::to_string(v));
  return v;
}

}  // namespace

DecoderParams make_decoder(const NetSpec& spec, int n_state_layers, int hidden_dim, int width,
                           std::uint64_t seed) {
  if (n_state_layers < 1 || hidden_dim < 1 || width < 1) throw ConfigError("decoder dimensions must be positive");
  const LayerWeights init = init_equal_probability(spec);
  std::mt19937_64 rng(seed);
  DecoderParams p;
  p.spec_hash = spec.hash();
  p.n_state_layers = n_state_layers;
  p.hidden_dim = hidden_dim;
  for (const Eigen::MatrixXd& w : init.layers) {
    LayerDecoder d;
    d.mixing = Eigen::VectorXd::Constant(n_state_layers, 1.0 / n_state_layers);
    d.mlp = Mlp<double>(hidden_dim, width, static_cast<int>(w.size()), rng, /*zero_output=*/true);
    d.init_offset = w;
    p.layers.push_back(std::move(d));
  }
  return p;
}

SwitchParams make_switch(int n_state_layers, int hidden_dim, int width, std::uint64_t seed) {
  if (n_state_layers < 1 || hidden_dim < 1 || width < 1) throw ConfigError("switch dimensions must be positive");
  std::mt19937_64 rng(seed);
  SwitchParams p;
  p.n_state_layers = n_state_layers;
  p.hidden_dim = hidden_dim;
  p.mixing = Eigen::VectorXd::Constant(n_state_layers, 1.0 / n_state_layers);
  p.mlp = Mlp<double>(hidden_dim, width, 1, rng, /*zero_output=*/true);
  return p;
}

LayerWeights decode_weights(const DecoderParams& params, const Eigen::MatrixXd& h, DecoderCache* cache) {
  check_states(params.n_state_layers, params.hidden_dim, h);
  LayerWeights out;
  if (cache != nullptr) cache->layers.assign(params.layers.size(), {});
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    const LayerDecoder& d = params.layers[i];
    const Eigen::VectorXd x = h * d.mixing;
    const Eigen::VectorXd y = d.mlp.forward(x, cache != nullptr ? &cache->layers[i] : nullptr);
    const Eigen::Index rows = d.init_offset.rows(), cols = d.init_offset.cols();
    Eigen::MatrixXd w = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        y.data(), rows, cols);
    w += d.init_offset;
    out.layers.push_back(std::move(w));
  }
  return out;
}

void decoder_backward(const DecoderParams& params, const Eigen::MatrixXd& h, const DecoderCache& cache,
                      const std::vector<Eigen::MatrixXd>& d_logits, DecoderParams& grad) {
  if (d_logits.size() != params.layers.size() || grad.layers.size() != params.layers.size()) {
    throw StructuralError("gradient layer count mismatch");
  }
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    const LayerDecoder& d = params.layers[i];
    const Eigen::MatrixXd& g = d_logits[i];
    if (g.rows() != d.init_offset.rows() || g.cols() != d.init_offset.cols()) {
      throw StructuralError("logit gradient shape mismatch");
    }
    Eigen::VectorXd d_out(g.size());
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(d_out.data(), g.rows(),
                                                                                        g.cols()) = g;
    const Eigen::VectorXd dx = d.mlp.backward(cache.layers[i], d_out, grad.layers[i].mlp);
    grad.layers[i].mixing.noalias() += h.transpose() * dx;
  }
}

double switch_logit(const SwitchParams& params, const Eigen::MatrixXd& h, Mlp<double>::Cache* cache) {
  check_states(params.n_state_layers, params.hidden_dim, h);
  const Eigen::VectorXd x = h * params.mixing;
  return params.mlp.forward(x, cache)(0);
}

double decode_switch(const SwitchParams& params, const Eigen::MatrixXd& h) {
  const double z = switch_logit(params, h);
  const double s = z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
  // Keep the score strictly inside (0, 1) even where the sigmoid rounds.
  return std::clamp(s, std::numeric_limits<double>::min(), 1.0 - std::numeric_limits<double>::epsilon() / 2);
}

void switch_backward(const SwitchParams& params, const Eigen::MatrixXd& h, const Mlp<double>::Cache& cache,
                     double d_logit, SwitchParams& grad) {
  const Eigen::VectorXd dx = params.mlp.backward(cache, Eigen::VectorXd::Constant(1, d_logit), grad.mlp);
  grad.mixing.noalias() += h.transpose() * dx;
}

DecoderParams zeros_like(const DecoderParams& params) {
  DecoderParams z = params;
  for (LayerDecoder& d : z.layers) {
    d.mixing.setZero();
    d.mlp = d.mlp.zeros_like();
  }
  return z;
}

SwitchParams zeros_like(const SwitchParams& params) {
  SwitchParams z = params;
  z.mixing.setZero();
  z.mlp = z.mlp.zeros_like();
  return z;
}

Eigen::VectorXd flatten(const DecoderParams& params) { return flatten_any(params); }
Eigen::VectorXd flatten(const SwitchParams& params) { return flatten_any(params); }
void unflatten(DecoderParams& params, const Eigen::VectorXd& flat) { unflatten_any(params, flat); }
void unflatten(SwitchParams& params, const Eigen::VectorXd& flat) { unflatten_any(params, flat); }

std::string encode_controller(const Controller& c) {
  io::Writer w;
  w.bytes("OCCT");
  w.u32(kVersion);
  int layers = 0, hidden = 0;
  std::uint64_t hash = 0;
  if (c.decoder) {
    layers = c.decoder->n_state_layers;
    hidden = c.decoder->hidden_dim;
    hash = c.decoder->spec_hash;
  } else if (c.switcher) {
    layers = c.switcher->n_state_layers;
    hidden = c.switcher->hidden_dim;
  }
  if (c.decoder && c.switcher &&
      (c.switcher->n_state_layers != layers || c.switcher->hidden_dim != hidden)) {
    throw StructuralError("decoder and switch were built for different hidden states");
  }
  w.u64(hash);
  w.u32(static_cast<std::uint32_t>(layers));
  w.u32(static_cast<std::uint32_t>(hidden));
  w.u8(c.decoder ? 1 : 0);
  if (c.decoder) {
    w.u32(static_cast<std::uint32_t>(c.decoder->layers.size()));
    for (const LayerDecoder& d : c.decoder->layers) {
      w.u32(static_cast<std::uint32_t>(d.mlp.width()));
      w.u32(static_cast<std::uint32_t>(d.init_offset.rows()));
      w.u32(static_cast<std::uint32_t>(d.init_offset.cols()));
      write_matrix(w, d.mixing);
      write_mlp(w, d.mlp);
      write_matrix(w, d.init_offset);
    }
  }
  w.u8(c.switcher ? 1 : 0);
  if (c.switcher) {
    w.u32(static_cast<std::uint32_t>(c.switcher->mlp.width()));
    write_matrix(w, c.switcher->mixing);
    write_mlp(w, c.switcher->mlp);
  }
  return w.data();
}

Controller decode_controller(std::string_view bytes, const std::string& what) {
  io::Reader r(bytes, what);
  r.magic("OCCT");
  const std::uint32_t version = r.u32();
  if (version != kVersion) r.fail("unsupported controller checkpoint version " + std::to_string(version));
  const std::uint64_t hash = r.u64();
  const int layers = static_cast<int>(read_dim(r, "state layer count", 4096));
  const int hidden = static_cast<int>(read_dim(r, "hidden dim"));
  Controller c;
  const std::uint8_t has_decoder = r.u8();
  if (has_decoder > 1) r.fail("bad decoder flag");
  if (has_decoder) {
    DecoderParams p;
    p.spec_hash = hash;
    p.n_state_layers = layers;
    p.hidden_dim = hidden;
    const std::uint32_t n = read_dim(r, "decoder count", 64);
    for (std::uint32_t i = 0; i < n; ++i) {
      const int width = static_cast<int>(read_dim(r, "perceptron width"));
      const int rows = static_cast<int>(read_dim(r, "row count"));
      const int cols = static_cast<int>(read_dim(r, "column count"));
      LayerDecoder d;
      d.mixing = read_matrix(r, layers, 1);
      d.mlp = read_mlp(r, hidden, width, rows * cols);
      d.init_offset = read_matrix(r, rows, cols);
      p.layers.push_back(std::move(d));
    }
    c.decoder = std::move(p);
  }
  const std::uint8_t has_switch = r.u8();
  if (has_switch > 1) r.fail("bad switch flag");
  if (has_switch) {
    SwitchParams s;
    s.n_state_layers = layers;
    s.hidden_dim = hidden;
    const int width = static_cast<int>(read_dim(r, "perceptron width"));
    s.mixing = read_matrix(r, layers, 1);
    s.mlp = read_mlp(r, hidden, width, 1);
    c.switcher = std::move(s);
  }
  if (r.remaining() != 0) r.fail("trailing bytes");
  return c;
}

void save_controller(const std::string& path, const Controller& c) { io::write_file(path, encode_controller(c)); }

Controller load_controller(const std::string& path) { return decode_controller(io::read_file(path), path); }

void check_compatible(const DecoderParams& params, const NetSpec& spec, int n_state_layers, int hidden_dim) {
  if (params.spec_hash != spec.hash()) throw ConfigError("decoder was trained for a different network");
  if (params.layers.size() != static_cast<std::size_t>(spec.n_softmax_layers())) {
    throw ConfigError("decoder has the wrong number of layers for this network");
  }
  if (params.n_state_layers != n_state_layers) {
    throw ConfigError("hidden-state layer count mismatch: provider has " + std::to_string(n_state_layers) +
                      ", decoder expects " + std::to_string(params.n_state_layers));
  }
  if (params.hidden_dim != hidden_dim) {
    throw ConfigError("hidden dim mismatch: provider has " + std::to_string(hidden_dim) + ", decoder expects " +
                      std::to_string(params.hidden_dim));
  }
}

void check_compatible(const SwitchParams& params, int n_state_layers, int hidden_dim) {
  if (params.n_state_layers != n_state_layers || params.hidden_dim != hidden_dim) {
    throw ConfigError("switch was trained for hidden states of another shape (" +
                      std::to_string(params.n_state_layers) + " layers x " + std::to_string(params.hidden_dim) +
                      "), provider gives " + std::to_string(n_state_layers) + " x " + std::to_string(hidden_dim));
  }
}

}  // namespace occamllm
