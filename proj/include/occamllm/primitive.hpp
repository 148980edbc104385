// Copyright 2026 The occamllm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace occamllm {

/// A base operation placed in an OccamNet activation layer.
///
/// `eval` is only called on arguments accepted by `guard`; `apply` enforces
/// this and also rejects non-finite results, so callers see `std::nullopt`
/// instead of NaN or infinity.
struct Primitive {
  using EvalFn = double (*)(std::span<const double>);
  using GuardFn = bool (*)(std::span<const double>);

  std::string name;
  int arity = 1;
  EvalFn eval = nullptr;
  GuardFn guard = nullptr;  // nullptr: every argument tuple is valid
  bool commutative = false;

  std::optional<double> apply(std::span<const double> args) const;

  friend bool operator==(const Primitive& a, const Primitive& b) {
    return a.name == b.name && a.arity == b.arity;
  }
};

namespace primitives {

Primitive add();
Primitive sub();
Primitive mul();
Primitive div();
Primitive sqrt();
Primitive power();
Primitive log();
Primitive exp();
Primitive sin();
Primitive cos();

/// The ten arithmetic primitives used by the single-layer calculator net, in
/// a fixed order: + - * / sqrt pow log exp sin cos.
std::vector<Primitive> calculator_set();

/// {+, -, *, /}, used by the two-layer multistep net.
std::vector<Primitive> basic_arithmetic();

/// Resolves a primitive by its registered name ("+", "sqrt", ...).
/// Throws ConfigError for unknown names.
Primitive by_name(std::string_view name);

}  // namespace primitives

/// Valid iff the result of base^exponent is real: base > 0, or base == 0 with
/// exponent > 0, or base < 0 with an integer-valued exponent.
bool power_domain(double base, double exponent);

}  // namespace occamllm
