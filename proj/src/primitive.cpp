// Copyright 2026 The occamllm Authors
// SPDX-License-Identifier: Apache-2.0

#include "occamllm/primitive.hpp"

#include <cmath>

#include "occamllm/errors.hpp"

namespace occamllm {

std::optional<double> Primitive::apply(std::span<const double> args) const {
  for (double a : args) {
    if (!std::isfinite(a)) return std::nullopt;
  }
  if (guard != nullptr && !guard(args)) return std::nullopt;
  const double v = eval(args);
  if (!std::isfinite(v)) return std::nullopt;
  return v;
}

bool power_domain(double base, double exponent) {
  if (base > 0.0) return true;
  if (base == 0.0) return exponent > 0.0;
  return std::abs(exponent - std::round(exponent)) < 1e-9;
}

namespace primitives {

Primitive add() {
  return {"+", 2, [](std::span<const double> a) { return a[0] + a[1]; }, nullptr, true};
}

Primitive sub() {
  return {"-", 2, [](std::span<const double> a) { return a[0] - a[1]; }, nullptr, false};
}

Primitive mul() {
  return {"*", 2, [](std::span<const double> a) { return a[0] * a[1]; }, nullptr, true};
}

Primitive div() {
  return {"/", 2, [](std::span<const double> a) { return a[0] / a[1]; },
          [](std::span<const double> a) { return a[1] != 0.0; }, false};
}

Primitive sqrt() {
  return {"sqrt", 1, [](std::span<const double> a) { return std::sqrt(a[0]); },
          [](std::span<const double> a) { return a[0] >= 0.0; }, false};
}

Primitive power() {
  return {"pow", 2,
          [](std::span<const double> a) {
            // Integer-valued exponents on negative bases are rounded so pow()
            // does not see 2.9999999999 and return NaN.
            if (a[0] < 0.0) return std::pow(a[0], std::round(a[1]));
            return std::pow(a[0], a[1]);
          },
          [](std::span<const double> a) { return power_domain(a[0], a[1]); }, false};
}

Primitive log() {
  return {"log", 1, [](std::span<const double> a) { return std::log(a[0]); },
          [](std::span<const double> a) { return a[0] > 0.0; }, false};
}

Primitive exp() {
  return {"exp", 1, [](std::span<const double> a) { return std::exp(a[0]); }, nullptr, false};
}

Primitive sin() {
  return {"sin", 1, [](std::span<const double> a) { return std::sin(a[0]); }, nullptr, false};
}

Primitive cos() {
  return {"cos", 1, [](std::span<const double> a) { return std::cos(a[0]); }, nullptr, false};
}

std::vector<Primitive> calculator_set() {
  return {add(), sub(), mul(), div(), sqrt(), power(), log(), exp(), sin(), cos()};
}

std::vector<Primitive> basic_arithmetic() { return {add(), sub(), mul(), div()}; }

Primitive by_name(std::string_view name) {
  for (const Primitive& p : calculator_set()) {
    if (p.name == name) return p;
  }
  throw ConfigError("unknown primitive '" + std::string(name) + "'");
}

}  // namespace primitives
}  // namespace occamllm
