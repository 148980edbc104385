// Copyright 2026 The occamllm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string_view>

namespace occamllm::calc {

/// Evaluates the arithmetic expression in a prompt such as "3 + 97 * (-4) = "
/// or "cos(1.25 rad) =". Text from the first '=' on is ignored. Supports
/// + - * / x × ÷ · ^ **, parentheses, unary minus, and sqrt/√ log/ln exp sin
/// cos calls, with the usual precedence and right-associative powers.
/// Returns nullopt for unparseable text or an invalid result.
std::optional<double> evaluate_prompt(std::string_view prompt);

}  // namespace occamllm::calc
