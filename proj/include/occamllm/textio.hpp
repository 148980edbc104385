// Copyright 2026 The occamllm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace occamllm::textio {

/// A number found in text.
struct NumberSpan {
  double value = 0.0;
  std::size_t begin = 0;  // byte offsets into the source text
  std::size_t end = 0;
  bool is_integer = true;
  int position = 0;  // ordinal among the spans of the same text
  std::string text;  // the source slice, e.g. "-4", "7.60", "six"
};

/// Decimal literals (optional sign, optional fraction, basic exponent form)
/// and word numbers zero..twenty plus the tens, in order of occurrence.
///
/// A '-' counts as a sign only when it touches the digits and does not follow
/// a digit, letter or closing bracket ("6 - 7" and "6-7" are subtractions,
/// "(-7)" and "^-3" are negative literals). Commas, fractions and percents are
/// not joined: "1,637" gives 1 and 637, "3/4" gives 3 and 4.
std::vector<NumberSpan> extract_numbers(std::string_view text);

/// Parses `text` as exactly one number (surrounding whitespace allowed).
std::optional<NumberSpan> parse_number(std::string_view text);

class NoOperandsError : public std::runtime_error {
 public:
  NoOperandsError() : std::runtime_error("no numbers available as operands") {}
};

struct Operands {
  std::vector<double> values;
  bool padded = false;  // fewer numbers than inputs; earliest value repeated
};

/// The `n_inputs` most recent numbers, oldest first. With fewer available,
/// the earliest available value is repeated at the front. Throws
/// NoOperandsError when `spans` is empty.
Operands select_operands(const std::vector<NumberSpan>& spans, int n_inputs);

struct FormatOptions {
  int decimals = 3;
  bool shortest = false;  // shortest round-trip fixed notation instead of `decimals`
  std::string suffix = "\n\n";
};

/// Integers (within 1e-9) without a decimal point, otherwise fixed decimals,
/// followed by the suffix. nullopt in, nullopt out.
std::optional<std::string> format_output(std::optional<double> value,
                                         const FormatOptions& options = {});

/// Decimal places a printed number is held to: 2 for integers, otherwise the
/// number of printed decimals clipped to [2, 5].
int match_decimals(const NumberSpan& printed);

bool matches(const NumberSpan& printed, double truth);
/// False when `printed` is not a single number.
bool matches(std::string_view printed, double truth);

struct Score {
  bool correct = false;
  /// The first matching number, or else the last number in the response.
  std::optional<double> predicted;
};

/// Correct iff any number in the response matches the truth.
Score score_response(std::string_view response, double truth);

}  // namespace occamllm::textio
