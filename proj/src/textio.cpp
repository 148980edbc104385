// Copyright 2026 The occamllm Authors
// SPDX-License-Identifier: Apache-2.0

#include "occamllm/textio.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace occamllm::textio {
namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

constexpr std::array<std::string_view, 21> kUnits{
    "zero",    "one",     "two",       "three",    "four",    "five",    "six",
    "seven",   "eight",   "nine",      "ten",      "eleven",  "twelve",  "thirteen",
    "fourteen", "fifteen", "sixteen",  "seventeen", "eighteen", "nineteen", "twenty"};
constexpr std::array<std::string_view, 7> kTens{"thirty", "forty",  "fifty", "sixty",
                                                "seventy", "eighty", "ninety"};

std::optional<int> word_value(std::string_view word) {
  std::string lower(word);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (std::size_t i = 0; i < kUnits.size(); ++i) {
    if (lower == kUnits[i]) return static_cast<int>(i);
  }
  for (std::size_t i = 0; i < kTens.size(); ++i) {
    if (lower == kTens[i]) return static_cast<int>(30 + 10 * i);
  }
  return std::nullopt;
}

// Length of a decimal literal starting at `i` (digits, optional fraction,
// optional exponent), or 0.
std::size_t literal_length(std::string_view s, std::size_t i, bool* has_point, bool* has_exp) {
  std::size_t j = i;
  while (j < s.size() && is_digit(s[j])) ++j;
  if (j == i) return 0;
  *has_point = false;
  *has_exp = false;
  if (j + 1 < s.size() && s[j] == '.' && is_digit(s[j + 1])) {
    *has_point = true;
    ++j;
    while (j < s.size() && is_digit(s[j])) ++j;
  }
  if (j + 1 < s.size() && (s[j] == 'e' || s[j] == 'E')) {
    std::size_t k = j + 1;
    if (k < s.size() && (s[k] == '+' || s[k] == '-')) ++k;
    const std::size_t digits = k;
    while (k < s.size() && is_digit(s[k])) ++k;
    if (k > digits && (k == s.size() || !is_alpha(s[k]))) {
      *has_exp = true;
      j = k;
    }
  }
  return j - i;
}

bool sign_allowed_after(std::string_view s, std::size_t minus) {
  if (minus == 0) return true;
  const char prev = s[minus - 1];
  return !(is_digit(prev) || is_alpha(prev) || prev == ')' || prev == ']' || prev == '.');
}

}  // namespace

std::vector<NumberSpan> extract_numbers(std::string_view text) {
  std::vector<NumberSpan> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (is_alpha(c)) {
      std::size_t j = i;
      while (j < text.size() && is_alpha(text[j])) ++j;
      const std::string_view word = text.substr(i, j - i);
      if (auto v = word_value(word)) {
        int value = *v;
        std::size_t end = j;
        // "twenty-one" style compounds.
        if (value >= 20 && value % 10 == 0 && j + 1 < text.size() && text[j] == '-' &&
            is_alpha(text[j + 1])) {
          std::size_t k = j + 1;
          while (k < text.size() && is_alpha(text[k])) ++k;
          const auto unit = word_value(text.substr(j + 1, k - j - 1));
          if (unit && *unit >= 1 && *unit <= 9) {
            value += *unit;
            end = k;
          }
        }
        out.push_back({static_cast<double>(value), i, end, true, 0,
                       std::string(text.substr(i, end - i))});
        i = end;
      } else {
        i = j;
      }
      continue;
    }
    std::size_t start = i;
    std::size_t digits = i;
    if (c == '-' && i + 1 < text.size() && is_digit(text[i + 1]) && sign_allowed_after(text, i)) {
      digits = i + 1;
    } else if (!is_digit(c)) {
      ++i;
      continue;
    }
    bool point = false, exp = false;
    const std::size_t len = literal_length(text, digits, &point, &exp);
    const std::size_t end = digits + len;
    const std::string slice(text.substr(start, end - start));
    const double value = std::strtod(slice.c_str(), nullptr);
    if (std::isfinite(value)) {
      out.push_back({value, start, end, !point && !exp, 0, slice});
    }
    i = end;
    // Letters glued to the digits ("5th", "10am") are skipped as one word.
    while (i < text.size() && is_alpha(text[i])) ++i;
  }
  for (std::size_t k = 0; k < out.size(); ++k) out[k].position = static_cast<int>(k);
  return out;
}

std::optional<NumberSpan> parse_number(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return std::nullopt;
  const auto last = text.find_last_not_of(" \t\r\n");
  const std::string_view core = text.substr(first, last - first + 1);
  const auto spans = extract_numbers(core);
  if (spans.size() != 1 || spans[0].begin != 0 || spans[0].end != core.size()) return std::nullopt;
  return spans[0];
}

Operands select_operands(const std::vector<NumberSpan>& spans, int n_inputs) {
  if (spans.empty()) throw NoOperandsError();
  Operands ops;
  const int available = static_cast<int>(spans.size());
  const int take = std::min(available, n_inputs);
  ops.padded = take < n_inputs;
  for (int i = 0; i < n_inputs - take; ++i) ops.values.push_back(spans[available - take].value);
  for (int i = available - take; i < available; ++i) ops.values.push_back(spans[i].value);
  return ops;
}

std::optional<std::string> format_output(std::optional<double> value, const FormatOptions& options) {
  if (!value || !std::isfinite(*value)) return std::nullopt;
  const double v = *value;
  char buf[512];
  const double rounded = std::round(v);
  if (std::abs(v - rounded) < 1e-9) {
    std::snprintf(buf, sizeof buf, "%.0f", rounded == 0.0 ? 0.0 : rounded);
  } else if (options.shortest) {
    const auto res = std::to_chars(buf, buf + sizeof buf - 1, v, std::chars_format::fixed);
    *res.ptr = '\0';
  } else {
    std::snprintf(buf, sizeof buf, "%.*f", options.decimals, v);
  }
  return std::string(buf) + options.suffix;
}

int match_decimals(const NumberSpan& printed) {
  if (printed.is_integer) return 2;
  int decimals = 0;
  int exponent = 0;
  const auto point = printed.text.find('.');
  auto e = printed.text.find_first_of("eE");
  if (point != std::string::npos) {
    const auto stop = e == std::string::npos ? printed.text.size() : e;
    decimals = static_cast<int>(stop - point - 1);
  }
  if (e != std::string::npos) exponent = std::atoi(printed.text.c_str() + e + 1);
  return std::clamp(decimals - exponent, 2, 5);
}

bool matches(const NumberSpan& printed, double truth) {
  const int d = match_decimals(printed);
  return std::abs(printed.value - truth) < std::pow(10.0, -d);
}

bool matches(std::string_view printed, double truth) {
  const auto span = parse_number(printed);
  return span && matches(*span, truth);
}

Score score_response(std::string_view response, double truth) {
  Score s;
  const auto spans = extract_numbers(response);
  for (const NumberSpan& span : spans) {
    if (matches(span, truth)) {
      s.correct = true;
      s.predicted = span.value;
      return s;
    }
  }
  if (!spans.empty()) s.predicted = spans.back().value;
  return s;
}

}  // namespace occamllm::textio
