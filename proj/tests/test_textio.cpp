// Copyright 2026 The occamllm Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "occamllm/calculator.hpp"
#include "occamllm/textio.hpp"

using namespace occamllm::textio;

namespace {

std::vector<double> values(std::string_view text) {
  std::vector<double> out;
  for (const auto& s : extract_numbers(text)) out.push_back(s.value);
  return out;
}

}  // namespace

TEST_CASE("extract_numbers") {
  CHECK(values("I have 10 oranges and 6 trees with 3 apples") == std::vector<double>{10, 6, 3});
  CHECK(values("Six minus seven =?") == std::vector<double>{6, 7});
  CHECK(values("no numerals here").empty());
  CHECK(values("").empty());
  CHECK(values("7.6 × 9 = 68.4 pages. The answer is 68.") == std::vector<double>{7.6, 9, 68.4, 68});
  CHECK(values("6 - 7 and 6-7 but (-7) and 5^-3") == std::vector<double>{6, 7, 6, 7, -7, 5, -3});
  CHECK(values("-12 + 3") == std::vector<double>{-12, 3});
  CHECK(values("3/4 of 24 is 18, 5% of 1,637") == std::vector<double>{3, 4, 24, 18, 5, 1, 637});
  CHECK(values("twenty-one and forty and Twelve") == std::vector<double>{21, 40, 12});
  CHECK(values("it costs 1e5 or 2.5E-3 eggs") == std::vector<double>{1e5, 2.5e-3});
  CHECK(values("3eggs and 5th place") == std::vector<double>{3, 5});
  CHECK(values("someone gave nothing") == std::vector<double>{});  // "one" inside a word

  const auto spans = extract_numbers("x 2052.720 y 13");
  REQUIRE(spans.size() == 2);
  CHECK(spans[0].text == "2052.720");
  CHECK_FALSE(spans[0].is_integer);
  CHECK(spans[1].is_integer);
  CHECK(spans[1].position == 1);
  CHECK(spans[1].begin == 13);
}

TEST_CASE("extraction is position-stable under inserted words") {
  std::mt19937_64 rng(3);
  const std::vector<std::string> filler{"apples", "the", "so", "=", "and then", "pieces."};
  const std::string base = "Tom had 12 apples, gave 3.5 away and got -4 back, then 7";
  const auto want = values(base);
  for (int trial = 0; trial < 200; ++trial) {
    std::string text = base;
    // Insert at a word boundary (before a space).
    std::vector<std::size_t> spaces;
    for (std::size_t i = 0; i < text.size(); ++i) {
      if (text[i] == ' ') spaces.push_back(i);
    }
    const std::size_t at = spaces[rng() % spaces.size()];
    text.insert(at, " " + filler[rng() % filler.size()]);
    CHECK(values(text) == want);
  }
}

TEST_CASE("select_operands keeps the most recent numbers") {
  const auto spans = extract_numbers("I have 10 oranges and 6 trees with 3 apples");
  auto ops = select_operands(spans, 2);
  CHECK(ops.values == std::vector<double>{6, 3});
  CHECK_FALSE(ops.padded);

  ops = select_operands(extract_numbers("she had 13 and ate 2, so 13 - 2 = "), 2);
  CHECK(ops.values == std::vector<double>{13, 2});

  ops = select_operands(extract_numbers("sqrt(16) = "), 2);
  CHECK(ops.values == std::vector<double>{16, 16});
  CHECK(ops.padded);

  ops = select_operands(extract_numbers("1 + 2 = "), 3);
  CHECK(ops.values == std::vector<double>{1, 1, 2});

  CHECK_THROWS_AS(select_operands({}, 2), NoOperandsError);
}

TEST_CASE("format_output") {
  CHECK(format_output(2052.72) == "2052.720\n\n");
  CHECK(format_output(13.0) == "13\n\n");
  CHECK(format_output(-1.0) == "-1\n\n");
  CHECK(format_output(-1e-12) == "0\n\n");
  CHECK(format_output(std::nullopt) == std::nullopt);
  CHECK(format_output(std::numeric_limits<double>::infinity()) == std::nullopt);
  FormatOptions plain;
  plain.suffix = "";
  CHECK(format_output(1.0 / 3.0, plain) == "0.333");
  plain.shortest = true;
  CHECK(format_output(0.1 + 0.2, plain) == "0.30000000000000004");
  CHECK(format_output(4.5399929762484854e-05, plain) == "0.000045399929762484854");
}

TEST_CASE("format then extract recovers the value to printed precision") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 2000; ++i) {
    const double v = i % 3 == 0 ? std::round(u(rng)) : u(rng);
    const auto text = format_output(v);
    REQUIRE(text);
    const auto spans = extract_numbers("= " + *text);
    REQUIRE(spans.size() == 1);
    CHECK(std::abs(spans[0].value - v) <= 5e-4 + 1e-9);
    CHECK(matches(spans[0], v));
  }
}

TEST_CASE("match rule") {
  CHECK(matches("2401", 2401));
  CHECK(matches("216", 216));
  CHECK(matches("2052.720", 2052.72));
  CHECK(matches("-1", -1));
  CHECK_FALSE(matches("68.4", 68.42));  // d = 2, |diff| = 0.02
  CHECK(matches("68.42", 68.42));
  CHECK(matches("68.4", 68.404));
  CHECK(matches("3.14159", std::numbers::pi));  // d = 5
  CHECK(matches("3.14", std::numbers::pi));  // d = 2, diff 1.6e-3
  CHECK_FALSE(matches("3.16", std::numbers::pi));  // diff 1.8e-2
  CHECK(matches("3.1416", std::numbers::pi));  // d = 4, diff 7.3e-6
  CHECK_FALSE(matches("3.1415926535", 3.14158));  // clipped to d = 5, diff 1.3e-5
  CHECK_FALSE(matches("0", 0.01));  // strict: |diff| == 10^-2 exactly
  CHECK(matches("10", 10.0099));
  CHECK_FALSE(matches("ten apples", 10));
  CHECK_FALSE(matches("", 0));
  CHECK(match_decimals(*parse_number("7")) == 2);
  CHECK(match_decimals(*parse_number("7.1")) == 2);
  CHECK(match_decimals(*parse_number("7.123")) == 3);
  CHECK(match_decimals(*parse_number("7.1234567")) == 5);

  SUBCASE("matching at 5 places implies matching at fewer") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-100, 100), tiny(-2e-5, 2e-5);
    int checked = 0;
    for (int i = 0; i < 1000; ++i) {
      const double truth = u(rng);
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.5f", truth + tiny(rng));
      NumberSpan s = *parse_number(buf);
      if (!matches(s, truth)) continue;
      ++checked;
      const std::string five = s.text;
      for (int d = 2; d < 5; ++d) {
        // Same printed value held to d places; the looser tolerance still holds.
        s.text = five.substr(0, five.find('.') + 1 + d);
        CHECK(matches(s, truth));
      }
    }
    CHECK(checked > 100);
  }
}

TEST_CASE("score_response") {
  CHECK(score_response("63.074. 63.0 + 0.074 = 63.074.", 63.074).correct);
  CHECK_FALSE(score_response("", 5).correct);
  CHECK_FALSE(score_response("", 5).predicted.has_value());
  const auto wrong = score_response("30 - 6 = 25, then 25 x 2 = 50", 48);
  CHECK_FALSE(wrong.correct);
  CHECK(wrong.predicted == 50);
  CHECK(score_response("Six minus seven is equal to -1.", -1).correct);
}

TEST_CASE("calculator") {
  using occamllm::calc::evaluate_prompt;
  CHECK(evaluate_prompt("3 + 97 * (-4) = ") == 3 - 388);
  CHECK(evaluate_prompt("3+97·(−4) =") == 3 - 388);
  CHECK(evaluate_prompt("2 * 7 + 3 / 2") == 15.5);
  CHECK(evaluate_prompt("24 x 85.53 =") == doctest::Approx(2052.72));
  CHECK(evaluate_prompt("7^4=") == 2401);
  CHECK(evaluate_prompt("6**3=") == 216);
  CHECK(evaluate_prompt("2^3^2") == 512);
  CHECK(evaluate_prompt("-2^2") == -4);
  CHECK(evaluate_prompt("cos(1.5 rad) = ") == std::cos(1.5));
  CHECK(evaluate_prompt("sqrt(16) + log(1)") == 4);
  CHECK(evaluate_prompt("√81 =") == 9);
  CHECK(evaluate_prompt("1234567 / (-7654321) = Give the answer in decimals.") ==
        1234567.0 / -7654321.0);
  CHECK_FALSE(evaluate_prompt("1 / 0").has_value());
  CHECK_FALSE(evaluate_prompt("log(-1)").has_value());
  CHECK_FALSE(evaluate_prompt("apples + 2").has_value());
  CHECK_FALSE(evaluate_prompt("(1 + 2").has_value());
}
