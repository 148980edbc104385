// Copyright 2026 The occamllm Authors
// SPDX-License-Identifier: Apache-2.0

#include "occamllm/calculator.hpp"

#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

namespace occamllm::calc {
namespace {

enum class Tok { Num, Plus, Minus, Mul, Div, Pow, LParen, RParen, Func, Sqrt, Rad, End, Bad };

struct Token {
  Tok kind;
  double value = 0.0;
  std::string name;
};

std::vector<Token> lex(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto starts = [&](std::string_view p) { return s.substr(i, p.size()) == p; };
  while (i < s.size()) {
    const char c = s[i];
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      ++i;
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '.' && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
      char* end = nullptr;
      const std::string buf(s.substr(i));
      const double v = std::strtod(buf.c_str(), &end);
      i += static_cast<std::size_t>(end - buf.c_str());
      out.push_back({Tok::Num, v, {}});
    } else if (starts("**")) {
      out.push_back({Tok::Pow});
      i += 2;
    } else if (c == '^') {
      out.push_back({Tok::Pow});
      ++i;
    } else if (c == '+') {
      out.push_back({Tok::Plus});
      ++i;
    } else if (c == '-') {
      out.push_back({Tok::Minus});
      ++i;
    } else if (starts("\xE2\x88\x92")) {  // U+2212 minus sign
      out.push_back({Tok::Minus});
      i += 3;
    } else if (c == '*') {
      out.push_back({Tok::Mul});
      ++i;
    } else if (starts("\xC3\x97") || starts("\xC2\xB7")) {  // × ·
      out.push_back({Tok::Mul});
      i += 2;
    } else if (c == '/') {
      out.push_back({Tok::Div});
      ++i;
    } else if (starts("\xC3\xB7")) {  // ÷
      out.push_back({Tok::Div});
      i += 2;
    } else if (starts("\xE2\x88\x9A")) {  // √
      out.push_back({Tok::Sqrt});
      i += 3;
    } else if (c == '(') {
      out.push_back({Tok::LParen});
      ++i;
    } else if (c == ')') {
      out.push_back({Tok::RParen});
      ++i;
    } else if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < s.size() && std::isalpha(static_cast<unsigned char>(s[j]))) ++j;
      const std::string word(s.substr(i, j - i));
      i = j;
      if (word == "x") {
        out.push_back({Tok::Mul});
      } else if (word == "rad") {
        out.push_back({Tok::Rad});
      } else if (word == "sqrt" || word == "log" || word == "ln" || word == "exp" || word == "sin" ||
                 word == "cos") {
        out.push_back({Tok::Func, 0.0, word});
      } else {
        out.push_back({Tok::Bad});
      }
    } else {
      out.push_back({Tok::Bad});
      ++i;
    }
  }
  out.push_back({Tok::End});
  return out;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  std::optional<double> run() {
    const double v = expr();
    if (!ok_ || peek() != Tok::End || !std::isfinite(v)) return std::nullopt;
    return v;
  }

 private:
  Tok peek() const { return toks_[pos_].kind; }
  Token take() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  double fail() {
    ok_ = false;
    return 0.0;
  }

  double expr() {
    double v = term();
    while (ok_ && (peek() == Tok::Plus || peek() == Tok::Minus)) {
      const Tok op = take().kind;
      const double rhs = term();
      v = op == Tok::Plus ? v + rhs : v - rhs;
    }
    return v;
  }

  double term() {
    double v = unary();
    while (ok_ && (peek() == Tok::Mul || peek() == Tok::Div)) {
      const Tok op = take().kind;
      const double rhs = unary();
      if (op == Tok::Div && rhs == 0.0) return fail();
      v = op == Tok::Mul ? v * rhs : v / rhs;
    }
    return v;
  }

  double unary() {
    if (peek() == Tok::Minus) {
      take();
      return -unary();
    }
    if (peek() == Tok::Plus) {
      take();
      return unary();
    }
    return power();
  }

  double power() {
    const double base = primary();
    if (ok_ && peek() == Tok::Pow) {
      take();
      const double e = unary();
      if (base < 0.0 && std::abs(e - std::round(e)) >= 1e-9) return fail();
      if (base == 0.0 && e <= 0.0) return fail();
      return base < 0.0 ? std::pow(base, std::round(e)) : std::pow(base, e);
    }
    return base;
  }

  double primary() {
    const Token t = take();
    switch (t.kind) {
      case Tok::Num:
        return t.value;
      case Tok::LParen: {
        const double v = expr();
        if (take().kind != Tok::RParen) return fail();
        return v;
      }
      case Tok::Sqrt: {
        const double v = primary();
        if (v < 0.0) return fail();
        return std::sqrt(v);
      }
      case Tok::Func: {
        if (take().kind != Tok::LParen) return fail();
        const double v = expr();
        if (peek() == Tok::Rad) take();
        if (take().kind != Tok::RParen) return fail();
        if (t.name == "sqrt") return v < 0.0 ? fail() : std::sqrt(v);
        if (t.name == "log" || t.name == "ln") return v <= 0.0 ? fail() : std::log(v);
        if (t.name == "exp") return std::exp(v);
        if (t.name == "sin") return std::sin(v);
        return std::cos(v);
      }
      default:
        return fail();
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  bool ok_ = true;
};

}  // namespace

std::optional<double> evaluate_prompt(std::string_view prompt) {
  const auto eq = prompt.find('=');
  return Parser(lex(prompt.substr(0, eq))).run();
}

}  // namespace occamllm::calc
