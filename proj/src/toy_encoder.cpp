// Copyright 2026 The occamllm Authors
// SPDX-License-Identifier: Apache-2.0

#include "occamllm/toy_encoder.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <unordered_map>

#include "occamllm/errors.hpp"

namespace occamllm {
namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_space(char c) { return c == ' ' || c == '\t'; }
bool is_newline(char c) { return c == '\n' || c == '\r'; }

std::size_t utf8_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;
}

// ---- feature layout -------------------------------------------------------

constexpr int kBuckets = 64;
constexpr int kCues = 21;
constexpr int kKinds = 7;  // TokenKind values plus "sign"
constexpr int kOpClasses = 10;
constexpr int kSlots = 3;

constexpr int kTokenBlock = kBuckets + kKinds + kCues;
constexpr int kClauseBlock = kSlots * kOpClasses * 2 + 5 + kCues + 1;
constexpr double kReversedWeight = 4.0;
constexpr int kTurnBlock = 7 + 5 + kCues + kBuckets;
constexpr int kDecayBlock = kBuckets + kCues;
constexpr int kRoleBlock = 4 + 4 + 1;

constexpr int kTokenOff = 0;                             // current + 3 previous
constexpr int kClauseOff = kTokenOff + 4 * kTokenBlock;  // current, last, previous numeric
constexpr int kTurnOff = kClauseOff + 3 * kClauseBlock;
constexpr int kDecayOff = kTurnOff + kTurnBlock;
constexpr int kRoleOff = kDecayOff + kDecayBlock;
constexpr int kFeatureCount = kRoleOff + kRoleBlock;

// Cue classes 0..9 are operators, in calculator order.
enum Cue {
  kAdd, kSub, kMul, kDiv, kSqrt, kPow, kLog, kExp, kSin, kCos,
  kEq, kPercent, kOf, kOpen, kClose, kQuestion, kAnswer, kDecimal, kRate, kRound, kFrom
};

const std::unordered_map<std::string, int>& cue_table() {
  static const std::unordered_map<std::string, int> table = [] {
    std::unordered_map<std::string, int> t;
    auto add = [&t](int cue, std::initializer_list<const char*> words) {
      for (const char* w : words) t.emplace(w, cue);
    };
    add(kAdd, {"+", "plus", "sum", "add", "adds", "added", "more", "total", "altogether", "together",
               "combined", "gets", "got", "buys", "bought", "finds", "found", "receives", "received",
               "gains", "gained", "joined", "another", "additional", "increase", "increased"});
    add(kSub, {"-", "\xE2\x88\x92", "minus", "difference", "left", "remain", "remaining", "remains",
               "gives", "gave", "ate", "eats", "loses", "lost", "spent", "spends", "fewer", "less",
               "away", "sold", "sells", "broke", "broken", "used", "subtract", "subtracted",
               "decrease", "decreased"});
    add(kMul, {"*", "\xC3\x97", "\xC2\xB7", "x", "times", "product", "each", "multiplied",
               "multiply", "rows", "groups"});
    add(kDiv, {"/", "\xC3\xB7", "divided", "divide", "split", "share", "shared", "equally", "among",
               "ratio", "quotient", "evenly", "average"});
    add(kSqrt, {"sqrt", "\xE2\x88\x9A", "root"});
    add(kPow, {"^", "**", "power", "raised", "exponent"});
    add(kLog, {"log", "ln", "logarithm"});
    add(kExp, {"exp", "exponential"});
    add(kSin, {"sin", "sine"});
    add(kCos, {"cos", "cosine"});
    add(kEq, {"=", "equals"});
    add(kPercent, {"%", "percent"});
    add(kOf, {"of"});
    add(kOpen, {"("});
    add(kClose, {")"});
    add(kQuestion, {"?", "how", "what"});
    add(kAnswer, {"answer"});
    add(kDecimal, {"decimal", "decimals"});
    add(kRate, {"per"});
    add(kRound, {"round", "rounded", "about", "approximately", "nearest"});
    add(kFrom, {"from"});  // "subtract 4 from 12" reverses operand order
    return t;
  }();
  return table;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

int bucket(const Token& t) {
  const std::string id = t.kind == TokenKind::Number ? std::string("<num>") : lower(t.core);
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : id) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return static_cast<int>(h % kBuckets);
}

bool is_boundary(const Token& t) {
  if (t.kind == TokenKind::Special || t.kind == TokenKind::Newline) return true;
  return t.core == "=" || t.core == "?" || t.core == "!" || t.core == "." || t.core == ";" ||
         t.core == ":";
}

bool is_operator_symbol(const std::string& core) {
  static const std::array<std::string_view, 13> ops{
      "(", "=", "+", "-", "\xE2\x88\x92", "*", "\xC3\x97", "\xC2\xB7", "/", "\xC3\xB7", "^", "**", ","};
  return std::find(ops.begin(), ops.end(), core) != ops.end();
}

struct Clause {
  std::array<int, kSlots> slots{-1, -1, -1};  // op class + 10 * depth
  int n_ops = 0;
  int numbers = 0;
  int depth = 0;
  std::array<int, kCues> cues{};
  bool reversed = false;  // "from" after a subtraction cue: "take 4 away from 12"
};

void emit_clause(const Clause& c, int offset, SparseFeatures& out) {
  for (int s = 0; s < kSlots; ++s) {
    if (c.slots[s] >= 0) out.emplace_back(offset + s * kOpClasses * 2 + c.slots[s], 1.0);
  }
  out.emplace_back(offset + kSlots * kOpClasses * 2 + std::min(c.numbers, 4), 1.0);
  for (int k = 0; k < kCues; ++k) {
    if (c.cues[k] > 0) {
      out.emplace_back(offset + kSlots * kOpClasses * 2 + 5 + k, std::min(c.cues[k], 3) / 3.0);
    }
  }
  // Rare but decisive for operand order, so it is emitted loud enough to stand
  // out of the projection next to the ~90 other active features.
  if (c.reversed) out.emplace_back(offset + kSlots * kOpClasses * 2 + 5 + kCues, kReversedWeight);
}

struct TokenInfo {
  int bucket = 0;
  int kind = 0;
  int cue = -1;
};

void emit_token(const TokenInfo& t, int offset, SparseFeatures& out) {
  out.emplace_back(offset + t.bucket, 1.0);
  out.emplace_back(offset + kBuckets + t.kind, 1.0);
  if (t.cue >= 0) out.emplace_back(offset + kBuckets + kKinds + t.cue, 1.0);
}

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto push = [&](std::size_t begin, std::size_t core_end, TokenKind kind) {
    std::size_t end = core_end;
    while (end < text.size() && is_space(text[end])) ++end;
    out.push_back({std::string(text.substr(begin, end - begin)),
                   std::string(text.substr(begin, core_end - begin)), begin, end, kind});
    i = end;
  };
  if (!text.empty() && is_space(text[0])) {
    std::size_t j = 0;
    while (j < text.size() && is_space(text[j])) ++j;
    out.push_back({std::string(text.substr(0, j)), std::string(text.substr(0, j)), 0, j, TokenKind::Space});
    i = j;
  }
  while (i < text.size()) {
    const char c = text[i];
    std::size_t j = i;
    if (text.substr(i, 2) == "<|") {
      const auto close = text.find("|>", i + 2);
      if (close != std::string_view::npos) {
        push(i, close + 2, TokenKind::Special);
        continue;
      }
    }
    if (is_digit(c)) {
      while (j < text.size() && is_digit(text[j])) ++j;
      if (j + 1 < text.size() && text[j] == '.' && is_digit(text[j + 1])) {
        ++j;
        while (j < text.size() && is_digit(text[j])) ++j;
      }
      push(i, j, TokenKind::Number);
    } else if (is_alpha(c)) {
      while (j < text.size() && is_alpha(text[j])) ++j;
      push(i, j, TokenKind::Word);
    } else if (is_newline(c)) {
      while (j < text.size() && is_newline(text[j])) ++j;
      push(i, j, TokenKind::Newline);
    } else if (text.substr(i, 2) == "**") {
      push(i, i + 2, TokenKind::Symbol);
    } else {
      push(i, std::min(text.size(), i + utf8_length(static_cast<unsigned char>(c))), TokenKind::Symbol);
    }
  }
  return out;
}

int ToyEncoder::feature_count() { return kFeatureCount; }

std::pair<int, int> ToyEncoder::clause_feature_range() { return {kClauseOff, kTurnOff}; }

std::vector<SparseFeatures> ToyEncoder::features(const std::vector<Token>& tokens) {
  std::vector<SparseFeatures> out;
  out.reserve(tokens.size());
  const auto& table = cue_table();

  std::array<TokenInfo, 3> history{};
  int history_len = 0;
  Clause current, last_numeric, prev_numeric;
  int turn_numbers = 0, turn_eq = 0;
  std::array<int, kCues> turn_cues{};
  std::array<bool, kBuckets> turn_bag{};
  std::array<double, kBuckets> decay_bag{};
  std::array<double, kCues> decay_cues{};
  int role = 0;
  int since_boundary = 0;
  const Token* prev_token = nullptr;

  for (const Token& tok : tokens) {
    TokenInfo info;
    info.bucket = bucket(tok);
    info.kind = static_cast<int>(tok.kind);
    const bool dash = tok.core == "-" || tok.core == "\xE2\x88\x92";
    const bool sign = dash && (prev_token == nullptr || prev_token->kind == TokenKind::Special ||
                               prev_token->kind == TokenKind::Newline ||
                               prev_token->kind == TokenKind::Space || is_operator_symbol(prev_token->core) ||
                               (prev_token->kind == TokenKind::Word && tok.text == tok.core));
    if (sign) {
      info.kind = 6;
    } else if (tok.kind != TokenKind::Number) {
      const auto it = table.find(lower(tok.core));
      if (it != table.end()) info.cue = it->second;
    }

    if (tok.kind == TokenKind::Special) {
      const std::string tag = lower(tok.core);
      role = tag.find("user") != std::string::npos        ? 1
             : tag.find("assistant") != std::string::npos ? 2
                                                          : 3;
      turn_numbers = turn_eq = 0;
      turn_cues.fill(0);
      turn_bag.fill(false);
    }

    if (is_boundary(tok)) {
      if (current.numbers > 0) {
        prev_numeric = last_numeric;
        last_numeric = current;
      }
      current = Clause{};
      since_boundary = 0;
    } else {
      ++since_boundary;
      if (tok.kind == TokenKind::Number) ++current.numbers;
      if (info.cue >= 0) {
        ++current.cues[info.cue];
        if (info.cue == kFrom && current.cues[kSub] > 0) current.reversed = true;
        if (info.cue < kOpClasses && current.n_ops < kSlots) {
          current.slots[current.n_ops++] = info.cue + kOpClasses * std::min(current.depth, 1);
        }
      }
      if (tok.core == "(") ++current.depth;
      if (tok.core == ")" && current.depth > 0) --current.depth;
    }

    if (tok.kind == TokenKind::Number) ++turn_numbers;
    if (tok.core == "=") ++turn_eq;
    if (info.cue >= 0) ++turn_cues[info.cue];
    if (tok.kind != TokenKind::Space && tok.kind != TokenKind::Special) turn_bag[info.bucket] = true;
    for (double& v : decay_bag) v *= 0.8;
    for (double& v : decay_cues) v *= 0.8;
    decay_bag[info.bucket] += 1.0;
    if (info.cue >= 0) decay_cues[info.cue] += 1.0;

    SparseFeatures f;
    f.reserve(96);
    emit_token(info, kTokenOff, f);
    for (int k = 0; k < history_len; ++k) emit_token(history[k], kTokenOff + (k + 1) * kTokenBlock, f);
    emit_clause(current, kClauseOff, f);
    emit_clause(last_numeric, kClauseOff + kClauseBlock, f);
    emit_clause(prev_numeric, kClauseOff + 2 * kClauseBlock, f);
    f.emplace_back(kTurnOff + std::min(turn_numbers, 6), 1.0);
    f.emplace_back(kTurnOff + 7 + std::min(turn_eq, 4), 1.0);
    for (int k = 0; k < kCues; ++k) {
      if (turn_cues[k] > 0) f.emplace_back(kTurnOff + 12 + k, std::min(turn_cues[k], 3) / 3.0);
    }
    for (int b = 0; b < kBuckets; ++b) {
      if (turn_bag[b]) f.emplace_back(kTurnOff + 12 + kCues + b, 1.0);
    }
    for (int b = 0; b < kBuckets; ++b) {
      if (decay_bag[b] > 1e-3) f.emplace_back(kDecayOff + b, std::min(decay_bag[b], 3.0) / 3.0);
    }
    for (int k = 0; k < kCues; ++k) {
      if (decay_cues[k] > 1e-3) f.emplace_back(kDecayOff + kBuckets + k, std::min(decay_cues[k], 3.0) / 3.0);
    }
    f.emplace_back(kRoleOff + role, 1.0);
    f.emplace_back(kRoleOff + 4 + std::min(since_boundary, 3), 1.0);
    f.emplace_back(kRoleOff + 8, 1.0);
    out.push_back(std::move(f));

    for (int k = std::min(history_len, 2); k > 0; --k) history[k] = history[k - 1];
    history[0] = info;
    history_len = std::min(history_len + 1, 3);
    prev_token = &tok;
  }
  return out;
}

ToyEncoder::ToyEncoder(const ToyEncoderConfig& config) : config_(config) {
  if (config.n_layers < 1 || config.hidden_dim < 1) {
    throw ConfigError("toy encoder needs at least one layer and one hidden unit");
  }
  if (config.version != 1) throw ConfigError("unknown toy encoder feature version " + std::to_string(config.version));
  const double scale = 1.0 / std::sqrt(24.0);
  for (int j = 0; j < config.n_layers; ++j) {
    std::mt19937_64 rng(config.seed * 1000003ULL + static_cast<std::uint64_t>(j));
    std::normal_distribution<double> normal(0.0, scale);
    Eigen::MatrixXd p(config.hidden_dim, kFeatureCount);
    for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = normal(rng);
    projections_.push_back(std::move(p));
  }
}

Eigen::MatrixXd ToyEncoder::project(const SparseFeatures& f) const {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(config_.hidden_dim, config_.n_layers);
  for (int j = 0; j < config_.n_layers; ++j) {
    for (const auto& [index, value] : f) h.col(j).noalias() += value * projections_[j].col(index);
    if (j > 0) h.col(j) = h.col(j).array().tanh().matrix();
  }
  return h;
}

HiddenStates ToyEncoder::encode(std::string_view text) const {
  const std::vector<Token> tokens = tokenize(text);
  const std::vector<SparseFeatures> feats = features(tokens);
  HiddenStates out;
  out.n_layers = config_.n_layers;
  out.hidden_dim = config_.hidden_dim;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    out.tokens.push_back(project(feats[t]));
    out.token_text.push_back(tokens[t].text);
  }
  return out;
}

Eigen::MatrixXd ToyEncoder::encode_last(std::string_view text) const {
  const std::vector<Token> tokens = tokenize(text);
  if (tokens.empty()) throw StructuralError("cannot encode empty text");
  return project(features(tokens).back());
}

}  // namespace occamllm
