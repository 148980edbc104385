// Copyright 2026 The occamllm Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <cstring>
#include <filesystem>
#include <random>

#include <doctest.h>

#include "occamllm/controller.hpp"
#include "occamllm/errors.hpp"
#include "occamllm/hidden_states.hpp"
#include "occamllm/toy_encoder.hpp"

using namespace occamllm;

namespace {

Eigen::MatrixXd random_states(int dim, int layers, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd h(dim, layers);
  for (Eigen::Index i = 0; i < h.size(); ++i) h.data()[i] = n(rng);
  return h;
}

void randomize(DecoderParams& p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 0.3);
  Eigen::VectorXd flat = flatten(p);
  for (Eigen::Index i = 0; i < flat.size(); ++i) flat(i) = n(rng);
  unflatten(p, flat);
}

NetSpec calculator_net() { return build_complete(primitives::calculator_set(), 2, 1); }

}  // namespace

TEST_CASE("untrained decoder reproduces the equal-probability weights exactly") {
  for (const NetSpec& spec : {calculator_net(), build_complete(primitives::basic_arithmetic(), 3, 2)}) {
    const DecoderParams p = make_decoder(spec, 4, 32, 16, 3);
    CHECK(p.layers.size() == static_cast<std::size_t>(spec.n_softmax_layers()));
    const LayerWeights init = init_equal_probability(spec);
    for (std::uint64_t s = 0; s < 5; ++s) {
      const LayerWeights w = decode_weights(p, random_states(32, 4, s));
      for (std::size_t l = 0; l < init.layers.size(); ++l) CHECK((w.layers[l].array() == init.layers[l].array()).all());
    }
  }
}

TEST_CASE("decoded weights are finite and shaped like the network") {
  const NetSpec spec = calculator_net();
  DecoderParams p = make_decoder(spec, 3, 20, 8, 1);
  randomize(p, 9);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const LayerWeights w = decode_weights(p, random_states(20, 3, s));
    CHECK_NOTHROW(check_shapes(spec, w));
  }
  CHECK_THROWS_AS(decode_weights(p, random_states(21, 3, 0)), StructuralError);
  CHECK_THROWS_AS(decode_weights(p, random_states(20, 2, 0)), StructuralError);
}

TEST_CASE("switch saturates with its final bias and stays inside (0, 1)") {
  SwitchParams s = make_switch(2, 10, 4, 5);
  const Eigen::MatrixXd h = random_states(10, 2, 1);
  CHECK(decode_switch(s, h) == doctest::Approx(0.5).epsilon(1e-15));
  s.mlp.b2(0) = -20;
  CHECK(decode_switch(s, h) < 1e-8);
  s.mlp.b2(0) = 20;
  CHECK(decode_switch(s, h) > 1 - 1e-8);
  for (double b : {-1e4, 1e4}) {
    s.mlp.b2(0) = b;
    const double v = decode_switch(s, h);
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }
  CHECK_THROWS_AS(decode_switch(s, random_states(10, 3, 0)), StructuralError);
}

TEST_CASE("flatten and unflatten are inverse") {
  DecoderParams p = make_decoder(calculator_net(), 2, 6, 5, 2);
  randomize(p, 4);
  const Eigen::VectorXd f = flatten(p);
  DecoderParams q = zeros_like(p);
  CHECK(flatten(q).isZero());
  unflatten(q, f);
  CHECK(flatten(q) == f);
  CHECK_THROWS_AS(unflatten(q, Eigen::VectorXd::Zero(f.size() + 1)), StructuralError);
}

TEST_CASE("toy tokenizer") {
  const std::string text = "  <|user|>\nWhat is 3.5 +  85?\n\n<|assistant|> 13-2 = ";
  const auto toks = tokenize(text);
  std::string joined;
  for (const Token& t : toks) joined += t.text;
  CHECK(joined == text);
  CHECK(toks[0].kind == TokenKind::Space);
  CHECK(toks[1].core == "<|user|>");
  CHECK(toks[1].kind == TokenKind::Special);
  CHECK(toks[2].kind == TokenKind::Newline);
  CHECK(toks[5].core == "3.5");
  CHECK(toks[5].text == "3.5 ");
  CHECK(toks[6].text == "+  ");
  CHECK(toks.back().text == "= ");
  CHECK(tokenize("2**3")[1].core == "**");
  CHECK(tokenize("24 \xC3\x97 3")[1].core == "\xC3\x97");
}

TEST_CASE("toy encoder is deterministic, causal and sees operators") {
  ToyEncoderConfig cfg;
  cfg.hidden_dim = 64;
  const ToyEncoder enc(cfg), again(cfg);
  const HiddenStates a = enc.encode("Tom has 3 apples and gets 5 more. 3 + 5 = ");
  const HiddenStates b = again.encode("Tom has 3 apples and gets 5 more. 3 + 5 = ");
  REQUIRE(a.size() == b.size());
  for (std::size_t t = 0; t < a.size(); ++t) CHECK((a.tokens[t].array() == b.tokens[t].array()).all());

  CHECK((enc.encode_last("3 + 5").array() != enc.encode_last("3 - 5").array()).any());
  CHECK((enc.encode_last("3 + 5 = ").array() != enc.encode_last("3 * 5 = ").array()).any());
  // After "=" the summary of the finished clause still distinguishes them.
  CHECK((enc.encode_last("7 + 2 = ").array() != enc.encode_last("7 / 2 = ").array()).any());

  const HiddenStates prefix = enc.encode("3 + 5 = ");
  const HiddenStates longer = enc.encode("3 + 5 = 8\n\n");
  for (std::size_t t = 0; t < prefix.size(); ++t) CHECK((prefix.tokens[t].array() == longer.tokens[t].array()).all());
  CHECK((enc.encode_last("3 + 5 = ").array() == prefix.tokens.back().array()).all());
  CHECK(a.tokens[0].allFinite());
  CHECK(a.n_layers == 4);
  CHECK(a.tokens[0].rows() == 64);
}

TEST_CASE("toy encoder treats a dash after an operator as a sign") {
  const auto f_sign = ToyEncoder::features(tokenize("3 * -4 = "));
  const auto f_sub = ToyEncoder::features(tokenize("3 - 4 = "));
  const auto f_mul = ToyEncoder::features(tokenize("3 * 4 = "));
  // The sign does not add an operator: "3 * -4 = " summarizes like "3 * 4 = "
  // in everything but token identities.
  const auto [lo, hi] = ToyEncoder::clause_feature_range();
  auto clause_part = [lo, hi](const SparseFeatures& f) {
    SparseFeatures out;
    for (const auto& e : f)
      if (e.first >= lo && e.first < hi) out.push_back(e);
    return out;
  };
  CHECK(clause_part(f_sign.back()) == clause_part(f_mul.back()));
  CHECK(clause_part(f_sub.back()) != clause_part(f_mul.back()));
  // After an operator word, a dash touching its digits is a sign too.
  CHECK(clause_part(ToyEncoder::features(tokenize("3 times -4 = ")).back()) ==
        clause_part(ToyEncoder::features(tokenize("3 times 4 = ")).back()));
}

TEST_CASE("hidden-state files round-trip bit for bit") {
  HiddenStateFile f;
  f.n_tokens = 3;
  f.n_layers = 2;
  f.hidden_dim = 5;
  std::mt19937 rng(1);
  std::normal_distribution<float> n;
  for (int i = 0; i < 30; ++i) f.data.push_back(n(rng));
  f.data[7] = -0.0f;
  f.data[8] = 1e-40f;  // subnormal
  f.metadata_json = R"({"tokenizer":"toy","prompt_hash":"abc","tokens":["a","b","c"]})";
  const std::string bytes = encode_hidden_states(f);
  const HiddenStateFile g = decode_hidden_states(bytes);
  REQUIRE(g.data.size() == f.data.size());
  CHECK(std::memcmp(g.data.data(), f.data.data(), f.data.size() * sizeof(float)) == 0);
  CHECK(g.metadata_json == f.metadata_json);
  CHECK(encode_hidden_states(g) == bytes);

  const HiddenStates s = g.widen();
  CHECK(s.size() == 3);
  CHECK(s.token_text[2] == "c");
  CHECK(s.tokens[1](3, 1) == static_cast<double>(f.data[1 * 10 + 1 * 5 + 3]));

  SUBCASE("truncation is a format error with an offset") {
    for (std::size_t cut : {std::size_t{2}, std::size_t{10}, std::size_t{60}, bytes.size() - 1}) {
      try {
        decode_hidden_states(bytes.substr(0, cut));
        FAIL("accepted a truncated file");
      } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("offset") != std::string::npos);
      }
    }
  }
  SUBCASE("bad magic, version, metadata") {
    std::string bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_AS(decode_hidden_states(bad), FormatError);
    bad = bytes;
    bad[4] = 9;
    CHECK_THROWS_AS(decode_hidden_states(bad), FormatError);
    CHECK_THROWS_AS(decode_hidden_states(bytes + "x"), FormatError);
    HiddenStateFile h = f;
    h.metadata_json = "{not json";
    CHECK_THROWS_AS(decode_hidden_states(encode_hidden_states(h)), FormatError);
  }
}

TEST_CASE("file provider serves states by prompt hash") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "occamllm_test_provider";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const ToyEncoder enc(ToyEncoderConfig{7, 2, 8, 1});
  for (const std::string prompt : {"6 + 7 = ", "13 - 2 = "}) {
    const HiddenStates hs = enc.encode(prompt);
    HiddenStateFile f;
    f.n_tokens = static_cast<std::uint32_t>(hs.size());
    f.n_layers = 2;
    f.hidden_dim = 8;
    for (const auto& m : hs.tokens)
      for (int j = 0; j < 2; ++j)
        for (int d = 0; d < 8; ++d) f.data.push_back(static_cast<float>(m(d, j)));
    f.metadata_json = R"({"tokenizer":"toy","prompt_hash":")" + prompt_hash(prompt) + "\"}";
    save_hidden_states((dir / (prompt_hash(prompt) + ".ochs")).string(), f);
  }
  const FileProvider fp(dir.string());
  CHECK(fp.file_count() == 2);
  CHECK(fp.n_layers() == 2);
  const HiddenStates got = fp.encode("13 - 2 = ");
  const HiddenStates ref = enc.encode("13 - 2 = ");
  REQUIRE(got.size() == ref.size());
  CHECK((got.tokens.back() - ref.tokens.back()).cwiseAbs().maxCoeff() < 1e-6);
  CHECK_THROWS_AS(fp.encode("unknown"), ConfigError);
  fs::remove_all(dir);
}

TEST_CASE("controller checkpoint round-trips and rejects corruption") {
  const NetSpec spec = calculator_net();
  Controller c;
  c.decoder = make_decoder(spec, 4, 12, 6, 1);
  randomize(*c.decoder, 2);
  c.switcher = make_switch(4, 12, 5, 3);
  const std::string bytes = encode_controller(c);
  const Controller back = decode_controller(bytes);
  CHECK(encode_controller(back) == bytes);
  CHECK(flatten(*back.decoder) == flatten(*c.decoder));
  CHECK(back.decoder->spec_hash == spec.hash());

  std::string bad = bytes;
  bad[1] = 'X';
  CHECK_THROWS_AS(decode_controller(bad), FormatError);
  bad = bytes;
  bad[4] = 2;
  CHECK_THROWS_WITH_AS(decode_controller(bad), doctest::Contains("version"), FormatError);
  CHECK_THROWS_AS(decode_controller(bytes.substr(0, bytes.size() / 2)), FormatError);

  CHECK_NOTHROW(check_compatible(*back.decoder, spec, 4, 12));
  CHECK_THROWS_AS(check_compatible(*back.decoder, spec, 33, 12), ConfigError);
  CHECK_THROWS_AS(check_compatible(*back.decoder, build_complete(primitives::basic_arithmetic(), 2, 1), 4, 12),
                  ConfigError);
  CHECK_THROWS_AS(check_compatible(*back.switcher, 33, 12), ConfigError);

  Controller only_switch;
  only_switch.switcher = c.switcher;
  CHECK(!decode_controller(encode_controller(only_switch)).decoder);
}
