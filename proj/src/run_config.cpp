// Copyright 2026 The occamllm Authors
// SPDX-License-Identifier: Apache-2.0

#include "occamllm/run_config.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "occamllm/datagen.hpp"
#include "occamllm/errors.hpp"
#include "occamllm/primitive.hpp"

namespace occamllm {
namespace {

using nlohmann::json;

// Typed access to one JSON object that rejects keys nobody asked for.
class Section {
 public:
  Section(const json& j, std::string name) : name_(std::move(name)) {
    if (j.is_null()) return;
    if (!j.is_object()) throw ConfigError("'" + name_ + "' must be an object");
    j_ = &j;
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_ || !j_->contains(key)) return;
    try {
      out = j_->at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError("'" + name_ + "." + key + "' has the wrong type");
    }
  }

  bool has(const char* key) const { return j_ && j_->contains(key); }
  /// Marks a key read elsewhere (a nested section) as known.
  void allow(const char* key) { seen_.insert(key); }

  void finish() const {
    if (!j_) return;
    for (const auto& [key, value] : j_->items()) {
      if (!seen_.count(key)) throw ConfigError("unknown key '" + name_ + "." + key + "'");
    }
  }

 private:
  const json* j_ = nullptr;
  std::string name_;
  std::set<std::string> seen_;
};

const json& member(const json& j, const char* key) {
  static const json null;
  return j.contains(key) ? j.at(key) : null;
}

void positive(int v, const char* what) {
  if (v < 1) throw ConfigError(std::string(what) + " must be positive");
}

std::string resolve(const std::string& path, const std::string& base) {
  if (path.empty() || base.empty() || std::filesystem::path(path).is_absolute()) return path;
  return (std::filesystem::path(base) / path).lexically_normal().string();
}

}  // namespace

NetSpec NetworkConfig::build() const {
  if (two_layer) return build_complete(primitives::basic_arithmetic(), 3, 2);
  if (primitives == "calculator") return build_complete(primitives::calculator_set(), n_inputs, layers);
  if (primitives == "arithmetic") return build_complete(primitives::basic_arithmetic(), n_inputs, layers);
  throw ConfigError("unknown primitive set '" + primitives + "' (calculator, arithmetic)");
}

std::unique_ptr<HiddenStateProvider> ProviderConfig::make() const {
  if (kind == "toy") return std::make_unique<ToyEncoder>(toy);
  if (kind == "file") return std::make_unique<FileProvider>(directory);
  throw ConfigError("unknown provider '" + kind + "' (toy, file)");
}

nlohmann::ordered_json RunConfig::to_json() const {
  nlohmann::ordered_json j;
  j["seed"] = seed;
  j["output_dir"] = output_dir;
  j["network"] = {{"two_layer", network.two_layer},
                  {"primitives", network.primitives},
                  {"n_inputs", network.n_inputs},
                  {"layers", network.layers}};
  nlohmann::ordered_json p;
  p["kind"] = provider.kind;
  if (provider.kind == "file") {
    p["directory"] = provider.directory;
  } else {
    p["seed"] = provider.toy.seed;
    p["layers"] = provider.toy.n_layers;
    p["hidden_dim"] = provider.toy.hidden_dim;
    p["version"] = provider.toy.version;
  }
  j["provider"] = p;
  j["dataset"] = {{"kind", dataset.kind},       {"count", dataset.count},     {"answer_prefix", dataset.answer_prefix},
                  {"min_ops", dataset.min_ops}, {"max_ops", dataset.max_ops}, {"task", dataset.task},
                  {"digits", dataset.digits},   {"output", dataset.output}};
  const TrainConfig& t = train.train;
  j["train"] = {{"learning_rate", t.learning_rate},
                {"weight_decay", t.weight_decay},
                {"effective_batch", t.effective_batch},
                {"samples_per_token", t.samples_per_token},
                {"steps", t.max_steps},
                {"log_every", t.log_every},
                {"width", train.width},
                {"stages", train.stages},
                {"generated_items", train.generated_items},
                {"checkpoint", train.checkpoint},
                {"decoder_checkpoint", train.decoder_checkpoint}};
  nlohmann::ordered_json tasks = nlohmann::ordered_json::array();
  for (const harness::BenchmarkTask& task : bench.tasks) {
    tasks.push_back({{"kind", task.kind}, {"digits", task.digits}, {"n", task.n}});
  }
  j["bench"] = {{"mode", std::string(harness::to_string(bench.mode))},
                {"checkpoint", bench.checkpoint},
                {"tasks", tasks},
                {"threads", bench.threads},
                {"n_samples", bench.n_samples},
                {"max_tokens", bench.max_tokens}};
  j["generate"] = {{"checkpoint", generate.checkpoint},
                   {"prompt", generate.prompt},
                   {"script", generate.script},
                   {"max_tokens", generate.max_tokens},
                   {"n_samples", generate.n_samples}};
  return j;
}

RunConfig parse_run_config(const json& j, const std::string& base_dir) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig c;
  Section top(j, "config");
  top.get("seed", c.seed);
  top.get("output_dir", c.output_dir);
  c.output_dir = resolve(c.output_dir, base_dir);

  Section net(member(j, "network"), "network");
  net.get("two_layer", c.network.two_layer);
  net.get("primitives", c.network.primitives);
  net.get("n_inputs", c.network.n_inputs);
  net.get("layers", c.network.layers);
  net.finish();
  if (c.network.two_layer) {
    c.network.primitives = "arithmetic";
    c.network.n_inputs = 3;
    c.network.layers = 2;
  }
  positive(c.network.n_inputs, "network.n_inputs");
  positive(c.network.layers, "network.layers");
  (void)c.network.build();  // validates the primitive set

  Section prov(member(j, "provider"), "provider");
  prov.get("kind", c.provider.kind);
  prov.get("seed", c.provider.toy.seed);
  prov.get("layers", c.provider.toy.n_layers);
  prov.get("hidden_dim", c.provider.toy.hidden_dim);
  prov.get("version", c.provider.toy.version);
  prov.get("directory", c.provider.directory);
  prov.finish();
  c.provider.directory = resolve(c.provider.directory, base_dir);
  if (c.provider.kind != "toy" && c.provider.kind != "file") {
    throw ConfigError("unknown provider '" + c.provider.kind + "' (toy, file)");
  }
  if (c.provider.kind == "file" && c.provider.directory.empty()) {
    throw ConfigError("file provider needs provider.directory");
  }
  positive(c.provider.toy.n_layers, "provider.layers");
  positive(c.provider.toy.hidden_dim, "provider.hidden_dim");
  if (c.provider.toy.version != 1) throw ConfigError("provider.version: only feature version 1 exists");

  Section ds(member(j, "dataset"), "dataset");
  ds.get("kind", c.dataset.kind);
  ds.get("count", c.dataset.count);
  ds.get("answer_prefix", c.dataset.answer_prefix);
  ds.get("min_ops", c.dataset.min_ops);
  ds.get("max_ops", c.dataset.max_ops);
  ds.get("task", c.dataset.task);
  ds.get("digits", c.dataset.digits);
  ds.get("output", c.dataset.output);
  ds.finish();
  c.dataset.output = resolve(c.dataset.output, c.output_dir);
  static const std::set<std::string> kinds{"decoder", "expression", "switch", "benchmark"};
  if (!kinds.count(c.dataset.kind)) {
    throw ConfigError("unknown dataset kind '" + c.dataset.kind + "' (decoder, expression, switch, benchmark)");
  }
  if (c.dataset.count < 0) throw ConfigError("dataset.count must be non-negative");
  if (c.dataset.min_ops < 1 || c.dataset.max_ops < c.dataset.min_ops) {
    throw ConfigError("dataset: need 1 <= min_ops <= max_ops");
  }

  TrainConfig& t = c.train.train;
  if (c.network.two_layer) {
    t.learning_rate = 1e-4;
    t.samples_per_token = 50000;
  }
  Section tr(member(j, "train"), "train");
  tr.get("learning_rate", t.learning_rate);
  tr.get("weight_decay", t.weight_decay);
  tr.get("effective_batch", t.effective_batch);
  tr.get("samples_per_token", t.samples_per_token);
  tr.get("steps", t.max_steps);
  tr.get("log_every", t.log_every);
  tr.get("width", c.train.width);
  tr.get("stages", c.train.stages);
  tr.get("generated_items", c.train.generated_items);
  tr.get("checkpoint", c.train.checkpoint);
  tr.get("decoder_checkpoint", c.train.decoder_checkpoint);
  tr.finish();
  for (std::string& s : c.train.stages) s = resolve(s, base_dir);
  c.train.checkpoint = resolve(c.train.checkpoint, c.output_dir);
  c.train.decoder_checkpoint = resolve(c.train.decoder_checkpoint, base_dir);
  if (!(t.learning_rate > 0.0)) throw ConfigError("train.learning_rate must be positive");
  if (!(t.weight_decay >= 0.0)) throw ConfigError("train.weight_decay must be non-negative");
  positive(t.effective_batch, "train.effective_batch");
  positive(t.samples_per_token, "train.samples_per_token");
  if (t.max_steps < 0) throw ConfigError("train.steps must be non-negative");
  positive(c.train.width, "train.width");
  positive(c.train.generated_items, "train.generated_items");

  Section b(member(j, "bench"), "bench");
  std::string mode = "calculator";
  b.get("mode", mode);
  c.bench.mode = harness::parse_mode(mode);
  b.get("checkpoint", c.bench.checkpoint);
  b.get("threads", c.bench.threads);
  b.get("n_samples", c.bench.n_samples);
  b.get("max_tokens", c.bench.max_tokens);
  if (b.has("tasks")) {
    const json& tasks = member(member(j, "bench"), "tasks");
    if (!tasks.is_array() || tasks.empty()) throw ConfigError("bench.tasks must be a non-empty array");
    c.bench.tasks.clear();
    for (const json& tj : tasks) {
      harness::BenchmarkTask task;
      Section ts(tj, "bench.tasks[]");
      ts.get("kind", task.kind);
      ts.get("digits", task.digits);
      ts.get("n", task.n);
      ts.finish();
      if (std::find(std::begin(datagen::kBenchmarkKinds), std::end(datagen::kBenchmarkKinds), task.kind) ==
          std::end(datagen::kBenchmarkKinds)) {
        throw ConfigError("unknown benchmark kind '" + task.kind + "'");
      }
      if (task.n < 0) throw ConfigError("bench.tasks[].n must be non-negative");
      c.bench.tasks.push_back(task);
    }
  }
  b.allow("tasks");
  b.finish();
  c.bench.checkpoint = resolve(c.bench.checkpoint, base_dir);
  if (c.bench.mode == harness::Mode::Model && c.bench.checkpoint.empty()) {
    throw ConfigError("model benchmark needs bench.checkpoint");
  }
  if (c.bench.threads < 0) throw ConfigError("bench.threads must be non-negative");
  positive(c.bench.n_samples, "bench.n_samples");
  positive(c.bench.max_tokens, "bench.max_tokens");

  Section g(member(j, "generate"), "generate");
  g.get("checkpoint", c.generate.checkpoint);
  g.get("prompt", c.generate.prompt);
  g.get("script", c.generate.script);
  g.get("max_tokens", c.generate.max_tokens);
  g.get("n_samples", c.generate.n_samples);
  g.finish();
  c.generate.checkpoint = resolve(c.generate.checkpoint, base_dir);
  positive(c.generate.max_tokens, "generate.max_tokens");
  positive(c.generate.n_samples, "generate.n_samples");

  top.allow("network");
  top.allow("provider");
  top.allow("dataset");
  top.allow("train");
  top.allow("bench");
  top.allow("generate");
  top.finish();
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_run_config(j, std::filesystem::path(path).parent_path().string());
}

}  // namespace occamllm
