// Copyright 2026 The occamllm Authors
// SPDX-License-Identifier: Apache-2.0

#include "occamllm/commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "occamllm/controller.hpp"
#include "occamllm/datagen.hpp"
#include "occamllm/errors.hpp"
#include "occamllm/seed.hpp"
#include "occamllm/textio.hpp"
#include "occamllm/training.hpp"

namespace occamllm::commands {
namespace {

constexpr std::uint64_t kHeldOutTag = 0x6865'6C64'6F75'74ULL;  // keeps evaluation seeds apart from training
constexpr int kHeldOutItems = 200;

std::filesystem::path prepare(const RunConfig& config) {
  const std::filesystem::path dir(config.output_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir.string() + "': " + ec.message());
  std::ofstream cfg(dir / "config.json");
  cfg << config.to_json().dump(2) << "\n";
  if (!cfg) throw std::runtime_error("cannot write " + (dir / "config.json").string());
  return dir;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
  if (!f) throw std::runtime_error("cannot write " + path.string());
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

std::vector<DecoderItem> to_items(const std::vector<datagen::GeneratedExample>& examples) {
  std::vector<DecoderItem> out;
  out.reserve(examples.size());
  for (const auto& e : examples) out.push_back({e.text, e.inputs, e.answer});
  return out;
}

datagen::GeneratedExample decoder_example(const RunConfig& c, std::uint64_t seed, bool prefix) {
  if (c.network.two_layer) return datagen::sample_expression_example(seed, 1, 2, prefix);
  datagen::DecoderDataOptions o;
  o.answer_prefix = prefix;
  o.n_inputs = c.network.n_inputs;
  return datagen::sample_decoder_example(seed, o);
}

// Collects training progress as table rows and JSONL records.
struct Progress {
  std::ostringstream table, records;
  std::ostream* live = nullptr;

  void add(const StepMetrics& m, bool with_rate) {
    char line[128];
    if (with_rate) {
      std::snprintf(line, sizeof line, "%8d %6d %14.6g %12.4f %8d\n", m.step, m.stage, m.loss, m.reward_rate,
                    m.skipped);
    } else {
      std::snprintf(line, sizeof line, "%8d %14.6g\n", m.step, m.loss);
    }
    table << line;
    if (live) *live << line << std::flush;
    nlohmann::ordered_json j;
    j["step"] = m.step;
    if (with_rate) j["stage"] = m.stage;
    j["loss"] = m.loss;
    if (with_rate) {
      j["reward_rate"] = m.reward_rate;
      j["skipped"] = m.skipped;
    }
    records << j.dump() << "\n";
  }
};

std::unique_ptr<HiddenStateProvider> provider_for(const RunConfig& c) { return c.provider.make(); }

}  // namespace

void dataset_build(const RunConfig& c, std::ostream& out) {
  const auto dir = prepare(c);
  std::vector<datagen::GeneratedExample> examples;
  const DatasetConfig& d = c.dataset;
  if (d.kind == "benchmark") {
    examples = datagen::build_benchmark(d.task, d.digits, d.count, c.seed);
  } else {
    for (int i = 0; i < d.count; ++i) {
      const std::uint64_t s = mix_seed(c.seed, static_cast<std::uint64_t>(i));
      if (d.kind == "decoder") {
        datagen::DecoderDataOptions o;
        o.answer_prefix = d.answer_prefix;
        o.n_inputs = c.network.n_inputs;
        examples.push_back(datagen::sample_decoder_example(s, o));
      } else if (d.kind == "expression") {
        examples.push_back(datagen::sample_expression_example(s, d.min_ops, d.max_ops, d.answer_prefix));
      } else {
        const datagen::SwitchStream st = datagen::sample_switch_stream(s);
        datagen::GeneratedExample e;
        e.text = st.text;
        e.labels = st.labels;
        e.seed = st.seed;
        e.category = "switch";
        examples.push_back(std::move(e));
      }
    }
  }
  datagen::save_jsonl(d.output, examples);
  std::map<std::string, int> counts;
  for (const auto& e : examples) ++counts[e.category];
  std::ostringstream table;
  table << "dataset " << d.kind << ", seed " << c.seed << ", " << examples.size() << " items\n";
  char line[96];
  for (const auto& [cat, n] : counts) {
    std::snprintf(line, sizeof line, "%-20s %8d\n", cat.c_str(), n);
    table << line;
  }
  write_text(dir / "report.txt", table.str());
  out << table.str();
}

void train_decoder(const RunConfig& c, std::ostream& out) {
  const auto dir = prepare(c);
  const NetSpec spec = c.network.build();
  const auto provider = provider_for(c);
  std::vector<std::vector<DecoderItem>> stages;
  if (!c.train.stages.empty()) {
    for (const std::string& path : c.train.stages) stages.push_back(to_items(datagen::load_jsonl(path)));
  } else {
    for (int s = 0; s < 2; ++s) {
      std::vector<DecoderItem> items;
      for (int i = 0; i < c.train.generated_items; ++i) {
        const std::uint64_t seed = mix_seed(c.seed, (static_cast<std::uint64_t>(s) << 32) + i);
        const auto e = decoder_example(c, seed, s == 0);
        items.push_back({e.text, e.inputs, e.answer});
      }
      stages.push_back(std::move(items));
    }
  }
  for (const auto& stage : stages) {
    for (const DecoderItem& item : stage) {
      if (static_cast<int>(item.inputs.size()) != spec.n_inputs()) {
        throw ConfigError("training item has " + std::to_string(item.inputs.size()) + " inputs, network takes " +
                          std::to_string(spec.n_inputs()));
      }
    }
  }

  TrainConfig tc = c.train.train;
  tc.seed = c.seed;
  DecoderParams params = make_decoder(spec, provider->n_layers(), provider->hidden_dim(), c.train.width, c.seed);
  Progress progress;
  progress.live = &out;
  out << "    step  stage           loss  reward rate  skipped\n";
  progress.table << "    step  stage           loss  reward rate  skipped\n";
  params = occamllm::train_decoder(tc, *provider, spec, std::move(params), stages,
                                   [&progress](const StepMetrics& m) { progress.add(m, true); });

  int correct = 0;
  for (int i = 0; i < kHeldOutItems; ++i) {
    const auto e = decoder_example(c, mix_seed(c.seed ^ kHeldOutTag, static_cast<std::uint64_t>(i)), false);
    const FunctionSample f = argmax_function(spec, decode_weights(params, provider->encode_last(e.text)),
                                             mix_seed(c.seed, static_cast<std::uint64_t>(i)));
    correct += Reward{}(evaluate(spec, f.dag, e.inputs), e.answer) > 0.0 ? 1 : 0;
  }
  const double acc = static_cast<double>(correct) / kHeldOutItems;
  progress.table << "held-out answer accuracy " << fmt("%.1f", 100.0 * acc) << "% on " << kHeldOutItems
                 << " prompts\n";
  out << "held-out answer accuracy " << fmt("%.1f", 100.0 * acc) << "% on " << kHeldOutItems << " prompts\n";
  nlohmann::ordered_json summary;
  summary["held_out_items"] = kHeldOutItems;
  summary["held_out_accuracy"] = acc;
  progress.records << summary.dump() << "\n";

  Controller ctl;
  ctl.decoder = std::move(params);
  save_controller(c.train.checkpoint, ctl);
  write_text(dir / "report.txt", progress.table.str());
  write_text(dir / "metrics.jsonl", progress.records.str());
  out << "saved " << c.train.checkpoint << "\n";
}

void train_switch(const RunConfig& c, std::ostream& out) {
  const auto dir = prepare(c);
  const auto provider = provider_for(c);
  std::vector<SwitchItem> streams;
  if (!c.train.stages.empty()) {
    for (const std::string& path : c.train.stages) {
      for (const auto& e : datagen::load_jsonl(path)) {
        if (e.labels.empty()) throw ConfigError(path + ": switch training needs labeled streams");
        streams.push_back({e.text, e.labels});
      }
    }
  } else {
    for (int i = 0; i < c.train.generated_items; ++i) {
      const auto s = datagen::sample_switch_stream(mix_seed(c.seed, static_cast<std::uint64_t>(i)));
      streams.push_back({s.text, s.labels});
    }
  }

  Controller ctl;
  if (!c.train.decoder_checkpoint.empty()) {
    ctl.decoder = load_controller(c.train.decoder_checkpoint).decoder;
    if (!ctl.decoder) throw ConfigError(c.train.decoder_checkpoint + " holds no decoder");
    check_compatible(*ctl.decoder, c.network.build(), provider->n_layers(), provider->hidden_dim());
  }
  TrainConfig tc = c.train.train;
  tc.seed = c.seed;
  SwitchParams params = make_switch(provider->n_layers(), provider->hidden_dim(), c.train.width, c.seed);
  Progress progress;
  progress.live = &out;
  out << "    step           loss\n";
  progress.table << "    step           loss\n";
  params = occamllm::train_switch(tc, *provider, std::move(params), streams,
                                  [&progress](const StepMetrics& m) { progress.add(m, false); });

  std::vector<datagen::SwitchStream> held_out;
  for (int i = 0; i < kHeldOutItems; ++i) {
    held_out.push_back(datagen::sample_switch_stream(mix_seed(c.seed ^ kHeldOutTag, static_cast<std::uint64_t>(i))));
  }
  const harness::SwitchEval ev = harness::evaluate_switch(*provider, params, held_out);
  const std::string line = "held-out token F1 " + fmt("%.4f", ev.f1()) + " (precision " +
                           fmt("%.4f", ev.precision()) + ", recall " + fmt("%.4f", ev.recall()) + ")\n";
  progress.table << line;
  out << line;
  nlohmann::ordered_json summary;
  summary["held_out_streams"] = kHeldOutItems;
  summary["tp"] = ev.tp;
  summary["fp"] = ev.fp;
  summary["fn"] = ev.fn;
  summary["f1"] = ev.f1();
  progress.records << summary.dump() << "\n";

  ctl.switcher = std::move(params);
  save_controller(c.train.checkpoint, ctl);
  write_text(dir / "report.txt", progress.table.str());
  write_text(dir / "metrics.jsonl", progress.records.str());
  out << "saved " << c.train.checkpoint << "\n";
}

harness::BenchmarkReport bench_run(const RunConfig& c, std::ostream& out) {
  const auto dir = prepare(c);
  harness::BenchmarkReport report;
  if (c.bench.mode == harness::Mode::Model) {
    const NetSpec spec = c.network.build();
    const auto provider = provider_for(c);
    const Controller ctl = load_controller(c.bench.checkpoint);
    if (!ctl.decoder || !ctl.switcher) throw ConfigError(c.bench.checkpoint + " needs both a decoder and a switch");
    check_compatible(*ctl.decoder, spec, provider->n_layers(), provider->hidden_dim());
    check_compatible(*ctl.switcher, provider->n_layers(), provider->hidden_dim());
    const harness::Policy policy = harness::trained_policy(spec, *ctl.decoder, *ctl.switcher, c.bench.n_samples);
    harness::ModelRefs refs;
    refs.provider = provider.get();
    refs.spec = &spec;
    refs.policy = &policy;
    refs.generate.max_tokens = c.bench.max_tokens;
    report = harness::run_benchmark(c.bench.tasks, c.bench.mode, c.seed, refs, c.bench.threads);
  } else {
    report = harness::run_benchmark(c.bench.tasks, c.bench.mode, c.seed, {}, c.bench.threads);
  }
  const std::string table = report.table();
  write_text(dir / "report.txt", table);
  std::ofstream rec(dir / "records.jsonl", std::ios::binary);
  report.write_records(rec);
  if (!rec) throw std::runtime_error("cannot write " + (dir / "records.jsonl").string());
  out << table;
  return report;
}

harness::Generation generate(const RunConfig& c, std::ostream& out) {
  const auto dir = prepare(c);
  if (c.generate.checkpoint.empty()) throw ConfigError("generate needs generate.checkpoint");
  const NetSpec spec = c.network.build();
  const auto provider = provider_for(c);
  const Controller ctl = load_controller(c.generate.checkpoint);
  if (!ctl.decoder || !ctl.switcher) throw ConfigError(c.generate.checkpoint + " needs both a decoder and a switch");
  check_compatible(*ctl.decoder, spec, provider->n_layers(), provider->hidden_dim());
  check_compatible(*ctl.switcher, provider->n_layers(), provider->hidden_dim());
  const harness::Policy policy = harness::trained_policy(spec, *ctl.decoder, *ctl.switcher, c.generate.n_samples);
  harness::GenerateOptions opts;
  opts.max_tokens = c.generate.max_tokens;
  opts.seed = c.seed;
  const harness::Generation g =
      harness::generate_with_switch(*provider, spec, policy, c.generate.prompt, c.generate.script, opts);

  std::ostringstream table, records;
  table << "prompt:   " << nlohmann::json(c.generate.prompt).dump() << "\n";
  table << "response: " << nlohmann::json(g.response).dump() << "\n";
  table << "    step   offset    score  fired  dag                          operands -> output\n";
  for (const harness::TraceEvent& ev : g.trace) {
    char line[96];
    std::snprintf(line, sizeof line, "%8d %8zu %8.4f  %-5s  ", ev.step, ev.offset, ev.score, ev.fired ? "yes" : "no");
    table << line;
    if (ev.fired) {
      std::ostringstream ops;
      for (std::size_t i = 0; i < ev.operands.size(); ++i) ops << (i ? ", " : "") << ev.operands[i];
      char rest[64];
      std::snprintf(rest, sizeof rest, "%-28s ", ev.dag.c_str());
      table << rest << "(" << ops.str() << ") -> " << nlohmann::json(ev.output).dump();
      if (!ev.note.empty()) table << "  [" << ev.note << "]";
    }
    table << "\n";
    nlohmann::ordered_json j;
    j["step"] = ev.step;
    j["offset"] = ev.offset;
    j["score"] = ev.score;
    j["fired"] = ev.fired;
    if (ev.fired) {
      j["dag"] = ev.dag;
      j["operands"] = ev.operands;
      j["value"] = ev.value ? nlohmann::ordered_json(*ev.value) : nlohmann::ordered_json(nullptr);
      j["output"] = ev.output;
      if (!ev.note.empty()) j["note"] = ev.note;
    }
    records << j.dump() << "\n";
  }
  write_text(dir / "report.txt", table.str());
  write_text(dir / "trace.jsonl", records.str());
  out << table.str();
  return g;
}

}  // namespace occamllm::commands
