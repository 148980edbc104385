// Copyright 2026 The occamllm Authors
// SPDX-License-Identifier: Apache-2.0

#include "occamllm/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "occamllm/calculator.hpp"
#include "occamllm/errors.hpp"
#include "occamllm/seed.hpp"
#include "occamllm/toy_encoder.hpp"

namespace occamllm::harness {
namespace {

bool is_sign(const Token& t) { return t.core == "-" || t.core == "\xE2\x88\x92"; }

// Index just past the number the script would have printed at `at`, plus a
// newline run right after it; `at` itself when the next token is no number.
std::size_t skip_replaced_number(const std::vector<Token>& script, std::size_t at) {
  std::size_t i = at;
  if (i + 1 < script.size() && is_sign(script[i]) && script[i].text == script[i].core &&
      script[i + 1].kind == TokenKind::Number) {
    ++i;
  }
  if (i >= script.size() || script[i].kind != TokenKind::Number) return at;
  ++i;
  if (i < script.size() && script[i].kind == TokenKind::Newline) ++i;
  return i;
}

std::string percent(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, 100.0 * v);
  return buf;
}

std::string percent_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", 100.0 * v);
  return buf;
}

}  // namespace

Policy trained_policy(const NetSpec& spec, const DecoderParams& decoder, const SwitchParams& switcher,
                      int n_samples) {
  if (n_samples < 1) throw ConfigError("trained_policy: n_samples must be positive");
  Policy p;
  p.score = [&switcher](std::string_view, const Eigen::MatrixXd& h) { return decode_switch(switcher, h); };
  p.choose = [&spec, &decoder, n_samples](std::string_view, const Eigen::MatrixXd& h, std::uint64_t seed) {
    return argmax_function(spec, decode_weights(decoder, h), seed, n_samples);
  };
  return p;
}

Generation generate_with_switch(const HiddenStateProvider& provider, const NetSpec& spec, const Policy& policy,
                                std::string_view prompt, std::string_view script,
                                const GenerateOptions& options) {
  if (!policy.score || !policy.choose) throw ConfigError("generate_with_switch: incomplete policy");
  const std::vector<Token> lm = tokenize(script);
  std::string text(prompt);
  Generation g;
  std::size_t cursor = 0;
  bool may_consult = !text.empty();
  for (int step = 0; step < options.max_tokens; ++step) {
    if (may_consult) {
      may_consult = false;
      const Eigen::MatrixXd h = provider.encode_last(text);
      TraceEvent ev;
      ev.step = step;
      ev.offset = g.response.size();
      ev.score = policy.score(text, h);
      ev.fired = ev.score > 0.5;
      if (ev.fired) {
        const FunctionSample f = policy.choose(text, h, mix_seed(options.seed, static_cast<std::uint64_t>(step)));
        ev.dag = expression(spec, f.dag);
        try {
          ev.operands = textio::select_operands(textio::extract_numbers(text), spec.n_inputs()).values;
          ev.value = evaluate(spec, f.dag, ev.operands);
          if (!ev.value) ev.note = "invalid evaluation; language model continues";
        } catch (const textio::NoOperandsError&) {
          ev.note = "no operands; language model continues";
        }
        if (ev.value) {
          ev.output = *textio::format_output(ev.value, options.format);
          g.response += ev.output;
          text += ev.output;
          ++g.occam_outputs;
          cursor = skip_replaced_number(lm, cursor);
        }
      }
      const bool spliced = !ev.output.empty();
      g.trace.push_back(std::move(ev));
      if (spliced) continue;
    }
    if (cursor >= lm.size()) break;
    g.response += lm[cursor].text;
    text += lm[cursor].text;
    ++cursor;
    ++g.lm_tokens;
    may_consult = true;
  }
  return g;
}

SwitchEval evaluate_switch(const HiddenStateProvider& provider, const SwitchParams& switcher,
                           const std::vector<datagen::SwitchStream>& streams) {
  SwitchEval e;
  for (const datagen::SwitchStream& s : streams) {
    const HiddenStates hs = provider.encode(s.text);
    if (hs.size() != s.labels.size()) {
      throw ConfigError("switch stream has " + std::to_string(s.labels.size()) + " labels for " +
                        std::to_string(hs.size()) + " tokens");
    }
    for (std::size_t t = 0; t < hs.size(); ++t) {
      const bool fire = decode_switch(switcher, hs.tokens[t]) > 0.5;
      const bool label = s.labels[t] != 0;
      e.tp += fire && label;
      e.fp += fire && !label;
      e.fn += !fire && label;
      e.tn += !fire && !label;
    }
  }
  return e;
}

// ---- benchmark ------------------------------------------------------------

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::Calculator: return "calculator";
    case Mode::Model: return "model";
    case Mode::Empty: return "empty";
  }
  return "calculator";
}

Mode parse_mode(std::string_view name) {
  if (name == "calculator") return Mode::Calculator;
  if (name == "model") return Mode::Model;
  if (name == "empty") return Mode::Empty;
  throw ConfigError("unknown benchmark mode '" + std::string(name) + "' (calculator, model, empty)");
}

double relative_error(std::optional<double> predicted, double truth) {
  if (!predicted) return 1.0;
  const double err = std::abs(*predicted - truth);
  return truth == 0.0 ? err : err / std::abs(truth);
}

TaskSummary summarize(const std::string& task, const std::vector<EvalRecord>& records) {
  TaskSummary s;
  s.task = task;
  double correct = 0.0, rel = 0.0;
  for (const EvalRecord& r : records) {
    if (r.task != task) continue;
    ++s.n;
    correct += r.correct ? 1.0 : 0.0;
    rel += r.relative_error;
  }
  if (s.n > 0) {
    s.accuracy = correct / s.n;
    s.sem = std::sqrt(s.accuracy * (1.0 - s.accuracy) / s.n);
    s.mean_relative_error = rel / s.n;
  }
  return s;
}

std::string BenchmarkTask::label() const {
  const bool sized = kind == "add" || kind == "sub" || kind == "mul" || kind == "div" || kind == "sqrt" ||
                     kind == "multistep-2layer";
  return sized ? kind + "-" + std::to_string(digits) : kind;
}

std::vector<BenchmarkTask> standard_tasks(int n) {
  std::vector<BenchmarkTask> out;
  for (const char* k : {"add", "sub", "mul", "div", "sqrt", "exp", "log", "sin", "cos"}) {
    out.push_back({k, 7, n});
  }
  return out;
}

std::string calculator_response(std::string_view prompt) {
  const std::optional<double> v = calc::evaluate_prompt(prompt);
  textio::FormatOptions fmt;
  fmt.shortest = true;
  fmt.suffix = "";
  return textio::format_output(v, fmt).value_or("");
}

std::string BenchmarkReport::table() const {
  std::ostringstream out;
  out << "mode " << to_string(mode) << ", seed " << seed << "\n";
  char line[160];
  std::snprintf(line, sizeof line, "%-20s %6s %18s %18s\n", "task", "n", "accuracy (%)", "rel. error (%)");
  out << line;
  for (const TaskSummary& t : tasks) {
    const std::string acc = percent(t.accuracy, 1) + " \xC2\xB1 " + percent(t.sem, 1);
    std::snprintf(line, sizeof line, "%-20s %6d %18s %18s\n", t.task.c_str(), t.n, acc.c_str(),
                  percent_g(t.mean_relative_error).c_str());
    out << line;
  }
  return out.str();
}

void BenchmarkReport::write_records(std::ostream& out) const {
  for (const EvalRecord& r : records) {
    nlohmann::ordered_json j;
    j["task"] = r.task;
    j["index"] = r.index;
    j["prompt"] = r.prompt;
    j["response"] = r.response;
    j["truth"] = r.truth;
    j["correct"] = r.correct;
    j["predicted"] = r.predicted ? nlohmann::ordered_json(*r.predicted) : nlohmann::ordered_json(nullptr);
    j["relative_error"] = r.relative_error;
    j["prompt_tokens"] = r.prompt_tokens;
    j["response_tokens"] = r.response_tokens;
    j["occam_outputs"] = r.occam_outputs;
    out << j.dump() << "\n";
  }
}

BenchmarkReport run_benchmark(const std::vector<BenchmarkTask>& tasks, Mode mode, std::uint64_t seed,
                              const ModelRefs& model, int threads) {
  if (mode == Mode::Model && (!model.provider || !model.spec || !model.policy)) {
    throw ConfigError("model benchmark needs a provider, a network and a trained policy");
  }
  struct Job {
    const BenchmarkTask* task;
    int index;
    datagen::GeneratedExample item;
  };
  std::vector<Job> jobs;
  for (const BenchmarkTask& t : tasks) {
    std::vector<datagen::GeneratedExample> items = datagen::build_benchmark(t.kind, t.digits, t.n, seed);
    for (int i = 0; i < static_cast<int>(items.size()); ++i) jobs.push_back({&t, i, std::move(items[i])});
  }

  BenchmarkReport report;
  report.mode = mode;
  report.seed = seed;
  report.records.resize(jobs.size());
  auto score_one = [&](std::size_t k) {
    const Job& job = jobs[k];
    EvalRecord r;
    r.task = job.task->label();
    r.index = job.index;
    r.prompt = job.item.prompt;
    r.truth = job.item.answer;
    r.prompt_tokens = static_cast<int>(tokenize(job.item.text).size());
    if (mode == Mode::Calculator) {
      r.response = calculator_response(job.item.prompt);
    } else if (mode == Mode::Model) {
      GenerateOptions opts = model.generate;
      opts.seed = mix_seed(seed, k);
      const Generation g =
          generate_with_switch(*model.provider, *model.spec, *model.policy, job.item.text, job.item.script, opts);
      r.response = g.response;
      r.occam_outputs = g.occam_outputs;
    }
    r.response_tokens = static_cast<int>(tokenize(r.response).size());
    const textio::Score s = textio::score_response(r.response, r.truth);
    r.correct = s.correct;
    r.predicted = s.predicted;
    r.relative_error = relative_error(s.predicted, r.truth);
    report.records[k] = std::move(r);
  };

  int workers = threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min<int>(workers, static_cast<int>(std::max<std::size_t>(jobs.size(), 1)));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t k = next++; k < jobs.size(); k = next++) {
      try {
        score_one(k);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = jobs.size();
      }
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  for (const BenchmarkTask& t : tasks) report.tasks.push_back(summarize(t.label(), report.records));
  return report;
}

}  // namespace occamllm::harness
