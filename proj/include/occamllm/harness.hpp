// Copyright 2026 The occamllm Authors
// SPDX-License-Identifier: Apache-2.0
//
// Generation with switch splicing and the arithmetic benchmark harness.

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "occamllm/controller.hpp"
#include "occamllm/datagen.hpp"
#include "occamllm/hidden_states.hpp"
#include "occamllm/occamnet.hpp"
#include "occamllm/textio.hpp"

namespace occamllm::harness {

/// What routes a generation step. `score` sees the text so far and the
/// states of its last token; `choose` picks the wiring to evaluate.
struct Policy {
  std::function<double(std::string_view text, const Eigen::MatrixXd& h)> score;
  std::function<FunctionSample(std::string_view text, const Eigen::MatrixXd& h, std::uint64_t seed)> choose;
};

/// The trained routing: decode_switch for the score, decode_weights followed
/// by the best of `n_samples` draws for the wiring. The referenced objects
/// must outlive the policy.
Policy trained_policy(const NetSpec& spec, const DecoderParams& decoder, const SwitchParams& switcher,
                      int n_samples = 100);

/// One routing decision.
struct TraceEvent {
  int step = 0;                 // emission step
  std::size_t offset = 0;       // byte offset in the response where the step starts
  double score = 0.0;           // switch output
  bool fired = false;           // score > 0.5
  std::string dag;              // chosen wiring, when fired
  std::vector<double> operands; // values handed to the network
  std::optional<double> value;  // its result
  std::string output;           // text spliced into the response
  std::string note;             // fallback reason, if any
};

struct Generation {
  std::string response;
  std::vector<TraceEvent> trace;  // every switch consultation, in order
  int lm_tokens = 0;              // scripted tokens emitted
  int occam_outputs = 0;          // spliced network results
};

struct GenerateOptions {
  int max_tokens = 256;           // emission steps (each LM token or splice is one)
  std::uint64_t seed = 0;
  textio::FormatOptions format;   // for spliced results ("\n\n" appended)
};

/// Generates a response to `prompt`. The language model is the scripted
/// continuation `script`, emitted one toy token per step. Before each step
/// the switch is consulted on the text so far; when it fires, the chosen
/// wiring is evaluated on the most recent numbers of the text and the result
/// is spliced in, replacing the script's next number (and a newline run
/// directly after it). With no operands or an invalid result the step falls
/// back to the script. The switch is not consulted twice in a row without an
/// LM token in between. Generation ends when the script is exhausted or
/// after `max_tokens` steps.
Generation generate_with_switch(const HiddenStateProvider& provider, const NetSpec& spec, const Policy& policy,
                                std::string_view prompt, std::string_view script,
                                const GenerateOptions& options = {});

/// Token-level confusion counts of the switch against stream labels.
struct SwitchEval {
  long tp = 0, fp = 0, fn = 0, tn = 0;
  double precision() const { return tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0; }
  double recall() const { return tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0; }
  double f1() const { return 2.0 * tp + fp + fn > 0 ? 2.0 * tp / (2.0 * tp + fp + fn) : 0.0; }
};

/// Scores the switch (> 0.5 means "fire") on every token of every stream.
/// Throws ConfigError when a stream's labels do not match its token count.
SwitchEval evaluate_switch(const HiddenStateProvider& provider, const SwitchParams& switcher,
                           const std::vector<datagen::SwitchStream>& streams);

// ---- benchmark ------------------------------------------------------------

enum class Mode { Calculator, Model, Empty };
std::string_view to_string(Mode m);
/// "calculator", "model", "empty". Throws ConfigError otherwise.
Mode parse_mode(std::string_view name);

struct EvalRecord {
  std::string task;
  int index = 0;
  std::string prompt;    // the question as posed
  std::string response;
  double truth = 0.0;
  bool correct = false;
  std::optional<double> predicted;
  double relative_error = 1.0;  // |pred - truth| / |truth|; absolute when truth is 0; 1 without a number
  int prompt_tokens = 0;
  int response_tokens = 0;
  int occam_outputs = 0;
};

/// The metric of one record: |pred - truth| / |truth|, |pred| when the truth
/// is 0, and 1 when the response holds no number.
double relative_error(std::optional<double> predicted, double truth);

struct TaskSummary {
  std::string task;
  int n = 0;
  double accuracy = 0.0;  // fraction correct
  double sem = 0.0;       // sqrt(p (1 - p) / n)
  double mean_relative_error = 0.0;
};

/// Recomputes the aggregates from records (in record order).
TaskSummary summarize(const std::string& task, const std::vector<EvalRecord>& records);

struct BenchmarkTask {
  std::string kind;  // one of datagen::kBenchmarkKinds
  int digits = 7;
  int n = 1000;
  std::string label() const;  // e.g. "add-7", "log"
};

/// The nine arithmetic tasks at 7 digits.
std::vector<BenchmarkTask> standard_tasks(int n = 1000);

struct ModelRefs {
  const HiddenStateProvider* provider = nullptr;
  const NetSpec* spec = nullptr;
  const Policy* policy = nullptr;
  GenerateOptions generate;
};

struct BenchmarkReport {
  Mode mode = Mode::Calculator;
  std::uint64_t seed = 0;
  std::vector<TaskSummary> tasks;
  std::vector<EvalRecord> records;  // task order, then item order

  /// Accuracy (%) ± SEM and mean relative error (%) per task.
  std::string table() const;
  void write_records(std::ostream& out) const;
};

/// Scores every item of every task. Items are evaluated in parallel with
/// `threads` workers (0 means hardware concurrency) and assembled in order,
/// so the report does not depend on the thread count. Model mode requires
/// `model` to be fully set; the others ignore it.
BenchmarkReport run_benchmark(const std::vector<BenchmarkTask>& tasks, Mode mode, std::uint64_t seed,
                              const ModelRefs& model = {}, int threads = 0);

/// The response of the perfect-calculator baseline: the prompt's expression
/// evaluated directly, printed in shortest round-trip form. Empty when the
/// prompt does not parse.
std::string calculator_response(std::string_view prompt);

}  // namespace occamllm::harness
