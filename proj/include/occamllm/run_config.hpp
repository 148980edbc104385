// Copyright 2026 The occamllm Authors
// SPDX-License-Identifier: Apache-2.0
//
// Run configuration for the command-line workflows. A config file is one
// JSON object; every section is optional and unknown keys are rejected.
//
//   {
//     "seed": 1,                      // overridden by --seed
//     "output_dir": "runs/demo",
//     "network":  {"two_layer": false, "primitives": "calculator",
//                  "n_inputs": 2, "layers": 1},
//     "provider": {"kind": "toy", "seed": 7, "layers": 4, "hidden_dim": 1024}
//              or {"kind": "file", "directory": "states/"},
//     "dataset":  {"kind": "decoder", "count": 1000, "answer_prefix": false,
//                  "min_ops": 1, "max_ops": 2, "task": "add", "digits": 7,
//                  "output": "decoder.jsonl"},
//     "train":    {"learning_rate": 6e-4, "weight_decay": 0.01,
//                  "effective_batch": 8, "samples_per_token": 1000,
//                  "steps": 1000, "log_every": 50, "width": 64,
//                  "stages": ["stage1.jsonl", "stage2.jsonl"],
//                  "generated_items": 40000, "checkpoint": "model.occt",
//                  "decoder_checkpoint": ""},
//     "bench":    {"mode": "calculator", "checkpoint": "model.occt",
//                  "tasks": [{"kind": "add", "digits": 7, "n": 1000}],
//                  "threads": 0, "n_samples": 100, "max_tokens": 256},
//     "generate": {"checkpoint": "model.occt", "prompt": "6 + 7 = ",
//                  "script": "", "max_tokens": 64, "n_samples": 100}
//   }
//
// Relative paths are resolved against the directory of the config file.

#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "occamllm/harness.hpp"
#include "occamllm/hidden_states.hpp"
#include "occamllm/occamnet.hpp"
#include "occamllm/toy_encoder.hpp"
#include "occamllm/training.hpp"

namespace occamllm {

struct NetworkConfig {
  bool two_layer = false;  // {+,-,*,/}, three inputs, two layers
  std::string primitives = "calculator";  // "calculator" (10 primitives) or "arithmetic" (+,-,*,/)
  int n_inputs = 2;
  int layers = 1;

  NetSpec build() const;
};

struct ProviderConfig {
  std::string kind = "toy";  // "toy" or "file"
  ToyEncoderConfig toy;
  std::string directory;     // file provider

  std::unique_ptr<HiddenStateProvider> make() const;
};

struct DatasetConfig {
  std::string kind = "decoder";  // decoder, expression, switch, benchmark
  int count = 1000;
  bool answer_prefix = false;
  int min_ops = 1;
  int max_ops = 2;
  std::string task = "add";      // benchmark kind
  int digits = 7;
  std::string output = "dataset.jsonl";
};

struct TrainSection {
  TrainConfig train;
  int width = 64;
  std::vector<std::string> stages;  // JSONL files; generated when empty
  int generated_items = 40000;      // per stage (decoder) or streams (switch)
  std::string checkpoint = "model.occt";
  std::string decoder_checkpoint;   // train switch: carry this decoder along
};

struct BenchSection {
  harness::Mode mode = harness::Mode::Calculator;
  std::string checkpoint;
  std::vector<harness::BenchmarkTask> tasks = harness::standard_tasks();
  int threads = 0;
  int n_samples = 100;
  int max_tokens = 256;
};

struct GenerateSection {
  std::string checkpoint;
  std::string prompt;
  std::string script;
  int max_tokens = 64;
  int n_samples = 100;
};

/// Fully determines a run, given the code version.
struct RunConfig {
  std::uint64_t seed = 1;
  std::string output_dir = ".";
  NetworkConfig network;
  ProviderConfig provider;
  DatasetConfig dataset;
  TrainSection train;
  BenchSection bench;
  GenerateSection generate;

  /// Every setting, defaults included, in a stable key order.
  nlohmann::ordered_json to_json() const;
};

/// Throws ConfigError on unknown keys, wrong types or out-of-range values.
/// Relative paths are resolved against `base_dir` when it is non-empty.
RunConfig parse_run_config(const nlohmann::json& j, const std::string& base_dir = "");
/// Reads and parses a config file; a missing or malformed file is a ConfigError.
RunConfig load_run_config(const std::string& path);

}  // namespace occamllm
