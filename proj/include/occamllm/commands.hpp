// Copyright 2026 The occamllm Authors
// SPDX-License-Identifier: Apache-2.0
//
// The command-line workflows. Each writes, under the config's output
// directory, the resolved config (config.json), a human-readable table
// (report.txt, also printed to `out`) and a line-delimited record file.
// Reports contain no wall-clock values, so identical configs and seeds
// give byte-identical files.

#pragma once

#include <iosfwd>

#include "occamllm/harness.hpp"
#include "occamllm/run_config.hpp"

namespace occamllm::commands {

/// Writes `dataset.output` (JSONL) and a per-category count table.
void dataset_build(const RunConfig& config, std::ostream& out);

/// Trains a decoder over two stages (with, then without "Answer = " before
/// answers, unless `train.stages` names the stage files), saves the
/// checkpoint and reports progress plus held-out accuracy (metrics.jsonl).
void train_decoder(const RunConfig& config, std::ostream& out);

/// Trains the switch on labeled streams, saves the checkpoint (carrying the
/// decoder of `train.decoder_checkpoint` when set) and reports progress plus
/// held-out token F1 (metrics.jsonl).
void train_switch(const RunConfig& config, std::ostream& out);

/// Scores the benchmark tasks (records.jsonl).
harness::BenchmarkReport bench_run(const RunConfig& config, std::ostream& out);

/// Generates a response for `generate.prompt` (trace.jsonl).
harness::Generation generate(const RunConfig& config, std::ostream& out);

}  // namespace occamllm::commands
