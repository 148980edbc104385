// Copyright 2026 The occamllm Authors
// SPDX-License-Identifier: Apache-2.0
//
// occamllm: dataset builds, training, benchmarks and generation.
//
//   occamllm dataset build CONFIG [--seed N]
//   occamllm train decoder CONFIG [--seed N]
//   occamllm train switch  CONFIG [--seed N]
//   occamllm bench run     CONFIG [--seed N]
//   occamllm generate      CONFIG [--seed N]
//
// Exit codes: 0 success, 1 configuration error, 2 runtime error.

#include <cstdint>
#include <functional>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "occamllm/commands.hpp"
#include "occamllm/errors.hpp"
#include "occamllm/run_config.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

struct Invocation {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::function<void(const occamllm::RunConfig&)> action;
};

CLI::App* leaf(CLI::App* parent, const std::string& name, const std::string& help, Invocation& inv,
               std::function<void(const occamllm::RunConfig&)> action) {
  CLI::App* cmd = parent->add_subcommand(name, help);
  cmd->add_option("config", inv.config_path, "JSON run configuration")->required();
  cmd->add_option("--seed", inv.seed, "Seed for data generation, training and sampling (overrides the config)");
  cmd->callback([&inv, action] { inv.action = action; });
  return cmd;
}

}  // namespace

int main(int argc, char** argv) {
  namespace cmd = occamllm::commands;
  CLI::App app{"Desk-scale OccamNet controller: data, training, benchmarks, generation"};
  app.require_subcommand(1);
  Invocation inv;

  CLI::App* dataset = app.add_subcommand("dataset", "Synthetic datasets");
  dataset->require_subcommand(1);
  leaf(dataset, "build", "Write a JSONL dataset", inv,
       [](const occamllm::RunConfig& c) { cmd::dataset_build(c, std::cout); });

  CLI::App* train = app.add_subcommand("train", "Training runs");
  train->require_subcommand(1);
  leaf(train, "decoder", "Train the weight decoder", inv,
       [](const occamllm::RunConfig& c) { cmd::train_decoder(c, std::cout); });
  leaf(train, "switch", "Train the switch", inv,
       [](const occamllm::RunConfig& c) { cmd::train_switch(c, std::cout); });

  CLI::App* bench = app.add_subcommand("bench", "Benchmarks");
  bench->require_subcommand(1);
  leaf(bench, "run", "Score the arithmetic benchmark", inv,
       [](const occamllm::RunConfig& c) { cmd::bench_run(c, std::cout); });

  leaf(&app, "generate", "Generate one response with switch splicing", inv,
       [](const occamllm::RunConfig& c) { cmd::generate(c, std::cout); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  occamllm::RunConfig config;
  try {
    config = occamllm::load_run_config(inv.config_path);
    if (inv.seed) config.seed = *inv.seed;
  } catch (const occamllm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }
  try {
    inv.action(config);
  } catch (const occamllm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kOk;
}
