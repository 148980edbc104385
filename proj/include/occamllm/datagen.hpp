// Copyright 2026 The occamllm Authors
// SPDX-License-Identifier: Apache-2.0
//
// Synthetic training and evaluation text: arithmetic and word-problem
// prompts with known answers, concatenated query sequences, labeled switch
// streams, and the arithmetic benchmark sets.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "occamllm/occamnet.hpp"

namespace occamllm::datagen {

inline constexpr int kDatasetVersion = 1;

enum class Category { SimpleArith, ComplexArith, SingleStepWord, MultiStepWord, Expression };

std::string_view to_string(Category c);
/// "simple-arith", "complex-arith", "single-step-word", "multi-step-word",
/// "expression". Throws ConfigError otherwise.
Category parse_category(std::string_view name);

/// Role-tagged chat framing for one user turn, ready for the assistant:
/// "<|user|>\n" + user + "\n<|assistant|>\n".
std::string chat(std::string_view user);

/// One question whose answer is a single primitive applied to the most recent
/// numbers of its text (for multi-step problems, of the worked solution).
struct Query {
  Category category = Category::SimpleArith;
  std::string prompt;  // the question as a user would pose it
  std::string math;    // symbolic restatement, e.g. "3 + 85" (arithmetic only)
  std::string worked;  // multi-step: the solution up to the final operation
  Expr expr;           // the answer over the query's own operands x0..
  std::vector<double> operands;  // as they appear in the text, oldest first
  double answer = 0.0;
};

/// The padded operand window `operands` lands in for a net with `n_inputs`
/// inputs, and the query's function rewritten over it.
Expr expr_for_inputs(const Query& q, int n_inputs);

// ---- decoder data ---------------------------------------------------------

struct DecoderDataOptions {
  bool answer_prefix = false;  // first training stage: "Answer = " before answers
  int n_inputs = 2;
  double p_simple = 0.4;       // simple / complex / word (remainder)
  double p_complex = 0.4;
  double p_multistep = 0.5;    // share of word problems that are multi-step
  double p_single = 0.5;       // single chat query vs. concatenated raw queries
  int max_queries = 4;         // concatenations use 2..max_queries queries
};

struct GeneratedExample {
  std::string text;            // ends exactly where the target number starts
  std::vector<double> inputs;  // operands the net receives
  double answer = 0.0;
  std::string category;        // of the final query (or benchmark kind)
  std::uint64_t seed = 0;
  std::string expr;            // Expr::str() over the inputs
  bool padded = false;
  std::vector<int> labels;     // switch streams: one per toy token
  std::string script;          // benchmark items: scripted LM response
  std::string prompt;          // the final query as posed
};

Query sample_query(Category c, std::mt19937_64& rng);

/// A binary arithmetic query ("+", "-", "*", "/", "pow") with the given
/// operand literals in prompt form `form` (0 is the symbolic "A op B = ").
Query arithmetic_query(std::string_view op, std::string_view a, std::string_view b, int form = 0);

/// One decoder example, drawn from the category mix, rendered either as a
/// single chat query or as a concatenation of raw query/answer pairs that
/// never ends on a multi-step problem.
GeneratedExample sample_decoder_example(std::uint64_t seed, const DecoderDataOptions& options = {});

/// Arithmetic over {+,-,*,/} with 1..max_ops operators, precedence and
/// optional parentheses, e.g. "3 + 97 × (-4) = ". The expression is over
/// three inputs; one-operator prompts are padded (a, a, b).
Query sample_expression(std::mt19937_64& rng, int min_ops, int max_ops);

/// A two-layer decoder example: one expression prompt in the chat frame.
GeneratedExample sample_expression_example(std::uint64_t seed, int min_ops = 1, int max_ops = 2,
                                           bool answer_prefix = false);

// ---- switch data ----------------------------------------------------------

struct SwitchStream {
  std::string text;
  std::vector<int> labels;  // per toy token; 1 on the token before each OccamNet number
  int n_marked = 0;         // OccamNet numbers placed by the templates
  std::uint64_t seed = 0;
};

/// Half single arithmetic prompts answered at once; half chat conversations
/// mixing quick arithmetic pairs (25%), curated rule exemplars (70%) and
/// multi-step stubs "The answer is " (5%).
SwitchStream sample_switch_stream(std::uint64_t seed);

/// Number of curated switch exemplars and the `[[...]]` computation points
/// declared in each (used by bookkeeping tests).
int curated_exemplar_count();
int curated_marks(int index);
/// Renders exemplar `index` alone as a one-turn chat stream.
SwitchStream render_exemplar(int index, std::uint64_t seed);

// ---- benchmarks -----------------------------------------------------------

inline constexpr std::string_view kBenchmarkKinds[] = {"add", "sub", "mul", "div", "sqrt", "exp",
                                                       "log", "sin", "cos", "multistep-2layer"};

/// Benchmark items. `digits` applies to add/sub/mul/div/sqrt (3, 5 or 7) and
/// is the maximum operator count (1..3) for "multistep-2layer"; it is
/// ignored elsewhere. Throws ConfigError on a bad kind or digits.
std::vector<GeneratedExample> build_benchmark(std::string_view kind, int digits, int n, std::uint64_t seed);

// ---- dataset files --------------------------------------------------------

/// One JSON object per line: text, inputs, answer, category, seed, version,
/// expr, padded, and labels / script / prompt when present.
void write_jsonl(std::ostream& out, const std::vector<GeneratedExample>& examples);
void save_jsonl(const std::string& path, const std::vector<GeneratedExample>& examples);
/// Throws FormatError naming the line on malformed records or a version mismatch.
std::vector<GeneratedExample> read_jsonl(std::istream& in, const std::string& what = "dataset");
std::vector<GeneratedExample> load_jsonl(const std::string& path);

}  // namespace occamllm::datagen
