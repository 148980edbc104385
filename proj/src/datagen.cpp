// Copyright 2026 The occamllm Authors
// SPDX-License-Identifier: Apache-2.0

#include "occamllm/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "occamllm/calculator.hpp"
#include "occamllm/errors.hpp"
#include "occamllm/primitive.hpp"
#include "occamllm/seed.hpp"
#include "occamllm/textio.hpp"
#include "occamllm/toy_encoder.hpp"

namespace occamllm::datagen {
namespace {

using Rng = std::mt19937_64;

int uniform_int(Rng& rng, long long lo, long long hi) {
  return static_cast<int>(std::uniform_int_distribution<long long>(lo, hi)(rng));
}
double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
bool coin(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }
template <typename T>
const T& pick(Rng& rng, const std::vector<T>& v) {
  return v[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<long long>(v.size()) - 1))];
}

// A number as printed, with the value that printing denotes.
struct Num {
  double value = 0.0;
  std::string text;
};

Num parse_back(std::string text) {
  if (text.size() > 1 && text[0] == '-' && std::strtod(text.c_str(), nullptr) == 0.0) text.erase(0, 1);
  return {std::strtod(text.c_str(), nullptr), text};
}

Num fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return parse_back(buf);
}

Num integer(long long v) { return {static_cast<double>(v), std::to_string(v)}; }

// Plain rendering of a computed value: integer, else 3 decimals.
Num plain(double v) {
  textio::FormatOptions opts;
  opts.suffix = "";
  return parse_back(*textio::format_output(v, opts));
}

// Negative operands are parenthesized right after a symbolic operator.
std::string after_op(const Num& n) { return n.value < 0 ? "(" + n.text + ")" : n.text; }

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
  for (std::size_t p = s.find(from); p != std::string::npos; p = s.find(from, p + to.size())) {
    s.replace(p, from.size(), to);
  }
  return s;
}

double apply_op(std::string_view op, std::span<const double> args) {
  return primitives::by_name(op).apply(args).value_or(std::nan(""));
}

double eval_expr(const Expr& e, std::span<const double> inputs) {
  if (e.op.empty()) return inputs[static_cast<std::size_t>(e.input)];
  std::vector<double> args;
  for (const Expr& a : e.args) args.push_back(eval_expr(a, inputs));
  return apply_op(e.op, args);
}

// Rewrites the leaves of `e` from a query's own operands to the window of the
// last `n_inputs` numbers.
Expr shift_leaves(const Expr& e, int offset) {
  if (e.op.empty()) return Expr::leaf(e.input + offset);
  Expr out = e;
  for (Expr& a : out.args) a = shift_leaves(a, offset);
  return out;
}

// ---- template engine --------------------------------------------------------
//
// Variable specs, space separated and evaluated in order:
//   a:i:LO:HI    uniform integer, LO/HI arithmetic over earlier variables
//   a:f2:LO:HI   uniform real printed with 2 decimals (f1, f3 likewise)
//   a:c:4,5,10   uniform choice among literals
//   a=EXPR       derived value, printed as an integer or with 3 decimals
//   a=EXPR;D     derived value printed with D decimals
// Text placeholders: {a} prints a; [[a]] prints a as the symbolic engine would
// emit it (marking the position for the switch).

class Scope {
 public:
  const Num* find(std::string_view name) const {
    for (const auto& [n, v] : vars_) {
      if (n == name) return &v;
    }
    return nullptr;
  }
  const Num& at(std::string_view name) const {
    const Num* v = find(name);
    if (v == nullptr) throw std::logic_error("template variable '" + std::string(name) + "' is undefined");
    return *v;
  }
  void set(std::string name, Num value) { vars_.emplace_back(std::move(name), std::move(value)); }

  double eval(std::string_view expr) const {
    std::string s;
    for (std::size_t i = 0; i < expr.size();) {
      if (std::isalpha(static_cast<unsigned char>(expr[i])) || expr[i] == '_') {
        std::size_t j = i;
        while (j < expr.size() && (std::isalnum(static_cast<unsigned char>(expr[j])) || expr[j] == '_')) ++j;
        const std::string_view name = expr.substr(i, j - i);
        if (const Num* v = find(name)) {
          char buf[64];
          std::snprintf(buf, sizeof buf, "(%.17g)", v->value);
          s += buf;
        } else {
          s += name;
        }
        i = j;
      } else {
        s += expr[i++];
      }
    }
    const auto v = calc::evaluate_prompt(s);
    if (!v) throw std::logic_error("template expression '" + std::string(expr) + "' does not evaluate");
    return *v;
  }

 private:
  std::vector<std::pair<std::string, Num>> vars_;
};

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      if (i > start) out.emplace_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

void sample_vars(std::string_view spec, Rng& rng, Scope& scope) {
  for (const std::string& item : split(spec, ' ')) {
    const auto eq = item.find('=');
    if (eq != std::string::npos) {
      std::string expr = item.substr(eq + 1);
      int decimals = -1;
      if (const auto semi = expr.find(';'); semi != std::string::npos) {
        decimals = std::stoi(expr.substr(semi + 1));
        expr.resize(semi);
      }
      const double v = scope.eval(expr);
      scope.set(item.substr(0, eq), decimals < 0 ? plain(v) : fixed(v, decimals));
      continue;
    }
    const std::vector<std::string> parts = split(item, ':');
    if (parts.size() < 3) throw std::logic_error("bad template variable '" + item + "'");
    const std::string& kind = parts[1];
    if (kind == "c") {
      scope.set(parts[0], parse_back(pick(rng, split(parts[2], ','))));
      continue;
    }
    if (parts.size() != 4) throw std::logic_error("bad template variable '" + item + "'");
    const double lo = scope.eval(parts[2]), hi = scope.eval(parts[3]);
    if (kind == "i") {
      scope.set(parts[0], integer(uniform_int(rng, std::llround(lo), std::llround(hi))));
    } else if (kind.size() == 2 && kind[0] == 'f') {
      scope.set(parts[0], fixed(uniform(rng, lo, hi), kind[1] - '0'));
    } else {
      throw std::logic_error("bad template variable kind '" + kind + "'");
    }
  }
}

struct Rendered {
  std::string text;
  std::vector<std::size_t> marks;  // byte offsets of symbolic-engine numbers
};

void render(std::string_view tpl, const Scope& scope, Rendered& out) {
  for (std::size_t i = 0; i < tpl.size();) {
    if (tpl.substr(i, 2) == "[[") {
      const auto close = tpl.find("]]", i);
      const Num& v = scope.at(tpl.substr(i + 2, close - i - 2));
      out.marks.push_back(out.text.size());
      out.text += *textio::format_output(v.value);
      i = close + 2;
    } else if (tpl[i] == '{') {
      const auto close = tpl.find('}', i);
      out.text += scope.at(tpl.substr(i + 1, close - i - 1)).text;
      i = close + 1;
    } else {
      out.text += tpl[i++];
    }
  }
}

int count_marks(std::string_view tpl) {
  int n = 0;
  for (std::size_t p = tpl.find("[["); p != std::string_view::npos; p = tpl.find("[[", p + 2)) ++n;
  return n;
}

// ---- arithmetic queries -----------------------------------------------------

struct Form {
  const char* text;  // {A}, {B} operands; {Bo} is B after a symbolic operator
  bool reversed;     // operands appear as (B, A)
};

const std::vector<Form>& binary_forms(std::string_view op) {
  static const std::vector<Form> add{{"{A} + {Bo} = ", false},       {"{A}+{Bo}=", false},
                                     {"What is {A} + {Bo}?", false}, {"What is {A} plus {B}?", false},
                                     {"Calculate {A} + {Bo}.", false}, {"Add {A} and {B}.", false},
                                     {"What is the sum of {A} and {B}?", false}};
  static const std::vector<Form> sub{{"{A} - {Bo} = ", false},
                                     {"{A}-{Bo}=", false},
                                     {"What is {A} - {Bo}?", false},
                                     {"What is {A} minus {B}?", false},
                                     {"Calculate {A} - {Bo}.", false},
                                     {"What is the difference between {A} and {B}?", false},
                                     {"Subtract {B} from {A}.", true}};
  static const std::vector<Form> mul{{"{A} * {Bo} = ", false},       {"{A} \xC3\x97 {Bo} = ", false},
                                     {"{A} x {Bo} = ", false},       {"{A}*{Bo}=", false},
                                     {"What is {A} times {B}?", false}, {"Multiply {A} by {B}.", false},
                                     {"What is the product of {A} and {B}?", false}};
  static const std::vector<Form> div{{"{A} / {Bo} = ", false},
                                     {"{A} \xC3\xB7 {Bo} = ", false},
                                     {"{A}/{Bo}=", false},
                                     {"{A} / {Bo} = Give the answer in decimals.", false},
                                     {"What is {A} divided by {B}?", false},
                                     {"Divide {A} by {B}.", false},
                                     {"What is the quotient of {A} and {B}?", false}};
  static const std::vector<Form> pow{{"{A}^{Bo} = ", false},
                                     {"{A}**{Bo} = ", false},
                                     {"What is {A} to the power of {B}?", false},
                                     {"Calculate {A}^{Bo}.", false},
                                     {"{A} raised to the power {B} = ", false}};
  if (op == "+") return add;
  if (op == "-") return sub;
  if (op == "*") return mul;
  if (op == "/") return div;
  return pow;
}

const std::vector<const char*>& unary_forms(std::string_view op) {
  static const std::vector<const char*> sqrt{"sqrt({A}) = ", "\xE2\x88\x9A{A} = ", "What is the square root of {A}?",
                                             "Compute sqrt({A})."};
  static const std::vector<const char*> log{"log({A}) = ", "ln({A}) = ", "What is the natural logarithm of {A}?",
                                            "Compute log({A})."};
  static const std::vector<const char*> exp{"exp({A}) = ", "What is exp({A})?", "Compute the exponential of {A}."};
  static const std::vector<const char*> sin{"sin({A}) = ", "sin({A} rad) = ", "What is the sine of {A}?",
                                            "Compute sin({A})."};
  static const std::vector<const char*> cos{"cos({A}) = ", "cos({A} rad) = ", "What is the cosine of {A}?",
                                            "Compute cos({A})."};
  if (op == "sqrt") return sqrt;
  if (op == "log") return log;
  if (op == "exp") return exp;
  if (op == "sin") return sin;
  return cos;
}

std::string op_symbol(std::string_view op) {
  if (op == "*") return "\xC3\x97";
  if (op == "pow") return "^";
  return std::string(op);
}

Query binary_query(Category c, std::string_view op, const Num& a, const Num& b, const Form& form) {
  Query q;
  q.category = c;
  std::string text = replace_all(form.text, "{A}", a.text);
  text = replace_all(text, "{Bo}", after_op(b));
  q.prompt = replace_all(text, "{B}", b.text);
  q.math = a.text + (op == "pow" ? "^" : " " + op_symbol(op) + " ") + after_op(b);
  q.operands = form.reversed ? std::vector<double>{b.value, a.value} : std::vector<double>{a.value, b.value};
  q.expr = form.reversed ? Expr::node(std::string(op), {Expr::leaf(1), Expr::leaf(0)})
                         : Expr::node(std::string(op), {Expr::leaf(0), Expr::leaf(1)});
  q.answer = apply_op(op, std::vector<double>{a.value, b.value});
  return q;
}

Query unary_query(std::string_view op, const Num& a, const char* form) {
  Query q;
  q.category = Category::ComplexArith;
  q.prompt = replace_all(form, "{A}", a.text);
  q.math = std::string(op) + "(" + a.text + ")";
  q.operands = {a.value};
  q.expr = Expr::node(std::string(op), {Expr::leaf(0)});
  q.answer = apply_op(op, q.operands);
  return q;
}

Num simple_operand(Rng& rng, int range) {
  switch (range) {
    case 0: return integer(uniform_int(rng, -10, 10));
    case 1: return integer(uniform_int(rng, -100, 100));
    case 2: return integer(uniform_int(rng, -1000, 1000));
    case 3: return integer(uniform_int(rng, -20000, 20000));
    case 4: return fixed(uniform(rng, -1.0, 1.0), uniform_int(rng, 2, 3));
    default: return fixed(uniform(rng, -1000.0, 1000.0), uniform_int(rng, 1, 2));
  }
}

Query simple_query(Rng& rng) {
  static const std::vector<std::string> ops{"+", "-", "*", "/"};
  const std::string& op = pick(rng, ops);
  const int range = uniform_int(rng, 0, 5);
  const Num a = simple_operand(rng, range);
  Num b = simple_operand(rng, range);
  while (op == "/" && b.value == 0.0) b = simple_operand(rng, range);
  return binary_query(Category::SimpleArith, op, a, b, pick(rng, binary_forms(op)));
}

// sqrt and log: integers in [1,100] or [1,20000], reals in [0.01,100] or
// [0.01,20000]; exp and the trig functions on [-10,10].
Num positive_operand(Rng& rng) {
  const double hi = coin(rng, 0.5) ? 100.0 : 20000.0;
  if (coin(rng, 0.5)) return integer(uniform_int(rng, 1, static_cast<long long>(hi)));
  Num n;
  do n = fixed(uniform(rng, 0.01, hi), 2);
  while (n.value <= 0.0);
  return n;
}

Num signed_ten(Rng& rng) { return coin(rng, 0.5) ? integer(uniform_int(rng, -10, 10)) : fixed(uniform(rng, -10, 10), 2); }

Query complex_query(Rng& rng) {
  static const std::vector<std::string> ops{"sqrt", "pow", "log", "exp", "sin", "cos"};
  const std::string& op = pick(rng, ops);
  if (op == "pow") {
    const Num base = coin(rng, 0.5) ? integer(uniform_int(rng, 1, 25)) : fixed(uniform(rng, 0.1, 25.0), 1);
    const Num e = integer(uniform_int(rng, -6, 6));
    return binary_query(Category::ComplexArith, op, base, e, pick(rng, binary_forms(op)));
  }
  const Num a = op == "sqrt" || op == "log" ? positive_operand(rng) : signed_ten(rng);
  return unary_query(op, a, pick(rng, unary_forms(op)));
}

// ---- word problems ------------------------------------------------------------

struct WordTemplate {
  const char* vars;
  const char* prompt;
  const char* worked;  // empty for single-step problems
  const char* op;
  const char* lhs;
  const char* rhs;
};

const std::vector<WordTemplate>& single_step_templates() {
  static const std::vector<WordTemplate> t{
      {"a:i:2:60 b:i:2:40", "Sam has {a} apples. He buys {b} more. How many apples does he have now?", "", "+", "a", "b"},
      {"a:i:2:90 b:i:2:50", "There are {a} birds on a tree and {b} more birds join them. How many birds are there in total?", "", "+", "a", "b"},
      {"a:i:50:900 b:i:5:200", "A library had {a} books and received {b} new books. How many books does it have now?", "", "+", "a", "b"},
      {"a:i:5:99 b:i:5:99", "Maria scored {a} points and then gained {b} more points. What is her total?", "", "+", "a", "b"},
      {"a:i:3:80 b:i:2:30", "A farmer has {a} cows and bought {b} additional cows. How many cows does the farmer have?", "", "+", "a", "b"},
      {"a:f1:0.5:20 b:f1:0.5:20", "Jo walked {a} km on Monday and another {b} km on Tuesday. How far did Jo walk altogether?", "", "+", "a", "b"},
      {"a:f1:1:80 b:f1:0.5:40", "A tank holds {a} liters of water. {b} liters are added. How much water is in the tank?", "", "+", "a", "b"},
      {"a:i:10:500 b:i:1:200", "A jar has {a} coins. Sue puts in {b} more coins. How many coins are in the jar in total?", "", "+", "a", "b"},
      {"a:i:5:90 b:i:1:a-1", "Tom had {a} candies and ate {b} of them. How many candies are left?", "", "-", "a", "b"},
      {"a:i:10:300 b:i:1:a-1", "A store had {a} shirts and sold {b}. How many shirts remain?", "", "-", "a", "b"},
      {"a:f2:5:100 b:f2:0.5:a", "Lily has {a} dollars and spends {b} dollars on a book. How much money is left?", "", "-", "a", "b"},
      {"a:i:10:60 b:i:1:a-1", "There were {a} people on a bus and {b} of them left at the first stop. How many people are still on the bus?", "", "-", "a", "b"},
      {"a:i:5:80 b:i:1:a-1", "Ben had {a} marbles and lost {b}. How many marbles does he have now?", "", "-", "a", "b"},
      {"a:f1:5:50 b:f1:0.5:a", "A rope of {a} meters has {b} meters cut away. How long is the rope now?", "", "-", "a", "b"},
      {"a:i:-5:30 b:i:1:20", "The temperature was {a} degrees and decreased by {b} degrees. What is the temperature now?", "", "-", "a", "b"},
      {"a:i:10:90 b:i:1:a-1", "Take {b} away from {a}. What is left?", "", "-", "a", "b"},
      {"a:i:2:50 b:i:2:20", "Each box holds {a} pencils. How many pencils are in {b} boxes?", "", "*", "a", "b"},
      {"a:f2:0.5:30 b:i:2:12", "Each ticket costs {a} dollars. What do {b} tickets cost?", "", "*", "a", "b"},
      {"a:i:2:30 b:i:2:30", "There are {a} rows of chairs with {b} chairs in each row. How many chairs are there?", "", "*", "a", "b"},
      {"a:i:20:120 b:i:2:9", "A car travels {a} km per hour. How far does it travel in {b} hours?", "", "*", "a", "b"},
      {"a:i:3:60 b:i:2:30", "Jenny reads {a} pages each day for {b} days. How many pages does she read?", "", "*", "a", "b"},
      {"a:f1:0.5:10 b:i:2:20", "Each bag has {a} kg of rice. How much rice is in {b} bags?", "", "*", "a", "b"},
      {"a:i:2:15 b:i:2:25", "A garden has {a} rows with {b} plants in each row. How many plants are there?", "", "*", "a", "b"},
      {"b:i:2:9 k:i:2:15 a=b*k", "{a} cookies are shared equally among {b} kids. How many cookies does each kid get?", "", "/", "a", "b"},
      {"a:f1:2:50 b:i:2:8", "A {a} meter rope is split into {b} pieces of equal length. How long is each piece?", "", "/", "a", "b"},
      {"b:i:2:9 k:i:2:12 a=b*k", "{a} students are divided into {b} teams. How many students are in each team?", "", "/", "a", "b"},
      {"a:f2:8:60 b:i:2:6", "A pizza costs {a} dollars and is shared by {b} friends. How much does each friend pay?", "", "/", "a", "b"},
      {"b:i:2:9 k:i:2:20 a=b*k", "There are {a} apples to pack evenly into {b} bags. How many apples go in each bag?", "", "/", "a", "b"},
      {"a:f1:1:30 b:i:2:12", "{a} liters of juice are poured evenly into {b} bottles. How much juice is in each bottle?", "", "/", "a", "b"},
      {"b:i:2:10 k:i:5:40 a=b*k", "A team scored {a} points in {b} games. What is the average per game?", "", "/", "a", "b"},
  };
  return t;
}

const std::vector<WordTemplate>& multi_step_templates() {
  static const std::vector<WordTemplate> t{
      {"a:i:10:60 b:i:1:a-2 c:f2:1:100 w=a-b",
       "Mike had {a} video games but {b} of them weren't working. If he wanted to sell the working games for {c} each, how much money could he earn?",
       "Mike had {a} video games. {b} weren't working, so he had {a} - {b} = [[w]]He can sell {w} games for {c} each. {w} x {c} = ",
       "*", "w", "c"},
      {"k:i:2:6 q:i:2:15 s=k*q b:i:1:s-1 a=s-b",
       "Sam has {a} apples and buys {b} more. He then shares them equally among {k} friends. How many apples does each friend get?",
       "Sam has {a} + {b} = [[s]]Shared among {k} friends, each gets {s} / {k} = ", "/", "s", "k"},
      {"p:i:1:9 n:i:2:9 c=n*p h:c:100",
       "A shop sells pens for {p} dollars each. Ann buys {n} pens and pays with a {h} dollar bill. How much change does she get?",
       "The pens cost {n} \xC3\x97 {p} = [[c]]Her change is {h} - {c} = ", "-", "h", "c"},
      {"r:i:2:20 c:i:2:20 s=r*c t:i:1:s-1",
       "There are {r} rows of {c} seats in a hall and {t} seats are taken. How many seats are free?",
       "There are {r} \xC3\x97 {c} = [[s]]Free seats: {s} - {t} = ", "-", "s", "t"},
      {"k:i:2:8 q:i:3:20 s=k*q a:i:1:s-1 b=s-a",
       "A baker makes {a} muffins in the morning and {b} in the afternoon. He packs them in boxes of {k}. How many boxes does he fill?",
       "He makes {a} + {b} = [[s]]Packed in boxes of {k}, that is {s} / {k} = ", "/", "s", "k"},
      {"w:i:8:30 h:i:2:10 e=w*h s:i:1:e-1",
       "Jane earns {w} dollars per hour and works {h} hours. She spends {s} dollars. How much does she have left?",
       "Jane earns {w} \xC3\x97 {h} = [[e]]After spending {s}, she has {e} - {s} = ", "-", "e", "s"},
      {"j:i:2:9 d=100*j f:f1:4:12",
       "A car uses {f} liters of fuel per 100 km. How much fuel does it need for {d} km?",
       "The trip is {d} / 100 = [[j]]The car needs {j} \xC3\x97 {f} = ", "*", "j", "f"},
      {"a:i:10:80 b:i:1:a-1 r=a-b c:i:1:40",
       "Tim had {a} stickers. He gave {b} to his sister and then bought {c} more. How many stickers does Tim have now?",
       "After giving {b} away, Tim had {a} - {b} = [[r]]Then he bought {c} more: {r} + {c} = ", "+", "r", "c"},
      {"g:i:2:6 k:i:2:10 n=g*k b:i:2:9",
       "A class of {n} students is split into groups of {g}. Each group gets {b} balls. How many balls are given out?",
       "There are {n} / {g} = [[k]]Each gets {b} balls, so {k} \xC3\x97 {b} = ", "*", "k", "b"},
      {"l:i:3:40 w:i:2:30 s=l+w t:c:2 p=t*s c:f2:1:20",
       "A garden is {l} meters long and {w} meters wide. Fencing costs {c} dollars per meter. How much does fencing the whole perimeter cost?",
       "Length and width add up to {l} + {w} = [[s]]The perimeter is {t} \xC3\x97 {s} = [[p]]The cost is {p} \xC3\x97 {c} = ",
       "*", "p", "c"},
  };
  return t;
}

struct WordInstance {
  Scope scope;
  Rendered prompt;
  Rendered worked;
};

WordInstance instantiate(const WordTemplate& t, Rng& rng) {
  WordInstance w;
  sample_vars(t.vars, rng, w.scope);
  render(t.prompt, w.scope, w.prompt);
  render(t.worked, w.scope, w.worked);
  std::vector<double> args{w.scope.at(t.lhs).value};
  if (*t.rhs != '\0') args.push_back(w.scope.at(t.rhs).value);
  w.scope.set("__ans", Num{apply_op(t.op, args), ""});
  return w;
}

// The final operation over the last numbers of `text`, checked against the
// template's declared operands.
Query word_query(Category c, const WordTemplate& t, const WordInstance& w) {
  Query q;
  q.category = c;
  q.prompt = w.prompt.text;
  q.worked = w.worked.text;
  const std::string all = q.prompt + " " + q.worked;
  const double lhs = w.scope.at(t.lhs).value;
  const auto spans = textio::extract_numbers(all);
  if (*t.rhs == '\0') {
    if (spans.empty() || spans.back().value != lhs) throw std::logic_error("word template operand mismatch: " + all);
    q.operands = {lhs};
    q.expr = Expr::node(t.op, {Expr::leaf(0)});
  } else {
    const double rhs = w.scope.at(t.rhs).value;
    if (spans.size() < 2) throw std::logic_error("word template operand mismatch: " + all);
    const double x0 = spans[spans.size() - 2].value, x1 = spans.back().value;
    q.operands = {x0, x1};
    if (x0 == lhs && x1 == rhs) {
      q.expr = Expr::node(t.op, {Expr::leaf(0), Expr::leaf(1)});
    } else if (x0 == rhs && x1 == lhs) {
      q.expr = Expr::node(t.op, {Expr::leaf(1), Expr::leaf(0)});
    } else {
      throw std::logic_error("word template operand mismatch: " + all);
    }
  }
  q.answer = w.scope.at("__ans").value;
  return q;
}

// ---- switch exemplars -----------------------------------------------------------

struct Exemplar {
  const char* vars;
  const char* user;
  const char* assistant;
};

// Cases: plain operations (1), restating an earlier result (2), rounding (3),
// operations nested in a larger expression (4), unit knowledge (5),
// percentages (6), fractions of a quantity (7), sums of three or more terms (8).
const std::vector<Exemplar>& curated() {
  static const std::vector<Exemplar> x{
      {"a:f1:1:20 b:i:2:15 p=a*b;1 r=p;0",
       "An author writes {a} pages per session. After {b} sessions, how many pages has the author written?",
       "The author writes {a} pages per session. After {b} sessions, the author will have written {a} \xC3\x97 {b} = [[p]]That is {p} pages. The answer is {r}."},
      {"a:i:3:40 b:i:2:12 p=a*b",
       "A baker makes {a} loaves each hour. How many loaves does the baker make in {b} hours?",
       "In {b} hours the baker makes {a} * {b} = [[p]]So the baker makes {p} loaves."},
      {"a:i:2:90 b:i:2:90 s=a+b", "Sam has {a} marbles and finds {b} more. How many marbles does Sam have?",
       "Sam has {a} + {b} = [[s]]The answer is {s}."},
      {"a:f2:5:60 b:f1:0.5:4 d=a-b;2 r=d;0",
       "A rope is {a} meters long and {b} meters are cut off. How long is the rope now?",
       "The rope is now {a} - {b} = [[d]]Rounded, that is about {r} meters."},
      {"b:i:2:9 k:i:2:12 a=b*k",
       "{a} cookies are shared equally among {b} friends. How many cookies does each friend get?",
       "Each friend gets {a} / {b} = [[k]]So each friend gets {k} cookies."},
      {"a:i:20:120 b:f1:1:8 d=a*b;1", "A car travels at {a} km per hour for {b} hours. How far does it go?",
       "Distance is speed times time: {a} x {b} = [[d]]The car goes {d} km."},
      {"a:i:2:30 b:i:2:12 c:i:2:12 m=b*c t=a+m",
       "I have {a} oranges and {b} trees with {c} apples each. How much fruit do I have?",
       "You have {a} oranges and {b} \xC3\x97 {c} = [[m]]apples. In total that is {a} + ({b} \xC3\x97 {c}) = {a} + {m} = [[t]]pieces of fruit."},
      {"a:i:2:50 b:i:2:12 c:i:2:12 m=b*c t=a+m", "What is {a} + {b} \xC3\x97 {c}?",
       "First, {b} \xC3\x97 {c} = [[m]]Then {a} + {m} = [[t]]So {a} + {b} \xC3\x97 {c} = {t}."},
      {"a:i:2:30 b:i:2:30 c:i:2:9 s=a+b t=s*c", "Compute ({a} + {b}) \xC3\x97 {c}.",
       "({a} + {b}) \xC3\x97 {c} = {s} \xC3\x97 {c} = [[t]]"},
      {"n:i:2:20 p:i:1:40 c=n*5 t=c+p", "Ann has {n} nickels and {p} pennies. How many cents does she have?",
       "{n} nickels is {c} pennies. {c} + {p} = [[t]]She has {t} cents."},
      {"h:i:1:3 m:i:1:59 hm=h*60 t=hm+m", "A movie lasts {h} hours and {m} minutes. How many minutes is that?",
       "{h} hours is {hm} minutes, and {hm} + {m} = [[t]]"},
      {"k:i:2:9 m:i:10:900 km=k*1000 t=km+m",
       "Tom runs {k} kilometers and then {m} more meters. How many meters does he run?",
       "{k} kilometers is {km} meters, so he runs {km} + {m} = [[t]]"},
      {"p:i:5:95 v:f2:10:500 f=p/100;2 r=f*v;2 r2=f*v", "What is {p}% of {v}?",
       "{p}% of {v} = {r}. To see this, {p} / 100 = [[f]]and {f} \xC3\x97 {v} = [[r2]]"},
      {"v:f2:10:200 p:i:5:60 f=p/100;2 d=f*v dd=d;2",
       "A shirt costs {v} dollars and is {p}% off. How much is the discount?",
       "The discount is {p}% of {v}. {p} / 100 = [[f]]and {f} \xC3\x97 {v} = [[d]]So the discount is {dd} dollars."},
      {"p:c:10,20,25,50 j:i:1:10 n=j*20 w=n*p/100",
       "{p} percent of the {n} students walk to school. How many students walk?",
       "{p} percent of {n} is {w} students."},
      {"den:c:2,3,4,5 q:i:2:10 n=den*q num:i:1:den-1 g=num*q b=n-g",
       "A class has {n} students and {num}/{den} of them are girls. How many boys are there?",
       "{num}/{den} of {n} is {g}. So there are {n} - {g} = [[b]]boys."},
      {"den:c:2,3,4,5,7 q:i:2:8 r=den*q e:i:1:20 a=r+e num:i:1:den-1 g=num*q k=r-g",
       "Paul had {a} apples and ate {e} of them. He gave {num}/{den} of the rest away. How many apples does he have left?",
       "Paul had {a} - {e} = [[r]]apples after eating. {num}/{den} of {r} is {g}, so he has {r} - {g} = [[k]]"},
      {"den:c:2,4,5,10 q:i:2:30 n=den*q num:i:1:den-1 g=num*q", "What is {num}/{den} of {n}?",
       "{num}/{den} of {n} is {g}."},
      {"a:i:1:9 b:i:1:9 c:i:1:9 s=a+b+c n:i:2:12 t=s*n",
       "A box holds {a} red, {b} blue and {c} green balls. There are {n} boxes. How many balls are there?",
       "Each box has {a} + {b} + {c} = {s} balls, and {s} \xC3\x97 {n} = [[t]]"},
      {"a:i:1:50 b:i:1:50 c:i:1:50 s=a+b+c", "What is {a} + {b} + {c}?", "{a} + {b} + {c} = {s}."},
      {"a:i:0:30 b:i:0:30 c:i:0:30 s=a+b+c",
       "Tim scored {a}, {b} and {c} points in three games. What was his total?",
       "{a} + {b} + {c} = {s} points."},
      {"a:i:3:9 b:i:2:9 s=a+b c:f2:10:200 m=s*c mm=m;2",
       "Kate bought {a} red and {b} blue notebooks at {c} dollars each. How much did she spend?",
       "Kate bought {a} + {b} = [[s]]notebooks. {s} x {c} is [[m]]So she spent {mm} dollars."},
      {"s:i:2:40 A=s*s", "A square garden has an area of {A} square meters. How long is each side?",
       "Each side is sqrt({A}) = [[s]]meters long."},
      {"r:f1:1:9 e:c:3 v=r^e", "A cube has edges of {r} cm. What is its volume?",
       "The volume is {r}^{e} = [[v]]cubic cm."},
      {"a:i:100:999 b:i:100:999 s=a+b r=s/100;0 rr=r*100",
       "A school raised {a} dollars in May and {b} dollars in June. About how much did it raise, to the nearest hundred?",
       "{a} + {b} = [[s]]To the nearest hundred, that is about {rr} dollars."},
  };
  return x;
}

// A user/assistant pair and where the symbolic engine's numbers start.
struct Pair {
  std::string user;
  Rendered assistant;
};

Pair exemplar_pair(int index, Rng& rng) {
  const int n_curated = static_cast<int>(curated().size());
  Pair p;
  if (index < n_curated) {
    const Exemplar& e = curated()[index];
    Scope scope;
    sample_vars(e.vars, rng, scope);
    Rendered user;
    render(e.user, scope, user);
    p.user = user.text;
    render(e.assistant, scope, p.assistant);
  } else {
    const WordTemplate& t = multi_step_templates()[index - n_curated];
    WordInstance w = instantiate(t, rng);
    p.user = w.prompt.text;
    render(std::string(t.worked) + "[[__ans]]", w.scope, p.assistant);
  }
  return p;
}

enum class Style { Direct, AnswerPrefix, Restate };

// The scripted assistant's answer style is a function of how the question is
// posed: "... =" prompts are answered at once, questions by restating the
// expression, instructions with "Answer = ".
Style style_for(const Query& q) {
  if (q.prompt.find('=') != std::string::npos) return Style::Direct;
  if (q.prompt.rfind("What", 0) == 0) return Style::Restate;
  return Style::AnswerPrefix;
}

Query switch_arith_query(Rng& rng, bool direct_only) {
  for (;;) {
    Query q = coin(rng, 0.6) ? simple_query(rng) : complex_query(rng);
    if (!direct_only || style_for(q) == Style::Direct) return q;
  }
}

Pair arith_pair(Rng& rng, bool direct_only) {
  const Query q = switch_arith_query(rng, direct_only);
  Pair p;
  p.user = q.prompt;
  Scope scope;
  scope.set("ans", Num{q.answer, ""});
  switch (style_for(q)) {
    case Style::Direct: render("[[ans]]", scope, p.assistant); break;
    case Style::AnswerPrefix: render("Answer = [[ans]]", scope, p.assistant); break;
    case Style::Restate: render(q.math + " = [[ans]]", scope, p.assistant); break;
  }
  return p;
}

SwitchStream assemble(const std::vector<Pair>& pairs, std::uint64_t seed) {
  SwitchStream s;
  s.seed = seed;
  std::vector<std::size_t> marks;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    s.text += chat(pairs[i].user);
    for (std::size_t m : pairs[i].assistant.marks) marks.push_back(s.text.size() + m);
    s.text += pairs[i].assistant.text;
    if (i + 1 < pairs.size()) s.text += "\n";
  }
  const std::vector<Token> tokens = tokenize(s.text);
  s.labels.assign(tokens.size(), 0);
  for (std::size_t m : marks) {
    const auto it = std::find_if(tokens.begin(), tokens.end(), [m](const Token& t) { return t.end == m; });
    if (it == tokens.end()) throw std::logic_error("no token ends where a computed number starts");
    s.labels[static_cast<std::size_t>(it - tokens.begin())] = 1;
  }
  s.n_marked = static_cast<int>(marks.size());
  return s;
}

Num digits_operand(Rng& rng, int digits) {
  const long long lo = static_cast<long long>(std::pow(10.0, digits - 1)), hi = lo * 10 - 1;
  return integer(uniform_int(rng, lo, hi));
}

Num signed_digits(Rng& rng, int digits) {
  Num n = digits_operand(rng, digits);
  if (coin(rng, 0.5)) n = integer(-static_cast<long long>(n.value));
  return n;
}

// A deliberately imprecise answer for the scripted language model: two
// significant digits, nudged when that would already be a match.
std::string rough_answer(double truth) {
  if (!std::isfinite(truth)) return "0";
  const double mag = truth == 0.0 ? 1.0 : std::pow(10.0, std::floor(std::log10(std::abs(truth))) - 1);
  double v = std::round(truth / mag) * mag;
  const int decimals = std::clamp(static_cast<int>(-std::floor(std::log10(mag))), 0, 12);
  std::string text = fixed(v, decimals).text;
  if (textio::score_response(text, truth).correct) text = fixed(v + mag, decimals).text;
  return text;
}

}  // namespace

std::string_view to_string(Category c) {
  switch (c) {
    case Category::SimpleArith: return "simple-arith";
    case Category::ComplexArith: return "complex-arith";
    case Category::SingleStepWord: return "single-step-word";
    case Category::MultiStepWord: return "multi-step-word";
    case Category::Expression: return "expression";
  }
  return "?";
}

Category parse_category(std::string_view name) {
  for (Category c : {Category::SimpleArith, Category::ComplexArith, Category::SingleStepWord,
                     Category::MultiStepWord, Category::Expression}) {
    if (to_string(c) == name) return c;
  }
  throw ConfigError("unknown category '" + std::string(name) + "'");
}

std::string chat(std::string_view user) { return "<|user|>\n" + std::string(user) + "\n<|assistant|>\n"; }

Expr expr_for_inputs(const Query& q, int n_inputs) {
  const int k = static_cast<int>(q.operands.size());
  if (k > n_inputs) throw ConfigError("query needs more inputs than the net provides");
  return shift_leaves(q.expr, n_inputs - k);
}

Query sample_query(Category c, std::mt19937_64& rng) {
  switch (c) {
    case Category::SimpleArith: return simple_query(rng);
    case Category::ComplexArith: return complex_query(rng);
    case Category::SingleStepWord: {
      const WordTemplate& t = pick(rng, single_step_templates());
      return word_query(c, t, instantiate(t, rng));
    }
    case Category::MultiStepWord: {
      const WordTemplate& t = pick(rng, multi_step_templates());
      return word_query(c, t, instantiate(t, rng));
    }
    case Category::Expression: return sample_expression(rng, 1, 2);
  }
  throw ConfigError("unknown category");
}

Query arithmetic_query(std::string_view op, std::string_view a, std::string_view b, int form) {
  if (op != "+" && op != "-" && op != "*" && op != "/" && op != "pow") {
    throw ConfigError("no prompt forms for '" + std::string(op) + "'");
  }
  const auto& forms = binary_forms(op);
  const Num x = parse_back(std::string(a)), y = parse_back(std::string(b));
  return binary_query(op == "pow" ? Category::ComplexArith : Category::SimpleArith, op, x, y,
                      forms[static_cast<std::size_t>(form) % forms.size()]);
}

namespace {

Category draw_category(Rng& rng, const DecoderDataOptions& o, bool allow_multistep) {
  const double u = uniform(rng, 0.0, 1.0);
  if (u < o.p_simple) return Category::SimpleArith;
  if (u < o.p_simple + o.p_complex) return Category::ComplexArith;
  if (allow_multistep && coin(rng, o.p_multistep)) return Category::MultiStepWord;
  return Category::SingleStepWord;
}

// Separator between a raw query and its answer.
std::string answer_lead(const std::string& prompt, bool prefix) {
  std::string s = prompt.empty() || prompt.back() == ' ' ? "" : " ";
  if (prefix) s += "Answer = ";
  return s;
}

GeneratedExample finish(std::string text, const Query& q, int n_inputs, std::uint64_t seed) {
  GeneratedExample ex;
  ex.text = std::move(text);
  const textio::Operands ops = textio::select_operands(textio::extract_numbers(ex.text), n_inputs);
  ex.inputs = ops.values;
  ex.padded = ops.padded;
  const Expr e = expr_for_inputs(q, n_inputs);
  ex.expr = e.str();
  ex.answer = q.answer;
  ex.category = std::string(to_string(q.category));
  ex.seed = seed;
  ex.prompt = q.prompt;
  const double check = eval_expr(e, ex.inputs);
  if (!(check == q.answer || (std::isnan(check) && std::isnan(q.answer)))) {
    throw std::logic_error("generated example operands disagree with its answer: " + ex.text);
  }
  return ex;
}

}  // namespace

GeneratedExample sample_decoder_example(std::uint64_t seed, const DecoderDataOptions& options) {
  if (options.n_inputs < 1 || options.max_queries < 2) throw ConfigError("bad decoder data options");
  Rng rng(mix_seed(seed, 0xDEC0DE));
  if (coin(rng, options.p_single)) {
    const Query q = sample_query(draw_category(rng, options, true), rng);
    std::string text = chat(q.prompt);
    if (q.category == Category::MultiStepWord) {
      text += q.worked;
    } else if (options.answer_prefix) {
      text += "Answer = ";
    }
    return finish(std::move(text), q, options.n_inputs, seed);
  }
  const int n = uniform_int(rng, 2, options.max_queries);
  std::string text;
  for (int i = 0; i + 1 < n; ++i) {
    const Query q = sample_query(draw_category(rng, options, true), rng);
    if (q.category == Category::MultiStepWord) {
      text += q.prompt + " " + q.worked;
    } else {
      text += q.prompt + answer_lead(q.prompt, options.answer_prefix);
    }
    text += *textio::format_output(q.answer);
  }
  const Query last = sample_query(draw_category(rng, options, false), rng);
  text += last.prompt + answer_lead(last.prompt, options.answer_prefix);
  return finish(std::move(text), last, options.n_inputs, seed);
}

Query sample_expression(std::mt19937_64& rng, int min_ops, int max_ops) {
  if (min_ops < 1 || max_ops < min_ops) throw ConfigError("bad operator count range");
  static const std::vector<std::string> ops{"+", "-", "*", "/"};
  static const std::vector<std::string> times{"*", "\xC3\x97", "\xC2\xB7", "x"};
  static const std::vector<std::string> divide{"/", "\xC3\xB7"};
  for (;;) {
    const int k = uniform_int(rng, min_ops, max_ops);
    const int range = uniform_int(rng, 0, 2);
    std::vector<Num> nums;
    for (int i = 0; i <= k; ++i) {
      nums.push_back(range == 0   ? integer(uniform_int(rng, -100, 100))
                     : range == 1 ? integer(uniform_int(rng, -1000, 1000))
                                  : fixed(uniform(rng, -100.0, 100.0), 1));
    }
    std::vector<std::string> chosen;
    for (int i = 0; i < k; ++i) chosen.push_back(pick(rng, ops));
    // Parenthesize one adjacent pair now and then.
    const int group = k >= 2 && coin(rng, 0.4) ? uniform_int(rng, 0, k - 2) : -1;
    const bool spaced = coin(rng, 0.7);

    // Precedence climbing over the flat sequence, with `group` as an atom.
    auto prec = [](const std::string& op) { return op == "+" || op == "-" ? 1 : 2; };
    std::vector<Expr> atoms;
    std::vector<std::string> atom_ops;
    for (int i = 0; i <= k; ++i) {
      if (i == group) {
        atoms.push_back(Expr::node(chosen[i], {Expr::leaf(i), Expr::leaf(i + 1)}));
        if (i + 1 < k) atom_ops.push_back(chosen[i + 1]);
        ++i;
      } else {
        atoms.push_back(Expr::leaf(i));
        if (i < k) atom_ops.push_back(chosen[i]);
      }
    }
    std::vector<Expr> out{atoms[0]};
    std::vector<std::string> pending;
    auto reduce = [&] {
      Expr rhs = out.back();
      out.pop_back();
      Expr lhs = out.back();
      out.pop_back();
      out.push_back(Expr::node(pending.back(), {lhs, rhs}));
      pending.pop_back();
    };
    for (std::size_t i = 0; i < atom_ops.size(); ++i) {
      while (!pending.empty() && prec(pending.back()) >= prec(atom_ops[i])) reduce();
      pending.push_back(atom_ops[i]);
      out.push_back(atoms[i + 1]);
    }
    while (!pending.empty()) reduce();
    const Expr expr = out.back();

    std::vector<double> values;
    for (const Num& n : nums) values.push_back(n.value);
    const double y = eval_expr(expr, values);
    if (!std::isfinite(y)) continue;
    // Division by an exact zero anywhere is rejected too.
    bool zero_div = false;
    std::function<void(const Expr&)> scan = [&](const Expr& e) {
      if (e.op == "/" && eval_expr(e.args[1], values) == 0.0) zero_div = true;
      for (const Expr& a : e.args) scan(a);
    };
    scan(expr);
    if (zero_div) continue;

    std::string text;
    const std::string gap = spaced ? " " : "";
    for (int i = 0; i <= k; ++i) {
      const bool opens = i == group, closes = group >= 0 && i == group + 1;
      const bool follows_op = i > 0 && !opens;
      if (opens) text += "(";
      text += follows_op ? after_op(nums[i]) : nums[i].text;
      if (closes) text += ")";
      if (i < k) {
        const std::string& op = chosen[i];
        // A bare "x" would glue to the digits when unspaced.
        std::string sym = op == "*" ? pick(rng, times) : op == "/" ? pick(rng, divide) : op;
        if (!spaced && sym == "x") sym = "*";
        text += gap + sym + gap;
      }
    }
    Query q;
    q.category = Category::Expression;
    q.math = text;
    q.prompt = text + gap + "=" + (spaced ? " " : "");
    q.operands = values;
    q.expr = expr;
    q.answer = y;
    return q;
  }
}

GeneratedExample sample_expression_example(std::uint64_t seed, int min_ops, int max_ops, bool answer_prefix) {
  Rng rng(mix_seed(seed, 0xE4));
  const Query q = sample_expression(rng, min_ops, max_ops);
  std::string text = chat(q.prompt);
  if (answer_prefix) text += "Answer = ";
  const int n_inputs = 3;
  if (static_cast<int>(q.operands.size()) > n_inputs) {
    throw ConfigError("expression examples use at most two operators");
  }
  return finish(std::move(text), q, n_inputs, seed);
}

SwitchStream sample_switch_stream(std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0x5717C4));
  if (coin(rng, 0.5)) return assemble({arith_pair(rng, true)}, seed);
  const int n = uniform_int(rng, 2, 4);
  std::vector<Pair> pairs;
  for (int i = 0; i < n; ++i) {
    const double u = uniform(rng, 0.0, 1.0);
    if (u < 0.25) {
      pairs.push_back(arith_pair(rng, false));
    } else if (u < 0.95) {
      pairs.push_back(exemplar_pair(uniform_int(rng, 0, curated_exemplar_count() - 1), rng));
    } else {
      const WordTemplate& t = pick(rng, multi_step_templates());
      Pair p;
      p.user = instantiate(t, rng).prompt.text;
      p.assistant.text = "The answer is ";
      pairs.push_back(std::move(p));
    }
  }
  return assemble(pairs, seed);
}

int curated_exemplar_count() {
  return static_cast<int>(curated().size() + multi_step_templates().size());
}

int curated_marks(int index) {
  const int n_curated = static_cast<int>(curated().size());
  if (index < 0 || index >= curated_exemplar_count()) throw ConfigError("exemplar index out of range");
  if (index < n_curated) return count_marks(curated()[index].assistant);
  return count_marks(multi_step_templates()[index - n_curated].worked) + 1;
}

SwitchStream render_exemplar(int index, std::uint64_t seed) {
  if (index < 0 || index >= curated_exemplar_count()) throw ConfigError("exemplar index out of range");
  Rng rng(mix_seed(seed, 0xE7E));
  return assemble({exemplar_pair(index, rng)}, seed);
}

std::vector<GeneratedExample> build_benchmark(std::string_view kind, int digits, int n, std::uint64_t seed) {
  const bool digit_kind = kind == "add" || kind == "sub" || kind == "mul" || kind == "div" || kind == "sqrt";
  if (std::find(std::begin(kBenchmarkKinds), std::end(kBenchmarkKinds), kind) == std::end(kBenchmarkKinds)) {
    throw ConfigError("unknown benchmark kind '" + std::string(kind) + "'");
  }
  if (digit_kind && digits != 3 && digits != 5 && digits != 7) throw ConfigError("digits must be 3, 5 or 7");
  if (kind == "multistep-2layer" && (digits < 1 || digits > 3)) {
    throw ConfigError("multistep benchmark takes 1 to 3 operators");
  }
  if (n < 0) throw ConfigError("benchmark size must be non-negative");
  std::uint64_t tag = 1469598103934665603ULL;  // FNV-1a of the kind, stable across platforms
  for (unsigned char c : kind) tag = (tag ^ c) * 1099511628211ULL;
  Rng rng(mix_seed(seed, tag ^ static_cast<std::uint64_t>(digits)));
  std::vector<GeneratedExample> out;
  for (int i = 0; i < n; ++i) {
    Query q;
    if (kind == "add" || kind == "sub" || kind == "mul" || kind == "div") {
      const std::string op = kind == "add" ? "+" : kind == "sub" ? "-" : kind == "mul" ? "*" : "/";
      const Form form{kind == "div" ? "{A} / {Bo} = Give the answer in decimals." : kind == "add" ? "{A} + {Bo} = "
                      : kind == "sub"  ? "{A} - {Bo} = "
                                       : "{A} * {Bo} = ",
                      false};
      q = binary_query(Category::SimpleArith, op, signed_digits(rng, digits), signed_digits(rng, digits), form);
    } else if (kind == "sqrt") {
      q = unary_query("sqrt", digits_operand(rng, digits), "sqrt({A}) = ");
    } else if (kind == "exp") {
      q = unary_query("exp", fixed(uniform(rng, -10.0, 10.0), 4), "exp({A}) = ");
    } else if (kind == "log") {
      Num x;
      do {
        const double v = std::exp(uniform(rng, -10.0, 10.0) * std::numbers::ln10);
        const int decimals = std::max(0, 5 - static_cast<int>(std::floor(std::log10(v))));
        x = fixed(v, decimals);
      } while (!(x.value > 1e-10 && x.value < 1e10));
      q = unary_query("log", x, "log({A}) = ");
    } else if (kind == "sin" || kind == "cos") {
      const double two_pi = 2 * std::numbers::pi;
      Num x;
      do x = fixed(uniform(rng, -two_pi, two_pi), 4);
      while (!(x.value > -two_pi && x.value < two_pi));
      q = unary_query(kind, x, kind == "sin" ? "sin({A} rad) = " : "cos({A} rad) = ");
    } else {
      q = sample_expression(rng, 1, digits);
    }
    GeneratedExample ex;
    ex.prompt = q.prompt;
    ex.text = chat(q.prompt);
    const int n_inputs = kind == "multistep-2layer" ? 3 : 2;
    const textio::Operands ops = textio::select_operands(textio::extract_numbers(ex.text), n_inputs);
    ex.inputs = ops.values;
    ex.padded = ops.padded;
    if (static_cast<int>(q.operands.size()) <= n_inputs) ex.expr = expr_for_inputs(q, n_inputs).str();
    ex.answer = q.answer;
    ex.category = std::string(kind);
    ex.seed = seed;
    ex.script = "I think it is " + rough_answer(q.answer) + ".";
    out.push_back(std::move(ex));
  }
  return out;
}

// ---- dataset files ------------------------------------------------------------

void write_jsonl(std::ostream& out, const std::vector<GeneratedExample>& examples) {
  for (const GeneratedExample& ex : examples) {
    nlohmann::ordered_json j;
    j["version"] = kDatasetVersion;
    j["text"] = ex.text;
    j["inputs"] = ex.inputs;
    j["answer"] = ex.answer;
    j["category"] = ex.category;
    j["seed"] = ex.seed;
    j["expr"] = ex.expr;
    j["padded"] = ex.padded;
    if (!ex.labels.empty()) j["labels"] = ex.labels;
    if (!ex.prompt.empty()) j["prompt"] = ex.prompt;
    if (!ex.script.empty()) j["script"] = ex.script;
    out << j.dump() << '\n';
  }
}

void save_jsonl(const std::string& path, const std::vector<GeneratedExample>& examples) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  write_jsonl(f, examples);
  if (!f) throw std::runtime_error("write failed: " + path);
}

std::vector<GeneratedExample> read_jsonl(std::istream& in, const std::string& what) {
  std::vector<GeneratedExample> out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    const std::string where = what + " line " + std::to_string(number);
    try {
      const nlohmann::json j = nlohmann::json::parse(line);
      if (j.at("version").get<int>() != kDatasetVersion) {
        throw FormatError(where + ": unsupported dataset version " + j.at("version").dump());
      }
      GeneratedExample ex;
      ex.text = j.at("text").get<std::string>();
      ex.inputs = j.at("inputs").get<std::vector<double>>();
      ex.answer = j.at("answer").get<double>();
      ex.category = j.at("category").get<std::string>();
      ex.seed = j.at("seed").get<std::uint64_t>();
      ex.expr = j.value("expr", "");
      ex.padded = j.value("padded", false);
      ex.labels = j.value("labels", std::vector<int>{});
      ex.prompt = j.value("prompt", "");
      ex.script = j.value("script", "");
      out.push_back(std::move(ex));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(where + ": " + e.what());
    }
  }
  return out;
}

std::vector<GeneratedExample> load_jsonl(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path);
  return read_jsonl(f, path);
}

}  // namespace occamllm::datagen
