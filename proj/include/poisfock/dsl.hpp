#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "poisfock/functional.hpp"

// Expression language for functionals of occupation counts.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' INTEGER)?
//   primary := NUMBER | VARIABLE | CALL | '(' expr ')'
//   CALL    := 'exp' '(' expr ')'
//            | 'min' '(' expr ',' expr ')' | 'max' '(' expr ',' expr ')'
//            | 'pow' '(' expr ',' INTEGER ')'
//            | 'ind' '(' expr CMP expr ')'
//   CMP     := '<' | '<=' | '>' | '>=' | '==' | '!='
//   VARIABLE:= 'n1' ... 'nk'
//
// The full grammar with examples lives in docs/dsl.md.

namespace poisfock::dsl {

enum class Op { Literal, Variable, Neg, Add, Sub, Mul, Div, Pow, Exp, Min, Max, Ind };
enum class Cmp { Lt, Le, Gt, Ge, Eq, Ne };

/// Syntax tree node. Only the fields relevant to `op` are meaningful:
/// `value` for Literal, `variable` (0-based) for Variable, `exponent` for
/// Pow and `cmp` for Ind.
struct Node {
  Op op = Op::Literal;
  double value = 0.0;
  std::size_t variable = 0;
  int exponent = 0;
  Cmp cmp = Cmp::Lt;
  std::vector<Node> children;

  friend bool operator==(const Node&, const Node&) = default;
};

/// Parses `source` over variables n1..n`sites`. Throws ParseError.
Node parse(std::string_view source, std::size_t sites);

/// Canonical text form; parse(to_string(t)) == t.
std::string to_string(const Node& node);

/// Stack-machine form of a tree. Evaluation is reentrant.
class Program {
public:
  explicit Program(const Node& root);

  /// Throws EvaluationError on division by zero.
  double run(std::span<const int> counts) const;

private:
  struct Instr {
    Op op;
    double value;
    std::size_t variable;
    int exponent;
    Cmp cmp;
  };
  std::vector<Instr> code_;
  std::size_t max_depth_ = 0;
};

/// Value range of the expression over all count vectors (n_i in [0, inf)).
struct Range {
  double lo;
  double hi;
};
Range range_of(const Node& node);

/// Conservative growth envelope derived from the tree, when one exists.
std::optional<Envelope> infer_envelope(const Node& node);

}  // namespace poisfock::dsl

namespace poisfock {

/// Parses a DSL expression into a Functional over `sites` sites. The label is
/// the source text; the envelope is inferred when the tree admits one.
Functional parse_functional(std::string_view source, std::size_t sites);

}  // namespace poisfock
