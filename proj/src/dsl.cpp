#include "poisfock/dsl.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>

#include "poisfock/errors.hpp"

namespace poisfock::dsl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class Parser {
public:
  Parser(std::string_view src, std::size_t sites) : src_(src), sites_(sites) {}

  Node parse_all() {
    skip_ws();
    if (pos_ == src_.size()) throw ParseError("empty expression", pos_);
    Node n = expr();
    skip_ws();
    if (pos_ != src_.size()) throw ParseError("unexpected '" + std::string(1, src_[pos_]) + "'", pos_);
    return n;
  }

private:
  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < src_.size() && src_[pos_] == c;
  }

  bool accept(std::string_view tok) {
    skip_ws();
    if (src_.substr(pos_, tok.size()) == tok) {
      pos_ += tok.size();
      return true;
    }
    return false;
  }

  void expect(char c) {
    skip_ws();
    if (pos_ >= src_.size() || src_[pos_] != c) {
      throw ParseError(std::string("expected '") + c + "'", pos_);
    }
    ++pos_;
  }

  static Node binary(Op op, Node a, Node b) {
    Node n;
    n.op = op;
    n.children.push_back(std::move(a));
    n.children.push_back(std::move(b));
    return n;
  }

  Node expr() {
    Node lhs = term();
    for (;;) {
      if (accept("+")) {
        lhs = binary(Op::Add, std::move(lhs), term());
      } else if (accept("-")) {
        lhs = binary(Op::Sub, std::move(lhs), term());
      } else {
        return lhs;
      }
    }
  }

  Node term() {
    Node lhs = unary();
    for (;;) {
      if (accept("*")) {
        lhs = binary(Op::Mul, std::move(lhs), unary());
      } else if (accept("/")) {
        lhs = binary(Op::Div, std::move(lhs), unary());
      } else {
        return lhs;
      }
    }
  }

  Node unary() {
    if (accept("-")) {
      Node n;
      n.op = Op::Neg;
      n.children.push_back(unary());
      return n;
    }
    return power();
  }

  Node power() {
    Node base = primary();
    if (accept("^")) {
      Node n;
      n.op = Op::Pow;
      n.exponent = integer_literal();
      n.children.push_back(std::move(base));
      return n;
    }
    return base;
  }

  int integer_literal() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    if (start == pos_) throw ParseError("expected a nonnegative integer exponent", start);
    int value = 0;
    auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, value);
    if (ec != std::errc() || value > 64) throw ParseError("exponent out of range (0..64)", start);
    return value;
  }

  Node number() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) {
      ++pos_;
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) ++p;
      if (p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]))) {
        pos_ = p;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      }
    }
    Node n;
    n.op = Op::Literal;
    auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, n.value);
    if (ec != std::errc() || ptr != src_.data() + pos_ || !std::isfinite(n.value)) {
      throw ParseError("malformed number", start);
    }
    return n;
  }

  std::vector<Node> call_args(const std::string& name, std::size_t start, std::size_t arity) {
    expect('(');
    std::vector<Node> args;
    if (!peek(')')) {
      args.push_back(expr());
      while (accept(",")) args.push_back(expr());
    }
    expect(')');
    if (args.size() != arity) {
      throw ParseError("arity mismatch: " + name + " expects " + std::to_string(arity) +
                           " argument" + (arity == 1 ? "" : "s") + ", got " + std::to_string(args.size()),
                       start);
    }
    return args;
  }

  Node primary() {
    skip_ws();
    if (pos_ >= src_.size()) throw ParseError("unexpected end of expression", pos_);
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (c == '(') {
      ++pos_;
      Node n = expr();
      expect(')');
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    throw ParseError("unexpected '" + std::string(1, c) + "'", pos_);
  }

  Node identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
      ++pos_;
    }
    const std::string name(src_.substr(start, pos_ - start));

    Node n;
    if (name == "exp" || name == "min" || name == "max" || name == "pow") {
      if (!peek('(')) throw ParseError("function '" + name + "' needs arguments", start);
      if (name == "pow") return pow_call(start);
      const std::size_t arity = name == "exp" ? 1 : 2;
      n.op = name == "exp" ? Op::Exp : (name == "min" ? Op::Min : Op::Max);
      n.children = call_args(name, start, arity);
      return n;
    }
    if (name == "ind") {
      if (!peek('(')) throw ParseError("function 'ind' needs arguments", start);
      return indicator();
    }
    if (name.size() >= 2 && name[0] == 'n' &&
        std::all_of(name.begin() + 1, name.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
      std::size_t index = 0;
      auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), index);
      if (ec == std::errc() && index >= 1 && index <= sites_) {
        n.op = Op::Variable;
        n.variable = index - 1;
        return n;
      }
    }
    throw ParseError("unknown identifier '" + name + "'", start);
  }

  Node pow_call(std::size_t start) {
    expect('(');
    Node base = expr();
    if (!accept(",")) throw ParseError("arity mismatch: pow expects 2 arguments", start);
    Node n;
    n.op = Op::Pow;
    n.exponent = integer_literal();
    if (!peek(')')) throw ParseError("arity mismatch: pow expects 2 arguments", start);
    expect(')');
    n.children.push_back(std::move(base));
    return n;
  }

  Node indicator() {
    expect('(');
    Node lhs = expr();
    Node n;
    n.op = Op::Ind;
    if (accept("<=")) {
      n.cmp = Cmp::Le;
    } else if (accept(">=")) {
      n.cmp = Cmp::Ge;
    } else if (accept("==")) {
      n.cmp = Cmp::Eq;
    } else if (accept("!=")) {
      n.cmp = Cmp::Ne;
    } else if (accept("<")) {
      n.cmp = Cmp::Lt;
    } else if (accept(">")) {
      n.cmp = Cmp::Gt;
    } else {
      throw ParseError("ind() needs a comparison", pos_);
    }
    Node rhs = expr();
    expect(')');
    n.children.push_back(std::move(lhs));
    n.children.push_back(std::move(rhs));
    return n;
  }

  std::string_view src_;
  std::size_t sites_;
  std::size_t pos_ = 0;
};

const char* cmp_text(Cmp c) {
  switch (c) {
    case Cmp::Lt: return "<";
    case Cmp::Le: return "<=";
    case Cmp::Gt: return ">";
    case Cmp::Ge: return ">=";
    case Cmp::Eq: return "==";
    case Cmp::Ne: return "!=";
  }
  return "?";
}

bool compare(Cmp c, double a, double b) {
  switch (c) {
    case Cmp::Lt: return a < b;
    case Cmp::Le: return a <= b;
    case Cmp::Gt: return a > b;
    case Cmp::Ge: return a >= b;
    case Cmp::Eq: return a == b;
    case Cmp::Ne: return a != b;
  }
  return false;
}

double int_power(double x, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= x;
  return r;
}

// 0 * inf is taken as 0: a zero factor stays zero over the whole range.
double range_mul(double a, double b) {
  if (a == 0.0 || b == 0.0) return 0.0;
  return a * b;
}

Range mul_range(Range a, Range b) {
  const std::array<double, 4> p = {range_mul(a.lo, b.lo), range_mul(a.lo, b.hi), range_mul(a.hi, b.lo),
                                   range_mul(a.hi, b.hi)};
  return {*std::min_element(p.begin(), p.end()), *std::max_element(p.begin(), p.end())};
}

void compile(const Node& node, std::vector<Node>& out) {
  for (const Node& c : node.children) compile(c, out);
  Node flat = node;
  flat.children.clear();
  out.push_back(std::move(flat));
}

}  // namespace

Node parse(std::string_view source, std::size_t sites) {
  if (sites == 0) throw DomainError("expression needs at least one site");
  return Parser(source, sites).parse_all();
}

std::string to_string(const Node& n) {
  switch (n.op) {
    case Op::Literal: return fmt::format("{}", n.value);
    case Op::Variable: return "n" + std::to_string(n.variable + 1);
    case Op::Neg: return "(-" + to_string(n.children[0]) + ")";
    case Op::Add: return "(" + to_string(n.children[0]) + " + " + to_string(n.children[1]) + ")";
    case Op::Sub: return "(" + to_string(n.children[0]) + " - " + to_string(n.children[1]) + ")";
    case Op::Mul: return "(" + to_string(n.children[0]) + " * " + to_string(n.children[1]) + ")";
    case Op::Div: return "(" + to_string(n.children[0]) + " / " + to_string(n.children[1]) + ")";
    case Op::Pow: return "(" + to_string(n.children[0]) + "^" + std::to_string(n.exponent) + ")";
    case Op::Exp: return "exp(" + to_string(n.children[0]) + ")";
    case Op::Min: return "min(" + to_string(n.children[0]) + ", " + to_string(n.children[1]) + ")";
    case Op::Max: return "max(" + to_string(n.children[0]) + ", " + to_string(n.children[1]) + ")";
    case Op::Ind:
      return "ind(" + to_string(n.children[0]) + " " + cmp_text(n.cmp) + " " + to_string(n.children[1]) + ")";
  }
  return {};
}

Program::Program(const Node& root) {
  std::vector<Node> flat;
  compile(root, flat);
  std::size_t depth = 0;
  for (const Node& n : flat) {
    code_.push_back({n.op, n.value, n.variable, n.exponent, n.cmp});
    switch (n.op) {
      case Op::Literal:
      case Op::Variable: ++depth; break;
      case Op::Add:
      case Op::Sub:
      case Op::Mul:
      case Op::Div:
      case Op::Min:
      case Op::Max:
      case Op::Ind: --depth; break;
      default: break;
    }
    max_depth_ = std::max(max_depth_, depth);
  }
}

double Program::run(std::span<const int> counts) const {
  constexpr std::size_t kInline = 32;
  std::array<double, kInline> inline_stack{};
  std::vector<double> heap_stack;
  double* stack = inline_stack.data();
  if (max_depth_ > kInline) {
    heap_stack.resize(max_depth_);
    stack = heap_stack.data();
  }
  std::size_t top = 0;
  for (const Instr& in : code_) {
    switch (in.op) {
      case Op::Literal: stack[top++] = in.value; break;
      case Op::Variable: stack[top++] = static_cast<double>(counts[in.variable]); break;
      case Op::Neg: stack[top - 1] = -stack[top - 1]; break;
      case Op::Pow: stack[top - 1] = int_power(stack[top - 1], in.exponent); break;
      case Op::Exp: stack[top - 1] = std::exp(stack[top - 1]); break;
      default: {
        const double b = stack[--top];
        double& a = stack[top - 1];
        switch (in.op) {
          case Op::Add: a = a + b; break;
          case Op::Sub: a = a - b; break;
          case Op::Mul: a = a * b; break;
          case Op::Div:
            if (b == 0.0) throw EvaluationError("division by zero");
            a = a / b;
            break;
          case Op::Min: a = std::min(a, b); break;
          case Op::Max: a = std::max(a, b); break;
          case Op::Ind: a = compare(in.cmp, a, b) ? 1.0 : 0.0; break;
          default: break;
        }
      }
    }
  }
  return stack[0];
}

Range range_of(const Node& n) {
  switch (n.op) {
    case Op::Literal: return {n.value, n.value};
    case Op::Variable: return {0.0, kInf};
    case Op::Neg: {
      const Range a = range_of(n.children[0]);
      return {-a.hi, -a.lo};
    }
    case Op::Add: {
      const Range a = range_of(n.children[0]), b = range_of(n.children[1]);
      return {a.lo + b.lo, a.hi + b.hi};
    }
    case Op::Sub: {
      const Range a = range_of(n.children[0]), b = range_of(n.children[1]);
      return {a.lo - b.hi, a.hi - b.lo};
    }
    case Op::Mul: return mul_range(range_of(n.children[0]), range_of(n.children[1]));
    case Op::Div: {
      const Range a = range_of(n.children[0]), b = range_of(n.children[1]);
      if (b.lo <= 0.0 && b.hi >= 0.0) return {-kInf, kInf};
      return mul_range(a, Range{1.0 / b.hi, 1.0 / b.lo});
    }
    case Op::Pow: {
      const Range a = range_of(n.children[0]);
      const int e = n.exponent;
      if (e == 0) return {1.0, 1.0};
      if (e % 2 == 1) return {int_power(a.lo, e), int_power(a.hi, e)};
      const double lo_abs = (a.lo <= 0.0 && a.hi >= 0.0) ? 0.0 : std::min(std::abs(a.lo), std::abs(a.hi));
      const double hi_abs = std::max(std::abs(a.lo), std::abs(a.hi));
      return {int_power(lo_abs, e), int_power(hi_abs, e)};
    }
    case Op::Exp: {
      const Range a = range_of(n.children[0]);
      return {std::exp(a.lo), std::exp(a.hi)};
    }
    case Op::Min: {
      const Range a = range_of(n.children[0]), b = range_of(n.children[1]);
      return {std::min(a.lo, b.lo), std::min(a.hi, b.hi)};
    }
    case Op::Max: {
      const Range a = range_of(n.children[0]), b = range_of(n.children[1]);
      return {std::max(a.lo, b.lo), std::max(a.hi, b.hi)};
    }
    case Op::Ind: return {0.0, 1.0};
  }
  return {-kInf, kInf};
}

std::optional<Envelope> infer_envelope(const Node& n) {
  const Range r = range_of(n);
  std::optional<Envelope> bounded;
  if (std::isfinite(r.lo) && std::isfinite(r.hi)) {
    bounded = Envelope{std::max(std::abs(r.lo), std::abs(r.hi)), 0.0};
  }

  std::optional<Envelope> grown;
  switch (n.op) {
    case Op::Literal: grown = Envelope{std::abs(n.value), 0.0}; break;
    case Op::Variable: grown = Envelope{1.0, 1.0}; break;
    case Op::Neg: grown = infer_envelope(n.children[0]); break;
    case Op::Add:
    case Op::Sub: {
      auto a = infer_envelope(n.children[0]), b = infer_envelope(n.children[1]);
      if (a && b) grown = envelope_sum(*a, *b);
      break;
    }
    case Op::Mul: {
      auto a = infer_envelope(n.children[0]), b = infer_envelope(n.children[1]);
      if (a && b) grown = envelope_product(*a, *b);
      break;
    }
    case Op::Div: {
      auto a = infer_envelope(n.children[0]);
      const Range d = range_of(n.children[1]);
      const double dmin = (d.lo > 0.0) ? d.lo : (d.hi < 0.0 ? -d.hi : 0.0);
      if (a && dmin > 0.0) grown = Envelope{a->scale / dmin, a->power};
      break;
    }
    case Op::Pow: {
      auto a = infer_envelope(n.children[0]);
      if (a) grown = Envelope{int_power(a->scale, n.exponent), a->power * n.exponent};
      if (n.exponent == 0) grown = Envelope{1.0, 0.0};
      break;
    }
    case Op::Exp: break;  // only the bounded-range route applies
    case Op::Min:
    case Op::Max: {
      auto a = infer_envelope(n.children[0]), b = infer_envelope(n.children[1]);
      if (a && b) grown = Envelope{std::max(a->scale, b->scale), std::max(a->power, b->power)};
      break;
    }
    case Op::Ind: grown = Envelope{1.0, 0.0}; break;
  }

  if (bounded && (!grown || grown->power > 0.0 || bounded->scale <= grown->scale)) return bounded;
  return grown;
}

}  // namespace poisfock::dsl

namespace poisfock {

Functional parse_functional(std::string_view source, std::size_t sites) {
  const dsl::Node tree = dsl::parse(source, sites);
  auto program = std::make_shared<const dsl::Program>(tree);
  Functional f(
      sites, [program](std::span<const int> n) { return program->run(n); }, std::string(source));
  return f.with_envelope(dsl::infer_envelope(tree));
}

}  // namespace poisfock
