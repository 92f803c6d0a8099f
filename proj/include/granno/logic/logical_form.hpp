#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace granno {

/// Operators of the supported lambda-DCS subset.
///
/// Superlative direction, comparative direction and the aggregate function
/// are folded into the operator so a node is fully described by
/// (op, symbol, number, args).
enum class Op {
  Entity,     // symbol = entity id
  Slot,       // symbol = semantic type; only appears in templates
  Unary,      // symbol = unary id
  Join,       // symbol = relation id; args = {arg}
  Intersect,  // args = {left, right}
  Negate,     // args = {inner}
  Argmax,     // symbol = attribute id; args = {over}
  Argmin,
  Larger,     // symbol = attribute id; args = {threshold}
  Smaller,
  Count,      // args = {inner}
  Sum,        // symbol = attribute id; args = {over}
  Literal,    // number
};

const char* op_name(Op op);
std::optional<Op> op_from_name(std::string_view name);
/// Number of logical-form children the operator takes.
size_t op_arity(Op op);
/// Whether the operator carries a constant or type symbol.
bool op_has_symbol(Op op);

/// Immutable logical-form tree with value semantics.
///
/// Nodes are shared, so copies are cheap. The canonical S-expression is
/// computed once at construction and doubles as the identity of the form:
/// two forms are equal iff their S-expressions are equal.
class LogicalForm {
 public:
  static LogicalForm entity(std::string id);
  static LogicalForm slot(std::string type);
  static LogicalForm unary(std::string id);
  static LogicalForm join(std::string relation, LogicalForm arg);
  static LogicalForm intersect(LogicalForm left, LogicalForm right);
  static LogicalForm negate(LogicalForm inner);
  static LogicalForm argmax(std::string attr, LogicalForm over);
  static LogicalForm argmin(std::string attr, LogicalForm over);
  static LogicalForm larger(std::string attr, LogicalForm threshold);
  static LogicalForm smaller(std::string attr, LogicalForm threshold);
  static LogicalForm count(LogicalForm inner);
  static LogicalForm sum(std::string attr, LogicalForm over);
  static LogicalForm literal(double value);

  /// Generic constructor; validates arity for `op`.
  static LogicalForm make(Op op, std::string symbol, double number,
                          std::vector<LogicalForm> args);

  /// Parses the canonical S-expression syntax, e.g.
  /// `(count (join borders (entity california)))`. Throws FormatError.
  static LogicalForm parse(std::string_view text);

  Op op() const { return node_->op; }
  const std::string& symbol() const { return node_->symbol; }
  double number() const { return node_->number; }
  std::span<const LogicalForm> args() const { return node_->args; }
  const LogicalForm& arg(size_t i) const { return node_->args.at(i); }

  const std::string& str() const { return node_->text; }
  size_t depth() const { return node_->depth; }
  size_t size() const { return node_->size; }

  bool operator==(const LogicalForm& other) const {
    return node_ == other.node_ || node_->text == other.node_->text;
  }
  bool operator<(const LogicalForm& other) const {
    return node_->text < other.node_->text;
  }

  /// Pre-order visit of every node.
  void visit(const std::function<void(const LogicalForm&)>& fn) const;

 private:
  struct Node {
    Op op;
    std::string symbol;
    double number = 0.0;
    std::vector<LogicalForm> args;
    std::string text;
    size_t depth = 1;
    size_t size = 1;
  };

  explicit LogicalForm(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  std::shared_ptr<const Node> node_;
};

/// Operands of the maximal Intersect chain rooted at `lf`, left to right.
/// A non-Intersect form yields itself.
std::vector<LogicalForm> flatten_conjunction(const LogicalForm& lf);

/// Rebuilds a left-nested Intersect chain from at least one conjunct.
LogicalForm build_conjunction(std::span<const LogicalForm> conjuncts);

std::string format_number(double value);

}  // namespace granno

template <>
struct std::hash<granno::LogicalForm> {
  size_t operator()(const granno::LogicalForm& lf) const noexcept {
    return std::hash<std::string>{}(lf.str());
  }
};
