#include "granno/logic/logical_form.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "granno/logic/errors.hpp"

namespace granno {

namespace {

struct OpInfo {
  Op op;
  const char* name;
  bool has_symbol;
  size_t arity;
};

constexpr OpInfo kOps[] = {
    {Op::Entity, "entity", true, 0},     {Op::Slot, "slot", true, 0},
    {Op::Unary, "unary", true, 0},       {Op::Join, "join", true, 1},
    {Op::Intersect, "and", false, 2},    {Op::Negate, "not", false, 1},
    {Op::Argmax, "argmax", true, 1},     {Op::Argmin, "argmin", true, 1},
    {Op::Larger, "larger", true, 1},     {Op::Smaller, "smaller", true, 1},
    {Op::Count, "count", false, 1},      {Op::Sum, "sum", true, 1},
    {Op::Literal, "number", false, 0},
};

const OpInfo& info(Op op) {
  for (const auto& i : kOps) {
    if (i.op == op) return i;
  }
  throw Error("unhandled operator");
}

const OpInfo* info_by_name(std::string_view name) {
  for (const auto& i : kOps) {
    if (name == i.name) return &i;
  }
  return nullptr;
}

bool valid_symbol(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')') return false;
  }
  return true;
}

class SexprReader {
 public:
  explicit SexprReader(std::string_view text) : text_(text) {}

  LogicalForm read_all() {
    LogicalForm lf = read_form();
    skip_ws();
    if (pos_ != text_.size()) fail("trailing characters");
    return lf;
  }

 private:
  LogicalForm read_form() {
    skip_ws();
    expect('(');
    std::string head = read_atom();
    const OpInfo* op = info_by_name(head);
    if (op == nullptr) fail("unknown operator '" + head + "'");

    std::string symbol;
    double number = 0.0;
    std::vector<LogicalForm> args;
    if (op->op == Op::Literal) {
      std::string atom = read_atom();
      char* end = nullptr;
      number = std::strtod(atom.c_str(), &end);
      if (atom.empty() || *end != '\0') fail("bad number '" + atom + "'");
    } else if (op->has_symbol) {
      symbol = read_atom();
    }
    for (size_t i = 0; i < op->arity; ++i) {
      args.push_back(read_form());
    }
    skip_ws();
    expect(')');
    return LogicalForm::make(op->op, std::move(symbol), number, std::move(args));
  }

  std::string read_atom() {
    skip_ws();
    size_t start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) &&
           text_[pos_] != '(' && text_[pos_] != ')') {
      ++pos_;
    }
    if (start == pos_) fail("expected atom");
    return std::string(text_.substr(start, pos_ - start));
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  void expect(char c) {
    if (pos_ >= text_.size() || text_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw FormatError("logical form: " + what + " at offset " + std::to_string(pos_) +
                      " in '" + std::string(text_) + "'");
  }

  std::string_view text_;
  size_t pos_ = 0;
};

}  // namespace

const char* op_name(Op op) { return info(op).name; }

std::optional<Op> op_from_name(std::string_view name) {
  if (const OpInfo* i = info_by_name(name)) return i->op;
  return std::nullopt;
}

size_t op_arity(Op op) { return info(op).arity; }
bool op_has_symbol(Op op) { return info(op).has_symbol; }

std::string format_number(double value) {
  char buf[64];
  if (std::isfinite(value) && std::floor(value) == value && std::fabs(value) < 1e15) {
    std::snprintf(buf, sizeof buf, "%.0f", value);
  } else {
    std::snprintf(buf, sizeof buf, "%.17g", value);
  }
  return buf;
}

LogicalForm LogicalForm::make(Op op, std::string symbol, double number,
                              std::vector<LogicalForm> args) {
  const OpInfo& oi = info(op);
  if (args.size() != oi.arity) {
    throw TypeError(std::string("operator ") + oi.name + " expects " +
                    std::to_string(oi.arity) + " argument(s)");
  }
  if (oi.has_symbol && !valid_symbol(symbol)) {
    throw FormatError(std::string("operator ") + oi.name + " needs a symbol");
  }

  auto node = std::make_shared<Node>();
  node->op = op;
  node->symbol = oi.has_symbol ? std::move(symbol) : std::string();
  node->number = op == Op::Literal ? number : 0.0;
  node->args = std::move(args);

  std::string text = "(";
  text += oi.name;
  if (op == Op::Literal) {
    text += ' ';
    text += format_number(node->number);
  } else if (oi.has_symbol) {
    text += ' ';
    text += node->symbol;
  }
  size_t depth = 0;
  size_t size = 1;
  for (const auto& a : node->args) {
    text += ' ';
    text += a.str();
    depth = std::max(depth, a.depth());
    size += a.size();
  }
  text += ')';
  node->text = std::move(text);
  node->depth = depth + 1;
  node->size = size;
  return LogicalForm(std::move(node));
}

LogicalForm LogicalForm::entity(std::string id) { return make(Op::Entity, std::move(id), 0, {}); }
LogicalForm LogicalForm::slot(std::string type) { return make(Op::Slot, std::move(type), 0, {}); }
LogicalForm LogicalForm::unary(std::string id) { return make(Op::Unary, std::move(id), 0, {}); }
LogicalForm LogicalForm::join(std::string relation, LogicalForm arg) {
  return make(Op::Join, std::move(relation), 0, {std::move(arg)});
}
LogicalForm LogicalForm::intersect(LogicalForm left, LogicalForm right) {
  return make(Op::Intersect, {}, 0, {std::move(left), std::move(right)});
}
LogicalForm LogicalForm::negate(LogicalForm inner) {
  return make(Op::Negate, {}, 0, {std::move(inner)});
}
LogicalForm LogicalForm::argmax(std::string attr, LogicalForm over) {
  return make(Op::Argmax, std::move(attr), 0, {std::move(over)});
}
LogicalForm LogicalForm::argmin(std::string attr, LogicalForm over) {
  return make(Op::Argmin, std::move(attr), 0, {std::move(over)});
}
LogicalForm LogicalForm::larger(std::string attr, LogicalForm threshold) {
  return make(Op::Larger, std::move(attr), 0, {std::move(threshold)});
}
LogicalForm LogicalForm::smaller(std::string attr, LogicalForm threshold) {
  return make(Op::Smaller, std::move(attr), 0, {std::move(threshold)});
}
LogicalForm LogicalForm::count(LogicalForm inner) {
  return make(Op::Count, {}, 0, {std::move(inner)});
}
LogicalForm LogicalForm::sum(std::string attr, LogicalForm over) {
  return make(Op::Sum, std::move(attr), 0, {std::move(over)});
}
LogicalForm LogicalForm::literal(double value) { return make(Op::Literal, {}, value, {}); }

LogicalForm LogicalForm::parse(std::string_view text) { return SexprReader(text).read_all(); }

void LogicalForm::visit(const std::function<void(const LogicalForm&)>& fn) const {
  fn(*this);
  for (const auto& a : args()) a.visit(fn);
}

std::vector<LogicalForm> flatten_conjunction(const LogicalForm& lf) {
  std::vector<LogicalForm> out;
  std::function<void(const LogicalForm&)> walk = [&](const LogicalForm& f) {
    if (f.op() == Op::Intersect) {
      walk(f.arg(0));
      walk(f.arg(1));
    } else {
      out.push_back(f);
    }
  };
  walk(lf);
  return out;
}

LogicalForm build_conjunction(std::span<const LogicalForm> conjuncts) {
  if (conjuncts.empty()) throw EmptyInput("empty conjunction");
  LogicalForm acc = conjuncts.front();
  for (size_t i = 1; i < conjuncts.size(); ++i) {
    acc = LogicalForm::intersect(acc, conjuncts[i]);
  }
  return acc;
}

}  // namespace granno
