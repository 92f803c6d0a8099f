#include "granno/logic/structure.hpp"

#include <algorithm>
#include <set>

#include "granno/logic/errors.hpp"

namespace granno {

const std::vector<std::string>& operator_rows() {
  static const std::vector<std::string> rows = {
      "argmax", "argmin", "larger", "smaller",     "conj_1", "conj_2",
      "conj_3", "conj_4", "negation", "aggregation", "count"};
  return rows;
}

size_t max_conjunction_arity(const LogicalForm& lf) {
  size_t best = 0;
  if (lf.op() == Op::Intersect) {
    auto conjuncts = flatten_conjunction(lf);
    best = conjuncts.size();
    for (const auto& c : conjuncts) best = std::max(best, max_conjunction_arity(c));
    return best;
  }
  for (const auto& a : lf.args()) best = std::max(best, max_conjunction_arity(a));
  return best;
}

std::map<std::string, double> operator_histogram(std::span<const LogicalForm> dataset) {
  if (dataset.empty()) throw EmptyInput("operator_histogram: empty dataset");
  std::map<std::string, double> counts;
  for (const auto& row : operator_rows()) counts[row] = 0.0;

  for (const auto& lf : dataset) {
    std::set<std::string> present;
    lf.visit([&](const LogicalForm& node) {
      switch (node.op()) {
        case Op::Argmax: present.insert("argmax"); break;
        case Op::Argmin: present.insert("argmin"); break;
        case Op::Larger: present.insert("larger"); break;
        case Op::Smaller: present.insert("smaller"); break;
        case Op::Negate: present.insert("negation"); break;
        case Op::Sum: present.insert("aggregation"); break;
        case Op::Count: present.insert("count"); break;
        default: break;
      }
    });
    if (size_t arity = max_conjunction_arity(lf); arity > 0) {
      present.insert("conj_" + std::to_string(std::min<size_t>(arity, 4)));
    }
    for (const auto& row : present) counts[row] += 1.0;
  }
  for (auto& [row, c] : counts) c /= static_cast<double>(dataset.size());
  return counts;
}

bool detect_contradiction(const LogicalForm& lf) {
  if (lf.op() == Op::Intersect) {
    auto conjuncts = flatten_conjunction(lf);
    std::set<std::string> positive;
    for (const auto& c : conjuncts) {
      if (c.op() != Op::Negate) positive.insert(c.str());
    }
    for (const auto& c : conjuncts) {
      if (c.op() == Op::Negate && positive.contains(c.arg(0).str())) return true;
    }
    for (const auto& c : conjuncts) {
      if (detect_contradiction(c)) return true;
    }
    return false;
  }
  for (const auto& a : lf.args()) {
    if (detect_contradiction(a)) return true;
  }
  return false;
}

LogicalForm canonical_conjunction_order(const LogicalForm& lf) {
  if (lf.op() == Op::Intersect) {
    auto conjuncts = flatten_conjunction(lf);
    for (auto& c : conjuncts) c = canonical_conjunction_order(c);
    std::sort(conjuncts.begin(), conjuncts.end());
    return build_conjunction(conjuncts);
  }
  if (lf.args().empty()) return lf;
  std::vector<LogicalForm> args;
  for (const auto& a : lf.args()) args.push_back(canonical_conjunction_order(a));
  return LogicalForm::make(lf.op(), lf.symbol(), lf.number(), std::move(args));
}

namespace {

bool is_unfiltered_base(const LogicalForm& over) {
  return over.op() == Op::Unary || over.op() == Op::Slot;
}

}  // namespace

bool flag_unlikely(const LogicalForm& lf, const Schema& schema) {
  bool flagged = false;
  lf.visit([&](const LogicalForm& node) {
    if (flagged) return;
    if (node.op() == Op::Sum) {
      const KbConstant* attr = schema.find(node.symbol());
      if (attr != nullptr && attr->kind == ConstantKind::Attribute && !attr->summable) {
        flagged = true;
      }
    } else if (node.op() == Op::Larger || node.op() == Op::Smaller) {
      const LogicalForm& threshold = node.arg(0);
      if ((threshold.op() == Op::Argmax || threshold.op() == Op::Argmin) &&
          threshold.symbol() == node.symbol() && is_unfiltered_base(threshold.arg(0))) {
        flagged = true;
      }
    }
  });
  return flagged;
}

}  // namespace granno
