#include "oracles/brute_executor.hpp"

#include <stdexcept>
#include <vector>

namespace granno::oracle {

namespace {

struct Value {
  bool numeric = false;
  double number = 0;
  std::vector<bool> members;  // indexed like Brute::universe_
};

class Brute {
 public:
  explicit Brute(const KnowledgeBase& kb) : kb_(kb) {
    for (const auto& e : kb.all_entities()) universe_.push_back(e);
  }

  Value eval(const LogicalForm& lf) {
    Value out;
    out.members.assign(universe_.size(), false);
    switch (lf.op()) {
      case Op::Entity:
        for (size_t i = 0; i < universe_.size(); ++i) out.members[i] = universe_[i] == lf.symbol();
        return out;
      case Op::Unary: {
        const auto& m = kb_.members(lf.symbol());
        for (size_t i = 0; i < universe_.size(); ++i) out.members[i] = m.count(universe_[i]) > 0;
        return out;
      }
      case Op::Join: {
        Value arg = eval(lf.arg(0));
        for (size_t x = 0; x < universe_.size(); ++x) {
          for (size_t y = 0; y < universe_.size(); ++y) {
            if (!arg.members[y]) continue;
            for (const auto& f : kb_.facts(lf.symbol())) {
              if (f.first == universe_[x] && f.second == universe_[y]) out.members[x] = true;
            }
          }
        }
        return out;
      }
      case Op::Intersect: {
        Value l = operand(lf.arg(0));
        Value r = operand(lf.arg(1));
        for (size_t i = 0; i < universe_.size(); ++i) out.members[i] = l.members[i] && r.members[i];
        return out;
      }
      case Op::Argmax:
      case Op::Argmin: {
        Value over = eval(lf.arg(0));
        for (size_t x = 0; x < universe_.size(); ++x) {
          if (!over.members[x]) continue;
          auto vx = kb_.value(universe_[x], lf.symbol());
          if (!vx) continue;
          bool extreme = true;
          for (size_t y = 0; y < universe_.size(); ++y) {
            if (!over.members[y]) continue;
            auto vy = kb_.value(universe_[y], lf.symbol());
            if (!vy) continue;
            if (lf.op() == Op::Argmax ? *vy > *vx : *vy < *vx) extreme = false;
          }
          out.members[x] = extreme;
        }
        return out;
      }
      case Op::Larger:
      case Op::Smaller: {
        const auto& attr = kb_.schema().at(lf.symbol());
        const LogicalForm& t = lf.arg(0);
        Value threshold = t.op() == Op::Literal ? literal(t.number()) : eval(t);
        for (size_t x = 0; x < universe_.size(); ++x) {
          if (kb_.schema().at(universe_[x]).type() != attr.subject_type) continue;
          auto vx = kb_.value(universe_[x], lf.symbol());
          if (!vx) continue;
          auto beats = [&](double bound) {
            return lf.op() == Op::Larger ? *vx > bound : *vx < bound;
          };
          if (threshold.numeric) {
            out.members[x] = beats(threshold.number);
            continue;
          }
          bool any = false;
          bool all = true;
          for (size_t y = 0; y < universe_.size(); ++y) {
            if (!threshold.members[y]) continue;
            auto vy = kb_.value(universe_[y], lf.symbol());
            if (!vy) continue;
            any = true;
            all = all && beats(*vy);
          }
          out.members[x] = any && all;
        }
        return out;
      }
      case Op::Count: {
        Value inner = eval(lf.arg(0));
        double n = 0;
        for (bool b : inner.members) n += b ? 1 : 0;
        return literal(n);
      }
      case Op::Sum: {
        Value inner = eval(lf.arg(0));
        double total = 0;
        for (size_t i = 0; i < universe_.size(); ++i) {
          if (!inner.members[i]) continue;
          if (auto v = kb_.value(universe_[i], lf.symbol())) total += *v;
        }
        return literal(total);
      }
      case Op::Literal:
        return literal(lf.number());
      default:
        throw std::logic_error("brute_execute: unsupported node " + lf.str());
    }
  }

  Denotation to_denotation(const Value& v) const {
    if (v.numeric) return v.number;
    EntitySet s;
    for (size_t i = 0; i < universe_.size(); ++i) {
      if (v.members[i]) s.insert(universe_[i]);
    }
    return s;
  }

 private:
  // Negation inside a conjunction: complement within the entities of the
  // negated form's type.
  Value operand(const LogicalForm& lf) {
    if (lf.op() != Op::Negate) return eval(lf);
    Value inner = eval(lf.arg(0));
    const std::string type = result_type(lf.arg(0));
    Value out;
    out.members.assign(universe_.size(), false);
    for (size_t i = 0; i < universe_.size(); ++i) {
      out.members[i] = kb_.schema().at(universe_[i]).type() == type && !inner.members[i];
    }
    return out;
  }

  std::string result_type(const LogicalForm& lf) const {
    const auto& s = kb_.schema();
    switch (lf.op()) {
      case Op::Entity:
      case Op::Unary:
        return s.at(lf.symbol()).type();
      case Op::Join:
      case Op::Argmax:
      case Op::Argmin:
      case Op::Larger:
      case Op::Smaller:
        return s.at(lf.symbol()).subject_type;
      case Op::Intersect:
        return lf.arg(0).op() == Op::Negate ? result_type(lf.arg(1)) : result_type(lf.arg(0));
      case Op::Negate:
        return result_type(lf.arg(0));
      default:
        throw std::logic_error("no entity type for " + lf.str());
    }
  }

  Value literal(double n) const {
    Value v;
    v.numeric = true;
    v.number = n;
    return v;
  }

  const KnowledgeBase& kb_;
  std::vector<std::string> universe_;
};

}  // namespace

Denotation brute_execute(const LogicalForm& lf, const KnowledgeBase& kb) {
  Brute b(kb);
  return b.to_denotation(b.eval(lf));
}

}  // namespace granno::oracle
