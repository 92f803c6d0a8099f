#include "granno/logic/typing.hpp"

#include "granno/logic/errors.hpp"

namespace granno {

namespace {

const KbConstant& lookup(const Schema& schema, const std::string& id, ConstantKind kind) {
  const KbConstant* c = schema.find(id);
  if (c == nullptr) throw TypeError("undeclared constant '" + id + "'");
  if (c->kind != kind) {
    throw TypeError("constant '" + id + "' is a " + to_string(c->kind) + ", expected " +
                    to_string(kind));
  }
  return *c;
}

class Checker {
 public:
  explicit Checker(const Schema& schema) : schema_(schema) {}

  LfType check(const LogicalForm& lf) {
    switch (lf.op()) {
      case Op::Entity:
        return LfType::set(lookup(schema_, lf.symbol(), ConstantKind::Entity).type());
      case Op::Slot:
        if (!schema_.has_type(lf.symbol())) {
          throw TypeError("slot of unknown type '" + lf.symbol() + "'");
        }
        return LfType::set(lf.symbol());
      case Op::Unary:
        return LfType::set(lookup(schema_, lf.symbol(), ConstantKind::Unary).type());
      case Op::Join: {
        const auto& rel = lookup(schema_, lf.symbol(), ConstantKind::Relation);
        expect_set(check(lf.arg(0)), rel.object_type, lf);
        return LfType::set(rel.subject_type);
      }
      case Op::Intersect:
        return check_conjunction(lf);
      case Op::Negate:
        throw TypeError("negation outside a conjunction: " + lf.str());
      case Op::Argmax:
      case Op::Argmin:
      case Op::Sum: {
        const auto& attr = lookup(schema_, lf.symbol(), ConstantKind::Attribute);
        expect_set(check(lf.arg(0)), attr.subject_type, lf);
        return lf.op() == Op::Sum ? LfType::number() : LfType::set(attr.subject_type);
      }
      case Op::Larger:
      case Op::Smaller: {
        const auto& attr = lookup(schema_, lf.symbol(), ConstantKind::Attribute);
        const LogicalForm& threshold = lf.arg(0);
        if (threshold.op() != Op::Literal) {
          LfType t = check(threshold);
          if (!t.numeric) expect_set(t, attr.subject_type, lf);
        }
        return LfType::set(attr.subject_type);
      }
      case Op::Count: {
        LfType inner = check(lf.arg(0));
        if (inner.numeric) throw TypeError("count over a number: " + lf.str());
        return LfType::number();
      }
      case Op::Literal:
        throw TypeError("literal outside a comparative threshold: " + lf.str());
    }
    throw TypeError("unhandled operator");
  }

 private:
  LfType check_conjunction(const LogicalForm& lf) {
    std::optional<std::string> type;
    bool has_positive = false;
    for (const auto& conjunct : flatten_conjunction(lf)) {
      LfType t;
      if (conjunct.op() == Op::Negate) {
        t = check(conjunct.arg(0));
      } else {
        t = check(conjunct);
        has_positive = true;
      }
      if (t.numeric) throw TypeError("conjunction over a number: " + lf.str());
      if (type && *type != t.entity_type) {
        throw TypeError("conjunction mixes types " + *type + " and " + t.entity_type + ": " +
                        lf.str());
      }
      type = t.entity_type;
    }
    if (!has_positive) throw TypeError("conjunction of negations only: " + lf.str());
    return LfType::set(*type);
  }

  static void expect_set(const LfType& got, const std::string& want, const LogicalForm& where) {
    if (got.numeric || got.entity_type != want) {
      throw TypeError("expected " + want + " set, got " + got.name() + " in " + where.str());
    }
  }

  const Schema& schema_;
};

}  // namespace

const std::string& LfType::name() const {
  static const std::string number_name = kNumberType;
  return numeric ? number_name : entity_type;
}

LfType typecheck(const LogicalForm& lf, const Schema& schema) { return Checker(schema).check(lf); }

std::optional<LfType> try_typecheck(const LogicalForm& lf, const Schema& schema) {
  try {
    return typecheck(lf, schema);
  } catch (const TypeError&) {
    return std::nullopt;
  }
}

}  // namespace granno
