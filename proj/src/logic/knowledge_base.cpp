#include "granno/logic/knowledge_base.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "granno/logic/errors.hpp"
#include "granno/logic/typing.hpp"

namespace granno {

namespace {
const EntitySet kEmptySet;
const std::vector<std::pair<std::string, std::string>> kNoFacts;
}  // namespace

KnowledgeBase::KnowledgeBase(Schema schema) : schema_(std::move(schema)) {
  for (const auto* c : schema_.constants()) {
    if (c->kind == ConstantKind::Entity) by_type_[c->type()].insert(c->id);
  }
}

const KbConstant& KnowledgeBase::require(const std::string& id, ConstantKind kind) const {
  const KbConstant* c = schema_.find(id);
  if (c == nullptr) throw SchemaError("fact references undeclared constant '" + id + "'");
  if (c->kind != kind) {
    throw SchemaError("'" + id + "' is a " + to_string(c->kind) + ", expected " + to_string(kind));
  }
  return *c;
}

void KnowledgeBase::add_fact(const std::string& subject, const std::string& relation,
                             const std::string& object) {
  const auto& rel = require(relation, ConstantKind::Relation);
  const auto& s = require(subject, ConstantKind::Entity);
  const auto& o = require(object, ConstantKind::Entity);
  if (s.type() != rel.subject_type || o.type() != rel.object_type) {
    throw SchemaError("fact (" + subject + ", " + relation + ", " + object + ") is mistyped");
  }
  auto& list = facts_[relation];
  std::pair<std::string, std::string> fact{subject, object};
  if (std::find(list.begin(), list.end(), fact) == list.end()) list.push_back(std::move(fact));
}

void KnowledgeBase::set_value(const std::string& subject, const std::string& attribute,
                              double value) {
  const auto& attr = require(attribute, ConstantKind::Attribute);
  const auto& s = require(subject, ConstantKind::Entity);
  if (s.type() != attr.subject_type) {
    throw SchemaError("attribute " + attribute + " does not apply to " + subject);
  }
  auto [it, inserted] = values_[attribute].emplace(subject, value);
  if (!inserted && it->second != value) {
    throw SchemaError("attribute " + attribute + " of " + subject + " has two values");
  }
}

void KnowledgeBase::add_member(const std::string& unary, const std::string& entity) {
  const auto& u = require(unary, ConstantKind::Unary);
  const auto& e = require(entity, ConstantKind::Entity);
  if (e.type() != u.type()) throw SchemaError(entity + " cannot be a member of " + unary);
  explicit_members_[unary].insert(entity);
}

const EntitySet& KnowledgeBase::members(const std::string& unary) const {
  const KbConstant* u = schema_.find(unary);
  if (u == nullptr) throw UnknownConstant(unary);
  if (auto it = explicit_members_.find(unary); it != explicit_members_.end()) return it->second;
  return entities_of_type(u->type());
}

const EntitySet& KnowledgeBase::entities_of_type(const std::string& type) const {
  auto it = by_type_.find(type);
  return it == by_type_.end() ? kEmptySet : it->second;
}

const std::vector<std::pair<std::string, std::string>>& KnowledgeBase::facts(
    const std::string& relation) const {
  auto it = facts_.find(relation);
  return it == facts_.end() ? kNoFacts : it->second;
}

std::optional<double> KnowledgeBase::value(const std::string& entity,
                                           const std::string& attribute) const {
  auto a = values_.find(attribute);
  if (a == values_.end()) return std::nullopt;
  auto v = a->second.find(entity);
  if (v == a->second.end()) return std::nullopt;
  return v->second;
}

EntitySet KnowledgeBase::all_entities() const {
  EntitySet out;
  for (const auto& [type, set] : by_type_) out.insert(set.begin(), set.end());
  return out;
}

KnowledgeBase KnowledgeBase::from_json(const nlohmann::json& doc) {
  KnowledgeBase kb(Schema::from_json(doc));
  for (const auto& jc : doc.at("constants")) {
    if (jc.contains("members")) {
      for (const auto& m : jc.at("members")) kb.add_member(jc.at("id"), m.get<std::string>());
    }
  }
  if (doc.contains("facts")) {
    for (const auto& f : doc.at("facts")) {
      if (!f.is_array() || f.size() != 3) throw SchemaError("fact must be [subject, relation, object]");
      const auto subject = f[0].get<std::string>();
      const auto relation = f[1].get<std::string>();
      if (f[2].is_number()) {
        kb.set_value(subject, relation, f[2].get<double>());
      } else {
        kb.add_fact(subject, relation, f[2].get<std::string>());
      }
    }
  }
  return kb;
}

KnowledgeBase KnowledgeBase::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open knowledge base " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return from_json(doc);
}

nlohmann::json KnowledgeBase::to_json() const {
  nlohmann::json doc = schema_.to_json();
  for (auto& jc : doc["constants"]) {
    if (auto it = explicit_members_.find(jc["id"]); it != explicit_members_.end()) {
      jc["members"] = it->second;
    }
  }
  auto& facts = doc["facts"] = nlohmann::json::array();
  for (const auto& [rel, list] : facts_) {
    for (const auto& [s, o] : list) facts.push_back({s, rel, o});
  }
  for (const auto& [attr, vals] : values_) {
    for (const auto& [s, v] : vals) facts.push_back({s, attr, v});
  }
  return doc;
}

bool Denotation::operator==(const Denotation& other) const {
  if (is_number() != other.is_number()) return false;
  if (!is_number()) return set() == other.set();
  double a = number();
  double b = other.number();
  return std::fabs(a - b) <= 1e-9 * std::max({1.0, std::fabs(a), std::fabs(b)});
}

std::string Denotation::str() const {
  if (is_number()) return format_number(number());
  std::string out = "{";
  bool first = true;
  for (const auto& e : set()) {
    if (!first) out += ", ";
    out += e;
    first = false;
  }
  return out + "}";
}

namespace {

class Executor {
 public:
  explicit Executor(const KnowledgeBase& kb) : kb_(kb) {}

  Denotation eval(const LogicalForm& lf) {
    switch (lf.op()) {
      case Op::Entity:
        return EntitySet{lf.symbol()};
      case Op::Unary:
        return kb_.members(lf.symbol());
      case Op::Join: {
        EntitySet arg = eval(lf.arg(0)).set();
        EntitySet out;
        for (const auto& [s, o] : kb_.facts(lf.symbol())) {
          if (arg.contains(o)) out.insert(s);
        }
        return out;
      }
      case Op::Intersect:
        return conjunction(lf);
      case Op::Argmax:
      case Op::Argmin:
        return superlative(lf);
      case Op::Larger:
      case Op::Smaller:
        return comparative(lf);
      case Op::Count:
        return static_cast<double>(eval(lf.arg(0)).set().size());
      case Op::Sum: {
        double total = 0.0;
        const Denotation over = eval(lf.arg(0));
        for (const auto& e : over.set()) {
          if (auto v = kb_.value(e, lf.symbol())) total += *v;
        }
        return total;
      }
      case Op::Literal:
        return lf.number();
      case Op::Slot:
      case Op::Negate:
        break;
    }
    throw TypeError("cannot execute " + lf.str());
  }

 private:
  Denotation conjunction(const LogicalForm& lf) {
    std::optional<EntitySet> acc;
    std::vector<EntitySet> excluded;
    for (const auto& c : flatten_conjunction(lf)) {
      if (c.op() == Op::Negate) {
        excluded.push_back(eval(c.arg(0)).set());
        continue;
      }
      EntitySet s = eval(c).set();
      if (!acc) {
        acc = std::move(s);
      } else {
        EntitySet kept;
        std::set_intersection(acc->begin(), acc->end(), s.begin(), s.end(),
                              std::inserter(kept, kept.end()));
        acc = std::move(kept);
      }
    }
    for (const auto& ex : excluded) {
      for (const auto& e : ex) acc->erase(e);
    }
    return std::move(*acc);
  }

  Denotation superlative(const LogicalForm& lf) {
    EntitySet over = eval(lf.arg(0)).set();
    std::optional<double> best;
    EntitySet out;
    for (const auto& e : over) {
      auto v = kb_.value(e, lf.symbol());
      if (!v) continue;
      bool better = !best || (lf.op() == Op::Argmax ? *v > *best : *v < *best);
      if (better) {
        best = v;
        out = {e};
      } else if (*v == *best) {
        out.insert(e);
      }
    }
    return out;
  }

  Denotation comparative(const LogicalForm& lf) {
    const std::string& attr = lf.symbol();
    const KbConstant& a = kb_.schema().at(attr);
    Denotation threshold = eval(lf.arg(0));
    std::optional<double> bound;
    if (threshold.is_number()) {
      bound = threshold.number();
    } else {
      // Compare against every value of the threshold set.
      for (const auto& e : threshold.set()) {
        auto v = kb_.value(e, attr);
        if (!v) continue;
        if (!bound) {
          bound = v;
        } else {
          bound = lf.op() == Op::Larger ? std::max(*bound, *v) : std::min(*bound, *v);
        }
      }
    }
    EntitySet out;
    if (!bound) return out;
    for (const auto& e : kb_.entities_of_type(a.subject_type)) {
      auto v = kb_.value(e, attr);
      if (!v) continue;
      if (lf.op() == Op::Larger ? *v > *bound : *v < *bound) out.insert(e);
    }
    return out;
  }

  const KnowledgeBase& kb_;
};

void require_constants(const LogicalForm& lf, const Schema& schema) {
  lf.visit([&](const LogicalForm& node) {
    switch (node.op()) {
      case Op::Entity:
      case Op::Unary:
      case Op::Join:
      case Op::Argmax:
      case Op::Argmin:
      case Op::Larger:
      case Op::Smaller:
      case Op::Sum:
        if (!schema.contains(node.symbol())) throw UnknownConstant(node.symbol());
        break;
      default:
        break;
    }
  });
}

}  // namespace

Denotation execute(const LogicalForm& lf, const KnowledgeBase& kb) {
  require_constants(lf, kb.schema());
  typecheck(lf, kb.schema());
  return Executor(kb).eval(lf);
}

}  // namespace granno
