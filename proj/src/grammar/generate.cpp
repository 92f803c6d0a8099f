#include "granno/grammar/generate.hpp"

#include <algorithm>
#include <unordered_map>

#include "granno/logic/structure.hpp"
#include "granno/logic/typing.hpp"

namespace granno {

bool pair_less(const GeneratedPair& a, const GeneratedPair& b) {
  if (a.canonical != b.canonical) return a.canonical < b.canonical;
  return a.lf < b.lf;
}

Generator::Generator(const Grammar& grammar) : grammar_(grammar) {}

std::optional<Generator::TypeSig> Generator::type_of(const Semantics& sem) const {
  if (const auto* lf = std::get_if<LogicalForm>(&sem)) {
    // Fragments only valid inside a larger form: a negated clause types as
    // its clause, a literal as a number.
    if (lf->op() == Op::Literal) return TypeSig{kNumberType, {}};
    const LogicalForm& checked = lf->op() == Op::Negate ? lf->arg(0) : *lf;
    auto t = try_typecheck(checked, grammar_.schema());
    if (!t) return std::nullopt;
    return TypeSig{t->name(), {}};
  }
  const KbConstant* c = grammar_.schema().find(std::get<std::string>(sem));
  if (c == nullptr) return std::nullopt;
  if (c->kind != ConstantKind::Relation && c->kind != ConstantKind::Attribute) return std::nullopt;
  return TypeSig{c->subject_type, c->object_type};
}

namespace {

bool bind_atom(const TypeAtom& atom, const std::string& actual,
               std::map<std::string, std::string>& bindings) {
  if (!atom.variable) return atom.name == actual;
  auto [it, inserted] = bindings.emplace(atom.name, actual);
  return inserted || it->second == actual;
}

std::string resolve(const TypeAtom& atom, const std::map<std::string, std::string>& bindings) {
  if (!atom.variable) return atom.name;
  auto it = bindings.find(atom.name);
  return it == bindings.end() ? std::string() : it->second;
}

}  // namespace

void Generator::offer(std::vector<Pending>& out, const std::string& category,
                      const TypeSpec& declared, const std::map<std::string, std::string>& bindings,
                      std::string canonical, Semantics sem) const {
  auto type = type_of(sem);
  if (!type) return;
  if (resolve(declared.first, bindings) != type->first) return;
  if (declared.second.has_value() != !type->second.empty()) return;
  if (declared.second && resolve(*declared.second, bindings) != type->second) return;
  out.push_back({category, Item{std::move(canonical), std::move(sem), std::move(*type), depth_}});
}

void Generator::apply_rule(const GrammarRule& rule, std::vector<Pending>& out) const {
  const auto refs = rule.refs();
  if (refs.empty()) {
    if (depth_ != 1) return;
    auto sem = Grammar::instantiate(rule.builder, {});
    if (!sem) return;
    Tokens words;
    for (const auto& item : rule.rhs) words.push_back(std::get<std::string>(item));
    offer(out, rule.lhs.name, rule.lhs.type, {}, join_tokens(words), std::move(*sem));
    return;
  }
  if (depth_ < 2) return;

  std::vector<const Item*> chosen(refs.size(), nullptr);
  std::map<std::string, std::string> bindings;

  auto emit = [&]() {
    std::vector<Semantics> children;
    children.reserve(chosen.size());
    for (const auto* it : chosen) children.push_back(it->sem);
    auto sem = Grammar::instantiate(rule.builder, children);
    if (!sem) return;
    std::string canonical;
    size_t k = 0;
    for (const auto& item : rule.rhs) {
      if (!canonical.empty()) canonical.push_back(' ');
      if (const auto* word = std::get_if<std::string>(&item)) {
        canonical += *word;
      } else {
        canonical += chosen[k++]->canonical;
      }
    }
    offer(out, rule.lhs.name, rule.lhs.type, bindings, std::move(canonical), std::move(*sem));
  };

  std::function<void(size_t, bool)> choose = [&](size_t pos, bool has_newest) {
    if (pos == refs.size()) {
      if (has_newest) emit();
      return;
    }
    const CategoryRef& ref = *refs[pos];
    auto cat = chart_.find(ref.name);
    if (cat == chart_.end()) return;
    for (const auto& [type_key, indices] : cat->second.by_type) {
      const TypeSig& sig = cat->second.items[indices.front()].type;
      if (ref.type.second.has_value() != !sig.second.empty()) continue;
      auto saved = bindings;
      bool ok = bind_atom(ref.type.first, sig.first, bindings) &&
                (!ref.type.second || bind_atom(*ref.type.second, sig.second, bindings));
      if (ok) {
        for (size_t idx : indices) {
          const Item& item = cat->second.items[idx];
          chosen[pos] = &item;
          choose(pos + 1, has_newest || item.depth + 1 == depth_);
        }
      }
      bindings = std::move(saved);
    }
  };
  choose(0, false);
}

void Generator::commit(std::vector<Pending>& pending) {
  for (auto& p : pending) {
    Category& cat = chart_[p.category];
    std::string key = p.item.canonical + '\t' + semantics_str(p.item.sem);
    if (!cat.seen.insert(std::move(key)).second) continue;
    cat.by_type[p.item.type.key()].push_back(cat.items.size());
    cat.items.push_back(std::move(p.item));
  }
}

void Generator::step() {
  ++depth_;
  std::vector<Pending> pending;
  if (depth_ == 1) {
    for (const auto& entry : grammar_.lexicon()) {
      offer(pending, entry.category.name, entry.category.type, {}, join_tokens(entry.phrase),
            grammar_.lexicon_semantics(entry));
    }
  }
  for (const auto& rule : grammar_.rules()) apply_rule(rule, pending);
  commit(pending);
}

std::vector<GeneratedPair> Generator::pairs() const {
  std::vector<GeneratedPair> out;
  auto it = chart_.find(grammar_.root());
  if (it == chart_.end()) return out;
  std::unordered_map<std::string, size_t> seen;
  for (const auto& item : it->second.items) {
    const auto* lf = std::get_if<LogicalForm>(&item.sem);
    if (lf == nullptr || lf->op() == Op::Negate || lf->op() == Op::Literal) continue;
    GeneratedPair p{item.canonical, *lf, item.depth};
    auto [pos, inserted] = seen.emplace(p.key(), out.size());
    if (inserted) {
      out.push_back(std::move(p));
    } else {
      out[pos->second].depth = std::min(out[pos->second].depth, p.depth);
    }
  }
  std::sort(out.begin(), out.end(), pair_less);
  return out;
}

size_t Generator::chart_size() const {
  size_t n = 0;
  for (const auto& [name, cat] : chart_) n += cat.items.size();
  return n;
}

std::vector<GeneratedPair> generate(const Grammar& grammar, size_t max_depth) {
  if (max_depth < 1) throw Error("generate: max depth must be at least 1");
  Generator gen(grammar);
  while (gen.depth() < max_depth) gen.step();
  return gen.pairs();
}

std::vector<GeneratedPair> prune(std::span<const GeneratedPair> pairs, const Schema& schema,
                                 PruneOptions options) {
  // Group forms that are equal up to conjunct order.
  std::map<std::string, std::vector<size_t>> groups;
  std::vector<LogicalForm> canonical_forms;
  canonical_forms.reserve(pairs.size());
  for (size_t i = 0; i < pairs.size(); ++i) {
    canonical_forms.push_back(canonical_conjunction_order(pairs[i].lf));
    groups[canonical_forms.back().str()].push_back(i);
  }

  std::vector<bool> keep(pairs.size(), false);
  for (const auto& [canon, members] : groups) {
    std::string chosen;
    for (size_t i : members) {
      if (pairs[i].lf.str() == canon) chosen = canon;
    }
    if (chosen.empty()) {
      chosen = pairs[members.front()].lf.str();
      for (size_t i : members) chosen = std::min(chosen, pairs[i].lf.str());
    }
    for (size_t i : members) keep[i] = pairs[i].lf.str() == chosen;
  }

  std::vector<GeneratedPair> out;
  for (size_t i = 0; i < pairs.size(); ++i) {
    if (!keep[i]) continue;
    if (detect_contradiction(pairs[i].lf)) continue;
    if (options.prune_unlikely && flag_unlikely(pairs[i].lf, schema)) continue;
    out.push_back(pairs[i]);
  }
  return out;
}

}  // namespace granno
