#include "granno/grammar/entities.hpp"

#include <algorithm>

namespace granno {

EntityMatcher::EntityMatcher(const Grammar& grammar) {
  for (const auto& entry : grammar.lexicon()) {
    const KbConstant* c = grammar.schema().find(entry.constant);
    if (c != nullptr && c->kind == ConstantKind::Entity) add(entry.phrase, entry.constant);
  }
  for (const auto& alias : grammar.aliases()) add(alias.phrase, alias.entity);
}

void EntityMatcher::add(const Tokens& phrase, const std::string& entity) {
  if (phrase.empty()) return;
  phrases_.emplace(phrase, entity);
  max_len_ = std::max(max_len_, phrase.size());
}

EntityMatcher::Match EntityMatcher::longest_at(const Tokens& tokens, size_t pos) const {
  size_t limit = std::min(max_len_, tokens.size() - pos);
  for (size_t len = limit; len > 0; --len) {
    Tokens probe(tokens.begin() + static_cast<long>(pos),
                 tokens.begin() + static_cast<long>(pos + len));
    if (auto it = phrases_.find(probe); it != phrases_.end()) return {len, it->second};
  }
  return {};
}

EntityMentions EntityMatcher::extract(const Tokens& tokens) const {
  EntityMentions out;
  for (size_t pos = 0; pos < tokens.size();) {
    Match m = longest_at(tokens, pos);
    if (m.length == 0) {
      ++pos;
      continue;
    }
    out.push_back(m.entity);
    pos += m.length;
  }
  return out;
}

std::vector<bool> EntityMatcher::mention_mask(const Tokens& tokens) const {
  std::vector<bool> mask(tokens.size(), false);
  for (size_t pos = 0; pos < tokens.size();) {
    Match m = longest_at(tokens, pos);
    if (m.length == 0) {
      ++pos;
      continue;
    }
    for (size_t i = 0; i < m.length; ++i) mask[pos + i] = true;
    pos += m.length;
  }
  return mask;
}

EntityMentions extract_entities(const Tokens& tokens, const Grammar& grammar) {
  return EntityMatcher(grammar).extract(tokens);
}

bool same_entities(EntityMentions a, EntityMentions b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a == b;
}

}  // namespace granno
