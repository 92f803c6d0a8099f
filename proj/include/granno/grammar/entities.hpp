#pragma once

#include <map>
#include <string>
#include <vector>

#include "granno/grammar/grammar.hpp"

namespace granno {

/// Entity mentions in surface order. Compare as multisets with
/// same_entities().
using EntityMentions = std::vector<std::string>;

/// Phrase table for entity spotting, built from a grammar's entity lexicon
/// entries and aliases.
class EntityMatcher {
 public:
  EntityMatcher() = default;
  explicit EntityMatcher(const Grammar& grammar);

  void add(const Tokens& phrase, const std::string& entity);

  /// Longest-match, left-to-right, non-overlapping scan.
  EntityMentions extract(const Tokens& tokens) const;
  /// Token positions covered by entity mentions.
  std::vector<bool> mention_mask(const Tokens& tokens) const;

 private:
  struct Match {
    size_t length = 0;
    std::string entity;
  };
  Match longest_at(const Tokens& tokens, size_t pos) const;

  std::map<Tokens, std::string> phrases_;
  size_t max_len_ = 0;
};

/// Entity multiset of `tokens` under the grammar's lexicon.
EntityMentions extract_entities(const Tokens& tokens, const Grammar& grammar);

/// Multiset equality.
bool same_entities(EntityMentions a, EntityMentions b);

}  // namespace granno
