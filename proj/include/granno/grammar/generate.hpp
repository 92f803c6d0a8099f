#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "granno/grammar/grammar.hpp"

namespace granno {

/// A canonical utterance with its logical form and minimal derivation depth.
struct GeneratedPair {
  std::string canonical;
  LogicalForm lf;
  size_t depth = 1;

  Tokens tokens() const { return tokenize(canonical); }
  /// Deduplication key: (canonical, serialized lf).
  std::string key() const { return canonical + '\t' + lf.str(); }
  bool operator==(const GeneratedPair&) const = default;
};

/// Orders by canonical string, then by logical form.
bool pair_less(const GeneratedPair& a, const GeneratedPair& b);

/// Depth-by-depth chart generator.
///
/// Depth counts rule applications: lexicon entries and rules without
/// category references sit at depth 1, any other rule application at one
/// more than its deepest child. Each depth only combines children of which
/// at least one was new at the previous depth, so every item is found at
/// its minimal depth exactly once. Items whose logical form fails to
/// type-check, or whose type disagrees with the category's declared type,
/// are dropped. Non-root categories may hold a negated clause (typed as the
/// clause) or a bare literal (typed as a number); the root may not.
class Generator {
 public:
  explicit Generator(const Grammar& grammar);

  /// Extends the chart by one depth level.
  void step();
  size_t depth() const { return depth_; }

  /// Root-category pairs found so far, sorted and deduplicated.
  std::vector<GeneratedPair> pairs() const;
  /// Total items across all categories (root and internal).
  size_t chart_size() const;

 private:
  struct TypeSig {
    std::string first;
    std::string second;  // empty for sets and numbers
    std::string key() const { return second.empty() ? first : first + ">" + second; }
  };
  struct Item {
    std::string canonical;
    Semantics sem;
    TypeSig type;
    size_t depth;
  };
  struct Category {
    std::vector<Item> items;
    std::unordered_set<std::string> seen;
    std::map<std::string, std::vector<size_t>> by_type;
  };
  struct Pending {
    std::string category;
    Item item;
  };

  std::optional<TypeSig> type_of(const Semantics& sem) const;
  void apply_rule(const GrammarRule& rule, std::vector<Pending>& out) const;
  void offer(std::vector<Pending>& out, const std::string& category, const TypeSpec& declared,
             const std::map<std::string, std::string>& bindings, std::string canonical,
             Semantics sem) const;
  void commit(std::vector<Pending>& pending);

  const Grammar& grammar_;
  std::map<std::string, Category> chart_;
  size_t depth_ = 0;
};

/// All root derivations of depth <= max_depth. Requires max_depth >= 1.
std::vector<GeneratedPair> generate(const Grammar& grammar, size_t max_depth);

struct PruneOptions {
  bool prune_unlikely = false;
};

/// Drops contradictions and commutative duplicates (keeping, per group of
/// forms equal up to conjunct order, the canonically ordered form or else
/// the smallest one), and optionally forms flagged as unlikely.
std::vector<GeneratedPair> prune(std::span<const GeneratedPair> pairs, const Schema& schema,
                                 PruneOptions options = {});

}  // namespace granno
