#pragma once

#include <array>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "granno/grammar/entities.hpp"
#include "granno/wmd/wmd.hpp"

namespace granno {

inline constexpr size_t kFeatureCount = 8;

/// Names in vector order.
const std::array<std::string, kFeatureCount>& feature_names();

struct PairFeatures {
  double wmd_neg = 0.0;
  double cosine_avg = 0.0;       // cosine of the mean embeddings
  double token_jaccard = 0.0;
  double entity_match = 0.0;     // 1 iff entity multisets agree
  double length_ratio = 0.0;     // shorter / longer token count
  double content_overlap = 0.0;  // Jaccard over non-entity tokens
  /// Negated one-way nearest-word costs: how well each side's words are
  /// explained by the other.
  double x_explained = 0.0;
  double c_explained = 0.0;
  /// False when wmd was undefined (a bag empty after OOV dropping); models
  /// substitute their training minimum for the transport features.
  bool wmd_defined = true;

  std::array<double, kFeatureCount> values() const {
    return {wmd_neg,      cosine_avg,      token_jaccard, entity_match,
            length_ratio, content_overlap, x_explained,   c_explained};
  }
  std::array<double, kFeatureCount> values(double wmd_floor) const {
    auto v = values();
    if (!wmd_defined) v[0] = v[6] = v[7] = wmd_floor;
    return v;
  }
};

/// One side of a pair, analysed once and reused across many pairs.
struct PreparedText {
  Tokens tokens;
  std::optional<BagOfWords> bag;  // empty when every token was dropped
  std::vector<double> mean;       // empty when no token has a vector
  EntityMentions entities;
  std::set<std::string> token_set;
  std::set<std::string> content_set;
};

class Featurizer {
 public:
  Featurizer(const EmbeddingTable& table, EntityMatcher matcher);

  PreparedText prepare(const Tokens& tokens) const;
  PairFeatures featurize(const PreparedText& x, const PreparedText& c) const;
  PairFeatures operator()(const Tokens& x, const Tokens& c) const {
    return featurize(prepare(x), prepare(c));
  }

  const EmbeddingTable& table() const { return *table_; }
  const EntityMatcher& matcher() const { return matcher_; }

 private:
  const EmbeddingTable* table_;
  EntityMatcher matcher_;
};

}  // namespace granno
