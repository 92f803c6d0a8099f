#pragma once

#include <span>
#include <string>
#include <vector>

#include "granno/scorer/model.hpp"

namespace granno {

class EmptyCandidates : public Error {
 public:
  using Error::Error;
};

struct Ranked {
  size_t index;  // into the candidate list
  double score;
};

/// Candidates whose entity multiset equals `x_entities`; every index when
/// none qualifies.
std::vector<size_t> entity_filtered(const EntityMentions& x_entities,
                                    std::span<const EntityMentions> candidate_entities);

/// Best `k` of `eligible` by descending score, ties broken by the smaller
/// canonical string. Deterministic.
std::vector<Ranked> rank_top_k(std::span<const double> scores,
                               std::span<const std::string> canonicals,
                               std::span<const size_t> eligible, size_t k);

/// Scores every candidate against `x` and returns the top `k`.
/// Throws EmptyCandidates for an empty list.
std::vector<Ranked> top_k(const ScorerModel& model, const Featurizer& featurizer, const Tokens& x,
                          std::span<const std::string> candidates, size_t k, bool entity_filter);

}  // namespace granno
