#include "granno/scorer/ranking.hpp"

#include <algorithm>
#include <numeric>

namespace granno {

std::vector<size_t> entity_filtered(const EntityMentions& x_entities,
                                    std::span<const EntityMentions> candidate_entities) {
  auto key = x_entities;
  std::sort(key.begin(), key.end());
  std::vector<size_t> out;
  for (size_t i = 0; i < candidate_entities.size(); ++i) {
    auto c = candidate_entities[i];
    std::sort(c.begin(), c.end());
    if (c == key) out.push_back(i);
  }
  if (out.empty()) {
    out.resize(candidate_entities.size());
    std::iota(out.begin(), out.end(), 0);
  }
  return out;
}

std::vector<Ranked> rank_top_k(std::span<const double> scores,
                               std::span<const std::string> canonicals,
                               std::span<const size_t> eligible, size_t k) {
  std::vector<Ranked> all;
  all.reserve(eligible.size());
  for (size_t i : eligible) all.push_back({i, scores[i]});
  auto better = [&](const Ranked& a, const Ranked& b) {
    if (a.score != b.score) return a.score > b.score;
    return canonicals[a.index] < canonicals[b.index];
  };
  k = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<long>(k), all.end(), better);
  all.resize(k);
  return all;
}

std::vector<Ranked> top_k(const ScorerModel& model, const Featurizer& featurizer, const Tokens& x,
                          std::span<const std::string> candidates, size_t k, bool entity_filter) {
  if (candidates.empty()) throw EmptyCandidates("no candidates to rank");
  if (k == 0) throw Error("top_k: K must be at least 1");
  auto px = featurizer.prepare(x);
  std::vector<PreparedText> prepared;
  prepared.reserve(candidates.size());
  for (const auto& c : candidates) prepared.push_back(featurizer.prepare(tokenize(c)));

  std::vector<size_t> eligible;
  if (entity_filter) {
    std::vector<EntityMentions> ents;
    for (const auto& p : prepared) ents.push_back(p.entities);
    eligible = entity_filtered(px.entities, ents);
  } else {
    eligible.resize(candidates.size());
    std::iota(eligible.begin(), eligible.end(), 0);
  }
  std::vector<double> scores(candidates.size(), 0.0);
  for (size_t i : eligible) scores[i] = model.score(featurizer.featurize(px, prepared[i]));
  return rank_top_k(scores, candidates, eligible, k);
}

}  // namespace granno
