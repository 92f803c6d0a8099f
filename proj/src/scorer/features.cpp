#include "granno/scorer/features.hpp"

#include <algorithm>
#include <cmath>

namespace granno {

const std::array<std::string, kFeatureCount>& feature_names() {
  static const std::array<std::string, kFeatureCount> names{
      "wmd_neg",      "cosine_avg",      "token_jaccard", "entity_match",
      "length_ratio", "content_overlap", "x_explained",   "c_explained"};
  return names;
}

namespace {

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  size_t inter = 0;
  for (const auto& t : a) inter += b.contains(t);
  return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

double cosine(const std::vector<double>& u, const std::vector<double>& v) {
  if (u.empty() || v.empty()) return 0.0;
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return std::clamp(dot / std::sqrt(nu * nv), -1.0, 1.0);
}

}  // namespace

Featurizer::Featurizer(const EmbeddingTable& table, EntityMatcher matcher)
    : table_(&table), matcher_(std::move(matcher)) {}

PreparedText Featurizer::prepare(const Tokens& tokens) const {
  PreparedText p;
  p.tokens = tokens;
  try {
    p.bag = make_bag(tokens, *table_);
  } catch (const ScoreUndefined&) {
  }
  size_t counted = 0;
  for (const auto& t : tokens) {
    auto v = table_->lookup(t);
    if (!v) continue;
    if (p.mean.empty()) p.mean.assign(v->size(), 0.0);
    for (size_t i = 0; i < v->size(); ++i) p.mean[i] += (*v)[i];
    ++counted;
  }
  for (auto& x : p.mean) x /= static_cast<double>(counted);
  p.entities = matcher_.extract(tokens);
  auto mask = matcher_.mention_mask(tokens);
  for (size_t i = 0; i < tokens.size(); ++i) {
    p.token_set.insert(tokens[i]);
    if (!mask[i]) p.content_set.insert(tokens[i]);
  }
  return p;
}

PairFeatures Featurizer::featurize(const PreparedText& x, const PreparedText& c) const {
  PairFeatures f;
  if (x.bag && c.bag) {
    f.wmd_neg = -wmd(*x.bag, *c.bag);
    f.x_explained = -nearest_word_cost(*x.bag, *c.bag);
    f.c_explained = -nearest_word_cost(*c.bag, *x.bag);
  } else {
    f.wmd_defined = false;
  }
  f.cosine_avg = cosine(x.mean, c.mean);
  f.token_jaccard = jaccard(x.token_set, c.token_set);
  f.entity_match = same_entities(x.entities, c.entities) ? 1.0 : 0.0;
  size_t lx = x.tokens.size(), lc = c.tokens.size();
  f.length_ratio = std::max(lx, lc) == 0
                       ? 1.0
                       : static_cast<double>(std::min(lx, lc)) / static_cast<double>(std::max(lx, lc));
  f.content_overlap = jaccard(x.content_set, c.content_set);
  return f;
}

}  // namespace granno
