#pragma once

#include <span>
#include <string>
#include <vector>

#include "granno/wmd/embeddings.hpp"

namespace granno {

/// Normalized bag of words (nBOW) with the embedding of each distinct token.
struct BagOfWords {
  std::vector<std::string> tokens;  // distinct, sorted
  std::vector<double> weights;      // sums to 1
  std::vector<std::vector<double>> vectors;
};

/// Builds the bag for `tokens`; OOV tokens are dropped or hashed according
/// to the table's policy. Throws ScoreUndefined when nothing remains.
BagOfWords make_bag(const Tokens& tokens, const EmbeddingTable& table);

/// Exact minimum-cost transport between supplies `a` and demands `b` with
/// row-major cost matrix `cost` (|a| x |b|). Both sides must carry the same
/// total mass.
double transport_cost(std::span<const double> a, std::span<const double> b,
                      std::span<const double> cost);

double euclidean(std::span<const double> u, std::span<const double> v);

/// Word Mover's Distance under Euclidean ground distance.
double wmd(const BagOfWords& x, const BagOfWords& c);
double wmd(const Tokens& x, const Tokens& c, const EmbeddingTable& table);

/// Relaxed lower bound on wmd (each side moves to its nearest neighbour);
/// cheaper, for large candidate pools.
double relaxed_wmd(const BagOfWords& x, const BagOfWords& c);

/// One direction of the relaxation: weighted cost of moving every word of
/// `from` to its nearest word in `to`. Asymmetric.
double nearest_word_cost(const BagOfWords& from, const BagOfWords& to);

/// Unsupervised similarity: -wmd.
double s0_score(const Tokens& x, const Tokens& c, const EmbeddingTable& table);

}  // namespace granno
