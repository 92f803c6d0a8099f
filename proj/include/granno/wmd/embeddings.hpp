#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "granno/grammar/tokenize.hpp"
#include "granno/logic/errors.hpp"

namespace granno {

/// Raised when a bag of words ends up empty after OOV handling.
class ScoreUndefined : public Error {
 public:
  using Error::Error;
};

enum class OovPolicy {
  /// Unknown tokens get a random unit vector seeded by a hash of the token.
  HashedRandom,
  Drop,
};

/// Static word vectors of a fixed dimension. Immutable once loaded.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(size_t dimension, OovPolicy oov = OovPolicy::HashedRandom);

  void add(const std::string& token, std::vector<double> vec);  // throws FormatError on bad dim

  size_t dimension() const { return dim_; }
  size_t size() const { return vectors_.size(); }
  OovPolicy oov_policy() const { return oov_; }
  bool contains(const std::string& token) const { return vectors_.contains(token); }

  /// Vector for `token`; nullopt for OOV tokens under the drop policy.
  std::optional<std::vector<double>> lookup(const std::string& token) const;

 private:
  size_t dim_;
  OovPolicy oov_;
  std::unordered_map<std::string, std::vector<double>> vectors_;
};

/// Deterministic unit vector for an out-of-vocabulary token.
std::vector<double> hashed_unit_vector(const std::string& token, size_t dimension);

/// Reads whitespace-separated `token v1 ... vd` rows. A leading `N d` header
/// is skipped. The dimension comes from the first row and is enforced.
EmbeddingTable load_embeddings(const std::filesystem::path& path,
                               const std::unordered_set<std::string>* vocab_filter = nullptr,
                               OovPolicy oov = OovPolicy::HashedRandom);
EmbeddingTable parse_embeddings(std::istream& in,
                                const std::unordered_set<std::string>* vocab_filter = nullptr,
                                OovPolicy oov = OovPolicy::HashedRandom);

}  // namespace granno
