#include "granno/wmd/embeddings.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace granno {

EmbeddingTable::EmbeddingTable(size_t dimension, OovPolicy oov) : dim_(dimension), oov_(oov) {
  if (dim_ == 0) throw FormatError("embedding dimension must be at least 1");
}

void EmbeddingTable::add(const std::string& token, std::vector<double> vec) {
  if (vec.size() != dim_) {
    throw FormatError("embedding for '" + token + "' has " + std::to_string(vec.size()) +
                      " components, expected " + std::to_string(dim_));
  }
  vectors_[token] = std::move(vec);
}

std::optional<std::vector<double>> EmbeddingTable::lookup(const std::string& token) const {
  if (auto it = vectors_.find(token); it != vectors_.end()) return it->second;
  if (oov_ == OovPolicy::Drop) return std::nullopt;
  return hashed_unit_vector(token, dim_);
}

std::vector<double> hashed_unit_vector(const std::string& token, size_t dimension) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : token) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  std::mt19937_64 rng(h);
  std::vector<double> v(dimension);
  double norm = 0.0;
  while (norm == 0.0) {
    norm = 0.0;
    for (auto& x : v) {
      // Raw engine output keeps this identical across standard libraries.
      x = 2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53 - 1.0;
      norm += x * x;
    }
  }
  norm = std::sqrt(norm);
  for (auto& x : v) x /= norm;
  return v;
}

namespace {

bool parse_size(const std::string& s, size_t& out) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) return false;
  out = std::stoul(s);
  return true;
}

}  // namespace

EmbeddingTable parse_embeddings(std::istream& in,
                                const std::unordered_set<std::string>* vocab_filter,
                                OovPolicy oov) {
  std::optional<EmbeddingTable> table;
  std::optional<size_t> header_dim;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream row(line);
    std::vector<std::string> fields;
    for (std::string f; row >> f;) fields.push_back(f);
    if (fields.empty()) continue;

    size_t n = 0, d = 0;
    if (!table && !header_dim && fields.size() == 2 && parse_size(fields[0], n) &&
        parse_size(fields[1], d)) {
      header_dim = d;
      continue;
    }
    if (fields.size() < 2) throw FormatError("line " + std::to_string(lineno) + ": no vector");
    std::vector<double> vec;
    vec.reserve(fields.size() - 1);
    for (size_t i = 1; i < fields.size(); ++i) {
      char* end = nullptr;
      double v = std::strtod(fields[i].c_str(), &end);
      if (*end != '\0') {
        throw FormatError("line " + std::to_string(lineno) + ": bad number '" + fields[i] + "'");
      }
      vec.push_back(v);
    }
    if (!table) {
      if (header_dim && *header_dim != vec.size()) {
        throw FormatError("header declares dimension " + std::to_string(*header_dim) +
                          " but rows have " + std::to_string(vec.size()));
      }
      table.emplace(vec.size(), oov);
    }
    if (vec.size() != table->dimension()) {
      throw FormatError("line " + std::to_string(lineno) + ": dimension " +
                        std::to_string(vec.size()) + ", expected " +
                        std::to_string(table->dimension()));
    }
    if (vocab_filter && !vocab_filter->contains(fields[0])) continue;
    table->add(fields[0], std::move(vec));
  }
  if (!table) throw FormatError("embedding file has no vectors");
  return std::move(*table);
}

EmbeddingTable load_embeddings(const std::filesystem::path& path,
                               const std::unordered_set<std::string>* vocab_filter,
                               OovPolicy oov) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return parse_embeddings(in, vocab_filter, oov);
}

}  // namespace granno
