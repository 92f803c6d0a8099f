#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "granno/grammar/generate.hpp"

namespace granno {

/// JSON-lines record {canonical, lf, depth}.
std::string pair_to_json_line(const GeneratedPair& pair);
GeneratedPair pair_from_json_line(const std::string& line);

/// Reads a generated-pairs file; blank lines and `#` comments are skipped.
std::vector<GeneratedPair> read_pairs(const std::filesystem::path& path);

/// Writes pairs sorted by (canonical, lf) without duplicates. Above
/// `max_in_memory` buffered pairs, sorted runs spill to temporary files
/// next to the output and are merged on finish().
class SortedPairWriter {
 public:
  SortedPairWriter(std::filesystem::path out, size_t max_in_memory = 1'000'000);
  ~SortedPairWriter();
  SortedPairWriter(const SortedPairWriter&) = delete;
  SortedPairWriter& operator=(const SortedPairWriter&) = delete;

  void add(GeneratedPair pair);
  /// Merges everything into the output file; returns the number of lines.
  size_t finish();
  size_t spilled_runs() const { return runs_.size(); }

 private:
  void spill();

  std::filesystem::path out_;
  size_t max_in_memory_;
  std::vector<GeneratedPair> buffer_;
  std::vector<std::filesystem::path> runs_;
  bool finished_ = false;
};

}  // namespace granno
