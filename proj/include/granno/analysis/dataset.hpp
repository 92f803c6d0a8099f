#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "granno/grammar/generate.hpp"
#include "granno/logic/logical_form.hpp"
#include "granno/logic/schema.hpp"

namespace granno {

enum class DatasetKind { Natural, Generated, Annotated };

const char* to_string(DatasetKind kind);

struct Example {
  std::string utterance;
  LogicalForm lf;
};

/// Utterance/logical-form pairs. JSON lines of {utterance, lf}; generated
/// files may use `canonical` instead of `utterance`. Blank lines and lines
/// starting with `#` are skipped.
struct Dataset {
  std::string name;
  DatasetKind kind = DatasetKind::Natural;
  std::vector<Example> examples;

  size_t size() const { return examples.size(); }
  bool empty() const { return examples.empty(); }
  std::vector<LogicalForm> forms() const;

  /// Throws SchemaError if any form is ill-typed under `schema`.
  void validate(const Schema& schema) const;

  static Dataset load(const std::filesystem::path& path, DatasetKind kind);
  static Dataset from_pairs(std::span<const GeneratedPair> pairs, std::string name);
  void save(const std::filesystem::path& path) const;
};

}  // namespace granno
