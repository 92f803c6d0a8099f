#pragma once

#include <string>
#include <vector>

#include "granno/analysis/dataset.hpp"
#include "granno/logic/knowledge_base.hpp"
#include "granno/logic/template.hpp"
#include "granno/scorer/model.hpp"

namespace granno {

struct MemoryEntry {
  std::string utterance;
  LogicalForm lf;
  Template tmpl;
  PreparedText prepared;
  std::vector<std::string> slot_types;  // sorted, for the type filter
};

struct ParserOptions {
  /// Restrict retrieval to entries whose slot types match the input's
  /// entity types when any do.
  bool type_filter = false;
};

/// Nearest-neighbour semantic parser: returns the template of the most
/// similar training utterance, re-filled with the input's entities.
class RetrievalParser {
 public:
  struct Parse {
    LogicalForm lf;
    size_t entry = 0;           // memory index used
    bool used_fallback = false;  // some slot kept the source entity
  };

  RetrievalParser(std::vector<MemoryEntry> memory, const Featurizer& featurizer,
                  const Schema& schema, ScorerModel similarity, ParserOptions options = {});

  /// Highest similarity wins, ties to the smaller utterance. Slots are filled left to right by type; a slot
  /// with no input entity left keeps the source entry's entity.
  Parse parse_detail(const std::string& utterance) const;
  LogicalForm parse(const std::string& utterance) const { return parse_detail(utterance).lf; }

  size_t size() const { return memory_.size(); }
  const std::vector<MemoryEntry>& memory() const { return memory_; }

 private:
  std::vector<MemoryEntry> memory_;
  const Featurizer* featurizer_;
  const Schema* schema_;
  ScorerModel similarity_;
  ParserOptions options_;
};

/// Memorizes distinct (utterance, form) pairs. Throws InsufficientData for
/// an empty dataset, SchemaError for ill-typed forms.
RetrievalParser train_parser(const Dataset& dataset, const Featurizer& featurizer,
                             const Schema& schema, ScorerModel similarity = ScorerModel::s0(),
                             ParserOptions options = {});

struct Evaluation {
  double accuracy = 0.0;
  std::vector<LogicalForm> predictions;  // parallel to the test examples
};

/// Fraction of test examples whose parse executes to the gold denotation.
/// Throws EmptyInput for an empty test set.
Evaluation evaluate(const RetrievalParser& parser, const Dataset& test, const KnowledgeBase& kb);

inline double denotation_accuracy(const RetrievalParser& parser, const Dataset& test,
                                  const KnowledgeBase& kb) {
  return evaluate(parser, test, kb).accuracy;
}

}  // namespace granno
