#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "granno/analysis/dataset.hpp"
#include "granno/grammar/grammar.hpp"
#include "granno/logic/knowledge_base.hpp"

namespace granno {

/// Which natural examples have their template generated.
struct Partition {
  std::vector<size_t> covered;
  std::vector<size_t> disjoint;
};

struct CoverageResult {
  double fraction = 0.0;
  Partition partition;
};

/// Fraction of `nat` examples whose template (modulo conjunct order)
/// appears among `on`'s templates. Throws SchemaError when either dataset
/// does not type-check under `schema`, EmptyInput when `nat` is empty.
CoverageResult template_coverage(const Dataset& nat, const Dataset& on, const Schema& schema);

struct CoverageRow {
  size_t depth = 0;
  size_t generated = 0;  // |D_on| after pruning
  double coverage = 0.0;
  Partition partition;
};

struct CoverageReport {
  std::vector<CoverageRow> rows;
  nlohmann::json to_json() const;
  std::string to_text() const;
};

/// One row per depth (ascending) over generate + prune.
CoverageReport coverage_curve(const Dataset& nat, const Grammar& grammar,
                              const std::vector<size_t>& depths, PruneOptions prune_options = {});

struct SplitAccuracy {
  double acc_cov = 0.0;   // NaN when no example is covered
  double acc_disj = 0.0;  // NaN when no example is disjoint
  size_t n_cov = 0;
  size_t n_disj = 0;
  std::vector<std::string> warnings;
};

/// Denotation accuracy of `predictions` (parallel to `gold.examples`) on
/// the covered and disjoint sides of `partition`. A prediction that fails
/// to execute counts as wrong.
SplitAccuracy split_accuracy(const Dataset& gold, const std::vector<LogicalForm>& predictions,
                             const KnowledgeBase& kb, const Partition& partition);

/// Whether `predicted` executes to the same denotation as `gold`.
bool same_denotation(const LogicalForm& gold, const LogicalForm& predicted,
                     const KnowledgeBase& kb);

struct MismatchReport {
  std::string nat_name;
  std::string on_name;
  size_t nat_size = 0;
  size_t on_size = 0;
  std::map<std::string, double> nat_histogram;
  std::map<std::string, double> on_histogram;
  double coverage = 0.0;
  double on_unlikely_rate = 0.0;

  nlohmann::json to_json() const;
  /// Aligned columns, two decimals.
  std::string to_text() const;
};

MismatchReport mismatch_report(const Dataset& nat, const Dataset& on, const Schema& schema);

}  // namespace granno
