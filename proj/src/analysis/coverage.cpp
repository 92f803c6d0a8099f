#include "granno/analysis/coverage.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <unordered_set>

#include "granno/logic/errors.hpp"
#include "granno/logic/structure.hpp"
#include "granno/logic/template.hpp"

namespace granno {

namespace {

std::string key_or_schema_error(const Dataset& ds, size_t i, const Schema& schema) {
  try {
    return template_key(ds.examples[i].lf, schema);
  } catch (const TypeError& e) {
    throw SchemaError(ds.name + " example " + std::to_string(i + 1) + ": " + e.what());
  }
}

CoverageResult cover(const Dataset& nat, const std::unordered_set<std::string>& on_keys,
                     const Schema& schema) {
  if (nat.empty()) throw EmptyInput("coverage of an empty dataset");
  CoverageResult r;
  for (size_t i = 0; i < nat.size(); ++i) {
    auto& side = on_keys.contains(key_or_schema_error(nat, i, schema)) ? r.partition.covered
                                                                       : r.partition.disjoint;
    side.push_back(i);
  }
  r.fraction = static_cast<double>(r.partition.covered.size()) / static_cast<double>(nat.size());
  return r;
}

std::string fixed2(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

CoverageResult template_coverage(const Dataset& nat, const Dataset& on, const Schema& schema) {
  std::unordered_set<std::string> keys;
  for (size_t i = 0; i < on.size(); ++i) keys.insert(key_or_schema_error(on, i, schema));
  return cover(nat, keys, schema);
}

CoverageReport coverage_curve(const Dataset& nat, const Grammar& grammar,
                              const std::vector<size_t>& depths, PruneOptions prune_options) {
  if (!std::is_sorted(depths.begin(), depths.end())) {
    throw Error("coverage_curve: depths must be ascending");
  }
  CoverageReport report;
  Generator gen(grammar);
  for (size_t d : depths) {
    if (d < 1) throw Error("coverage_curve: depth must be at least 1");
    while (gen.depth() < d) gen.step();
    auto pairs = prune(gen.pairs(), grammar.schema(), prune_options);
    std::unordered_set<std::string> keys;
    for (const auto& p : pairs) keys.insert(template_key(p.lf, grammar.schema()));
    auto r = cover(nat, keys, grammar.schema());
    report.rows.push_back({d, pairs.size(), r.fraction, std::move(r.partition)});
  }
  return report;
}

nlohmann::json CoverageReport::to_json() const {
  auto rows_json = nlohmann::json::array();
  for (const auto& r : rows) {
    rows_json.push_back({{"depth", r.depth},
                         {"generated", r.generated},
                         {"coverage", r.coverage},
                         {"covered", r.partition.covered},
                         {"disjoint", r.partition.disjoint}});
  }
  return {{"rows", rows_json}};
}

std::string CoverageReport::to_text() const {
  std::ostringstream out;
  char line[128];
  std::snprintf(line, sizeof line, "%5s %10s %9s\n", "D", "|D_on|", "coverage");
  out << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%5zu %10zu %8s%%\n", r.depth, r.generated,
                  fixed2(100.0 * r.coverage).c_str());
    out << line;
  }
  return out.str();
}

bool same_denotation(const LogicalForm& gold, const LogicalForm& predicted,
                     const KnowledgeBase& kb) {
  Denotation want = execute(gold, kb);
  try {
    return execute(predicted, kb) == want;
  } catch (const Error&) {
    return false;
  }
}

SplitAccuracy split_accuracy(const Dataset& gold, const std::vector<LogicalForm>& predictions,
                             const KnowledgeBase& kb, const Partition& partition) {
  if (predictions.size() != gold.size()) {
    throw Error("split_accuracy: " + std::to_string(predictions.size()) + " predictions for " +
                std::to_string(gold.size()) + " examples");
  }
  auto side = [&](const std::vector<size_t>& idx, const char* label, SplitAccuracy& acc) {
    if (idx.empty()) {
      acc.warnings.push_back(std::string("no ") + label + " examples; accuracy undefined");
      return std::numeric_limits<double>::quiet_NaN();
    }
    size_t right = 0;
    for (size_t i : idx) right += same_denotation(gold.examples.at(i).lf, predictions[i], kb);
    return static_cast<double>(right) / static_cast<double>(idx.size());
  };
  SplitAccuracy acc;
  acc.n_cov = partition.covered.size();
  acc.n_disj = partition.disjoint.size();
  acc.acc_cov = side(partition.covered, "covered", acc);
  acc.acc_disj = side(partition.disjoint, "disjoint", acc);
  return acc;
}

MismatchReport mismatch_report(const Dataset& nat, const Dataset& on, const Schema& schema) {
  nat.validate(schema);
  on.validate(schema);
  MismatchReport r;
  r.nat_name = nat.name;
  r.on_name = on.name;
  r.nat_size = nat.size();
  r.on_size = on.size();
  auto nat_forms = nat.forms(), on_forms = on.forms();
  r.nat_histogram = operator_histogram(nat_forms);
  r.on_histogram = operator_histogram(on_forms);
  r.coverage = template_coverage(nat, on, schema).fraction;
  size_t unlikely = 0;
  for (const auto& lf : on_forms) unlikely += flag_unlikely(lf, schema);
  r.on_unlikely_rate = static_cast<double>(unlikely) / static_cast<double>(on_forms.size());
  return r;
}

nlohmann::json MismatchReport::to_json() const {
  nlohmann::json rows = nlohmann::json::object();
  for (const auto& row : operator_rows()) {
    rows[row] = {{"nat", nat_histogram.at(row)}, {"on", on_histogram.at(row)}};
  }
  return {{"nat", {{"name", nat_name}, {"size", nat_size}}},
          {"on", {{"name", on_name}, {"size", on_size}}},
          {"operators", rows},
          {"coverage", coverage},
          {"on_unlikely_rate", on_unlikely_rate}};
}

std::string MismatchReport::to_text() const {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-12s %8s %8s\n", "operator", "D_nat", "D_on");
  out << line;
  for (const auto& row : operator_rows()) {
    std::snprintf(line, sizeof line, "%-12s %8s %8s\n", row.c_str(),
                  fixed2(nat_histogram.at(row)).c_str(), fixed2(on_histogram.at(row)).c_str());
    out << line;
  }
  std::snprintf(line, sizeof line, "\n%-12s %8s\n%-12s %8s\n%-12s %8zu %8zu\n", "coverage",
                fixed2(coverage).c_str(), "unlikely", fixed2(on_unlikely_rate).c_str(), "size",
                nat_size, on_size);
  out << line;
  return out.str();
}

}  // namespace granno
