#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "granno/analysis/dataset.hpp"
#include "granno/annotation/categorize.hpp"
#include "granno/annotation/worker.hpp"
#include "granno/grammar/generate.hpp"
#include "granno/scorer/ranking.hpp"

namespace granno {

/// Generated pairs prepared once for scoring.
class CandidatePool {
 public:
  /// Throws EmptyInput for an empty pool.
  CandidatePool(std::vector<GeneratedPair> pairs, const Featurizer& featurizer,
                const Schema& schema);

  size_t size() const { return pairs_.size(); }
  const GeneratedPair& pair(size_t i) const { return pairs_[i]; }
  const std::vector<std::string>& canonicals() const { return canonicals_; }
  const PreparedText& prepared(size_t i) const { return prepared_[i]; }
  const std::vector<EntityMentions>& entities() const { return entities_; }
  const std::string& template_key(size_t i) const { return keys_[i]; }
  std::optional<size_t> find(const std::string& canonical, const LogicalForm& lf) const;

 private:
  std::vector<GeneratedPair> pairs_;
  std::vector<std::string> canonicals_;
  std::vector<PreparedText> prepared_;
  std::vector<EntityMentions> entities_;
  std::vector<std::string> keys_;
  std::unordered_map<std::string, size_t> index_;
};

struct UnlabeledItem {
  std::string utterance;
  std::optional<LogicalForm> gold;  // only used for metrics
};

struct LabeledItem {
  size_t item = 0;  // index into AnnotationState::items
  size_t candidate = 0;  // index into the pool
  size_t iteration = 0;
};

/// (utterance item, pool candidate)
struct PairRef {
  size_t item = 0;
  size_t candidate = 0;
  bool operator==(const PairRef&) const = default;
};

struct IterationMetrics {
  size_t t = 0;
  size_t tasks = 0;
  size_t newly_labeled = 0;
  size_t skipped = 0;  // unanswered tasks
  double cov = 0.0;    // labeled / |items| after this iteration
  size_t judged = 0;   // detections on items with gold
  std::optional<double> cw_acc;
  std::map<std::string, size_t> false_positives;  // by Detection bucket
  double dev_f1 = 0.0;  // of the model retrained after this iteration

  nlohmann::json to_json() const;
  static IterationMetrics from_json(const nlohmann::json& j);
};

struct AnnotationState {
  std::vector<UnlabeledItem> items;  // the original X_ul
  std::vector<size_t> unlabeled;     // indices into items, in input order
  std::vector<LabeledItem> labeled;
  std::vector<PairRef> s_pos;
  std::vector<PairRef> s_neg;
  size_t t = 0;
  std::vector<IterationMetrics> history;
  uint64_t seed = 0;
  ScorerModel model = ScorerModel::s0();
  /// Items and candidate lists of the last presented iteration.
  std::vector<std::vector<size_t>> last_tasks;
  bool converged = false;
  std::string stop_reason;

  static AnnotationState start(std::vector<UnlabeledItem> items, uint64_t seed);

  double cov() const;
  TrainingPairs training_pairs(const CandidatePool& pool) const;
  /// D_GA: utterances paired with their detected forms.
  Dataset dataset(const CandidatePool& pool) const;

  /// Snapshot; pairs are stored by (canonical, lf) so the pool file order
  /// does not matter on resume.
  nlohmann::json to_json(const CandidatePool& pool) const;
  static AnnotationState from_json(const nlohmann::json& j, const CandidatePool& pool);
  void save(const std::filesystem::path& path, const CandidatePool& pool) const;
  static AnnotationState load(const std::filesystem::path& path, const CandidatePool& pool);
};

struct LoopOptions {
  size_t k = 5;
  size_t m = 100;
  size_t max_iters = 15;
  bool entity_filter = true;
  TrainOptions train;
};

/// The detect-and-retrain loop over a fixed candidate pool.
class AnnotationLoop {
 public:
  /// Throws Error when k is 0 or exceeds m.
  AnnotationLoop(const CandidatePool& pool, const Featurizer& featurizer, const Schema& schema,
                 AnnotationState state, LoopOptions options = {});

  /// Tasks for the current iteration in presentation order (seeded
  /// shuffle of the unlabeled items).
  std::vector<Task> tasks();

  /// One pass: present every unlabeled utterance, record detections and
  /// training pairs, retrain, advance t.
  const IterationMetrics& run_iteration(Worker& worker);

  /// Iterates until an iteration labels nothing, presents the same tasks
  /// as the one before, or max_iters is reached. An iteration in which no
  /// task was answered stops the run without converging ("no responses"),
  /// so a resumed run carries on. `after` runs after each iteration.
  void run_until_convergence(Worker& worker,
                             const std::function<void(const AnnotationState&)>& after = {});

  const AnnotationState& state() const { return state_; }
  const LoopOptions& options() const { return options_; }

 private:
  struct Cached {
    std::vector<size_t> eligible;
    std::vector<PairFeatures> features;  // parallel to eligible
    std::unordered_map<size_t, size_t> slot;  // pool index -> position
  };
  const Cached& cache(size_t item);
  const PairFeatures& features(const PairRef& p);
  std::vector<Ranked> rank(size_t item, size_t k);

  const CandidatePool* pool_;
  const Featurizer* featurizer_;
  const Schema* schema_;
  AnnotationState state_;
  LoopOptions options_;
  std::unordered_map<size_t, Cached> cache_;
  std::unordered_map<size_t, std::vector<Ranked>> top_m_;  // by item, current iteration
};

/// JSON lines of {utterance, canonical, lf, iteration_labeled} after a
/// `#` header line; readable by Dataset::load.
void export_dataset(const AnnotationState& state, const CandidatePool& pool,
                    const std::filesystem::path& path);

}  // namespace granno
