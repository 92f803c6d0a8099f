#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "granno/scorer/features.hpp"

namespace granno {

/// Detected paraphrase pairs (x, c) and harvested non-paraphrases.
struct TrainingPairs {
  std::vector<std::pair<std::string, std::string>> positives;
  std::vector<std::pair<std::string, std::string>> negatives;
};

struct TrainOptions {
  size_t epochs = 500;
  double learning_rate = 0.1;
  double l2 = 1e-4;
  double dev_fraction = 0.10;
  uint64_t seed = 0;
  /// Weight each class to half the total loss.
  bool balance_classes = true;
};

/// Linear paraphrase scorer over standardized features, or the s0 sentinel
/// that scores by -wmd alone.
class ScorerModel {
 public:
  static ScorerModel s0();
  ScorerModel(std::array<double, kFeatureCount> weights, double bias,
              std::array<double, kFeatureCount> mean, std::array<double, kFeatureCount> scale,
              double wmd_floor);

  bool is_s0() const { return s0_; }
  /// Logit, or -wmd for the sentinel. Higher means more similar.
  double score(const PairFeatures& f) const;

  const std::array<double, kFeatureCount>& weights() const { return weights_; }
  double bias() const { return bias_; }
  double wmd_floor() const { return wmd_floor_; }

  size_t iteration = 0;
  double dev_f1 = 0.0;
  size_t best_epoch = 0;

  nlohmann::json to_json() const;
  static ScorerModel from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static ScorerModel load(const std::filesystem::path& path);

 private:
  ScorerModel() = default;

  bool s0_ = false;
  std::array<double, kFeatureCount> weights_{};
  double bias_ = 0.0;
  std::array<double, kFeatureCount> mean_{};
  std::array<double, kFeatureCount> scale_{};
  double wmd_floor_ = 0.0;
};

/// F1 of the positive class; 0 when there are no true positives.
double f1_score(size_t tp, size_t fp, size_t fn);

/// Logistic regression by full-batch gradient descent. A stratified
/// `dev_fraction` of each class is held out and the epoch with the best
/// dev F1 is returned (the training set stands in when a class is too
/// small to split). Throws InsufficientData when a class is empty.
ScorerModel train(const std::vector<PairFeatures>& positives,
                  const std::vector<PairFeatures>& negatives, const TrainOptions& options = {});

ScorerModel train(const TrainingPairs& pairs, const Featurizer& featurizer,
                  const TrainOptions& options = {});

}  // namespace granno
