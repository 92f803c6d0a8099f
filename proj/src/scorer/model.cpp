#include "granno/scorer/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include "granno/logic/errors.hpp"

namespace granno {

ScorerModel ScorerModel::s0() {
  ScorerModel m;
  m.s0_ = true;
  m.wmd_floor_ = std::numeric_limits<double>::lowest();
  return m;
}

ScorerModel::ScorerModel(std::array<double, kFeatureCount> weights, double bias,
                         std::array<double, kFeatureCount> mean,
                         std::array<double, kFeatureCount> scale, double wmd_floor)
    : weights_(weights), bias_(bias), mean_(mean), scale_(scale), wmd_floor_(wmd_floor) {}

double ScorerModel::score(const PairFeatures& f) const {
  auto v = f.values(wmd_floor_);
  if (s0_) return v[0];
  double z = bias_;
  for (size_t i = 0; i < kFeatureCount; ++i) z += weights_[i] * (v[i] - mean_[i]) / scale_[i];
  return z;
}

nlohmann::json ScorerModel::to_json() const {
  nlohmann::json j;
  j["kind"] = s0_ ? "s0" : "linear";
  j["feature_names"] = feature_names();
  j["weights"] = weights_;
  j["bias"] = bias_;
  j["standardization"] = {{"mean", mean_}, {"scale", scale_}};
  j["wmd_floor"] = s0_ ? nlohmann::json(nullptr) : nlohmann::json(wmd_floor_);
  j["t"] = iteration;
  j["dev_f1"] = dev_f1;
  j["best_epoch"] = best_epoch;
  return j;
}

ScorerModel ScorerModel::from_json(const nlohmann::json& j) {
  try {
    ScorerModel m;
    if (j.at("kind").get<std::string>() == "s0") {
      m = s0();
    } else {
      if (j.at("feature_names").get<std::vector<std::string>>() !=
          std::vector<std::string>(feature_names().begin(), feature_names().end())) {
        throw FormatError("model features do not match this build");
      }
      m = ScorerModel(j.at("weights").get<std::array<double, kFeatureCount>>(),
                      j.at("bias").get<double>(),
                      j.at("standardization").at("mean").get<std::array<double, kFeatureCount>>(),
                      j.at("standardization").at("scale").get<std::array<double, kFeatureCount>>(),
                      j.at("wmd_floor").get<double>());
    }
    m.iteration = j.value("t", size_t{0});
    m.dev_f1 = j.value("dev_f1", 0.0);
    m.best_epoch = j.value("best_epoch", size_t{0});
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("scorer model: ") + e.what());
  }
}

void ScorerModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << to_json().dump(2) << '\n';
}

ScorerModel ScorerModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

double f1_score(size_t tp, size_t fp, size_t fn) {
  if (tp == 0) return 0.0;
  return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

namespace {

using Row = std::array<double, kFeatureCount>;

struct Split {
  std::vector<Row> x;
  std::vector<int> y;
};

Row raw(const PairFeatures& f, double wmd_floor) {
  return f.values(wmd_floor);
}

double dev_f1_of(const Split& dev, const Row& w, double b) {
  size_t tp = 0, fp = 0, fn = 0;
  for (size_t i = 0; i < dev.x.size(); ++i) {
    double z = b;
    for (size_t k = 0; k < kFeatureCount; ++k) z += w[k] * dev.x[i][k];
    bool pred = z >= 0.0;
    if (pred && dev.y[i] == 1) ++tp;
    if (pred && dev.y[i] == 0) ++fp;
    if (!pred && dev.y[i] == 1) ++fn;
  }
  return f1_score(tp, fp, fn);
}

}  // namespace

ScorerModel train(const std::vector<PairFeatures>& positives,
                  const std::vector<PairFeatures>& negatives, const TrainOptions& options) {
  if (positives.empty() || negatives.empty()) {
    throw InsufficientData("training needs at least one positive and one negative pair");
  }
  double floor = std::numeric_limits<double>::max();
  for (const auto* side : {&positives, &negatives}) {
    for (const auto& f : *side) {
      if (f.wmd_defined) floor = std::min(floor, f.wmd_neg);
    }
  }
  if (floor == std::numeric_limits<double>::max()) floor = 0.0;

  // Stratified dev split.
  std::mt19937_64 rng(options.seed);
  Split train_set, dev_set;
  for (int label : {1, 0}) {
    const auto& side = label == 1 ? positives : negatives;
    std::vector<size_t> order(side.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    auto n_dev = static_cast<size_t>(options.dev_fraction * static_cast<double>(side.size()));
    for (size_t k = 0; k < order.size(); ++k) {
      Split& s = k < n_dev ? dev_set : train_set;
      s.x.push_back(raw(side[order[k]], floor));
      s.y.push_back(label);
    }
  }
  bool has_dev = std::count(dev_set.y.begin(), dev_set.y.end(), 1) > 0 &&
                 std::count(dev_set.y.begin(), dev_set.y.end(), 0) > 0;
  if (!has_dev) {
    // A class too small to split: select on the full training data.
    for (size_t i = 0; i < dev_set.x.size(); ++i) {
      train_set.x.push_back(dev_set.x[i]);
      train_set.y.push_back(dev_set.y[i]);
    }
    dev_set = train_set;
  }

  Row mean{}, scale{};
  const double n = static_cast<double>(train_set.x.size());
  for (const auto& r : train_set.x) {
    for (size_t k = 0; k < kFeatureCount; ++k) mean[k] += r[k] / n;
  }
  for (const auto& r : train_set.x) {
    for (size_t k = 0; k < kFeatureCount; ++k) scale[k] += (r[k] - mean[k]) * (r[k] - mean[k]) / n;
  }
  for (auto& s : scale) s = s > 1e-24 ? std::sqrt(s) : 1.0;
  auto standardize = [&](Split& s) {
    for (auto& r : s.x) {
      for (size_t k = 0; k < kFeatureCount; ++k) r[k] = (r[k] - mean[k]) / scale[k];
    }
  };
  standardize(train_set);
  standardize(dev_set);

  const double n_pos = static_cast<double>(std::count(train_set.y.begin(), train_set.y.end(), 1));
  const double n_neg = n - n_pos;
  const double w_pos = options.balance_classes ? n / (2.0 * n_pos) : 1.0;
  const double w_neg = options.balance_classes ? n / (2.0 * n_neg) : 1.0;

  Row w{};
  double b = 0.0;
  Row best_w = w;
  double best_b = b, best_f1 = dev_f1_of(dev_set, w, b);
  size_t best_epoch = 0;
  for (size_t epoch = 1; epoch <= options.epochs; ++epoch) {
    Row gw{};
    double gb = 0.0;
    for (size_t i = 0; i < train_set.x.size(); ++i) {
      const Row& r = train_set.x[i];
      double z = b;
      for (size_t k = 0; k < kFeatureCount; ++k) z += w[k] * r[k];
      double p = 1.0 / (1.0 + std::exp(-z));
      double err = (p - train_set.y[i]) * (train_set.y[i] == 1 ? w_pos : w_neg) / n;
      for (size_t k = 0; k < kFeatureCount; ++k) gw[k] += err * r[k];
      gb += err;
    }
    for (size_t k = 0; k < kFeatureCount; ++k) {
      w[k] -= options.learning_rate * (gw[k] + options.l2 * w[k]);
    }
    b -= options.learning_rate * gb;
    double f1 = dev_f1_of(dev_set, w, b);
    if (f1 >= best_f1) {
      best_f1 = f1;
      best_w = w;
      best_b = b;
      best_epoch = epoch;
    }
  }
  ScorerModel model(best_w, best_b, mean, scale, floor);
  model.dev_f1 = best_f1;
  model.best_epoch = best_epoch;
  return model;
}

ScorerModel train(const TrainingPairs& pairs, const Featurizer& featurizer,
                  const TrainOptions& options) {
  std::set<std::pair<std::string, std::string>> pos(pairs.positives.begin(),
                                                    pairs.positives.end());
  for (const auto& p : pairs.negatives) {
    if (pos.contains(p)) throw Error("pair is both positive and negative: " + p.first);
  }
  auto featurize = [&](const auto& list) {
    std::vector<PairFeatures> out;
    out.reserve(list.size());
    for (const auto& [x, c] : list) out.push_back(featurizer(tokenize(x), tokenize(c)));
    return out;
  };
  return train(featurize(pairs.positives), featurize(pairs.negatives), options);
}

}  // namespace granno
