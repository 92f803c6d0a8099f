#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <random>

#include "granno/grammar/generate.hpp"
#include "granno/scorer/ranking.hpp"
#include "support/toy_grammar.hpp"

using namespace granno;
using granno::testing::data_path;
using granno::testing::toy_grammar;

namespace {

const EmbeddingTable& toy_table() {
  static const EmbeddingTable t = load_embeddings(data_path("toy/embeddings.txt"));
  return t;
}

const Featurizer& toy_featurizer() {
  static const Featurizer f(toy_table(), EntityMatcher(toy_grammar()));
  return f;
}

PairFeatures features(std::initializer_list<double> v) {
  std::array<double, kFeatureCount> a{};
  std::copy(v.begin(), v.end(), a.begin());
  PairFeatures f;
  f.wmd_neg = a[0];
  f.cosine_avg = a[1];
  f.token_jaccard = a[2];
  f.entity_match = a[3];
  f.length_ratio = a[4];
  f.content_overlap = a[5];
  f.x_explained = a[6];
  f.c_explained = a[7];
  return f;
}

PairFeatures random_features(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return features({-2.0 * u(rng), 2.0 * u(rng) - 1.0, u(rng), rng() % 2 ? 1.0 : 0.0, u(rng),
                   u(rng), -u(rng), -u(rng)});
}

// Training points on either side of 0.8*jaccard - 0.5*length_ratio + 0.3*wmd = 0.05,
// with a margin.
void separable(std::vector<PairFeatures>& pos, std::vector<PairFeatures>& neg, unsigned seed) {
  std::mt19937 rng(seed);
  while (pos.size() < 60 || neg.size() < 200) {
    auto f = random_features(rng);
    double h = 0.8 * f.token_jaccard - 0.5 * f.length_ratio + 0.3 * f.wmd_neg - 0.05;
    if (h > 0.08 && pos.size() < 60) pos.push_back(f);
    if (h < -0.08 && neg.size() < 200) neg.push_back(f);
  }
}

double train_f1(const ScorerModel& m, const std::vector<PairFeatures>& pos,
                const std::vector<PairFeatures>& neg) {
  size_t tp = 0, fp = 0, fn = 0;
  for (const auto& f : pos) (m.score(f) >= 0.0 ? tp : fn)++;
  for (const auto& f : neg) fp += m.score(f) >= 0.0;
  return f1_score(tp, fp, fn);
}

ScorerModel single_feature(size_t k) {
  std::array<double, kFeatureCount> w{}, mean{}, scale{};
  scale.fill(1.0);
  w[k] = 1.0;
  return ScorerModel(w, 0.0, mean, scale, -10.0);
}

}  // namespace

TEST_CASE("featurize") {
  const auto& fz = toy_featurizer();
  SUBCASE("identical strings") {
    auto t = tokenize("state that borders california");
    auto f = fz(t, t);
    CHECK(f.token_jaccard == 1.0);
    CHECK(f.wmd_neg == 0.0);
    CHECK(f.entity_match == 1.0);
    CHECK(f.length_ratio == 1.0);
    CHECK(f.content_overlap == 1.0);
    CHECK(f.cosine_avg == doctest::Approx(1.0));
    CHECK(f.x_explained == 0.0);
    CHECK(f.c_explained == 0.0);
  }
  SUBCASE("disjoint tokens without entities") {
    auto f = fz(tokenize("how many rivers"), tokenize("number of state"));
    CHECK(f.token_jaccard == 0.0);
    CHECK(f.entity_match == 1.0);
    CHECK(f.wmd_neg < 0.0);
  }
  SUBCASE("different entities") {
    auto f = fz(tokenize("what borders california"), tokenize("state that borders texas"));
    CHECK(f.entity_match == 0.0);
    CHECK(f.length_ratio == doctest::Approx(0.75));
  }
  SUBCASE("aliases resolve before matching") {
    auto f = fz(tokenize("rivers in ca"), tokenize("river that traverses california"));
    CHECK(f.entity_match == 1.0);
  }
  SUBCASE("one-way costs: an added word is explained only one way") {
    auto short_c = fz(tokenize("capital of oregon"), tokenize("capital of oregon"));
    auto long_c = fz(tokenize("capital of oregon"), tokenize("city that is capital of oregon"));
    CHECK(long_c.x_explained == 0.0);
    CHECK(long_c.c_explained < short_c.c_explained);
  }
  SUBCASE("ranges hold on toy pairs") {
    auto pool = prune(generate(toy_grammar(), 4), toy_grammar().schema());
    auto nat = tokenize("which rivers run through texas");
    for (const auto& p : pool) {
      auto f = fz(nat, p.tokens());
      CHECK(f.token_jaccard >= 0.0);
      CHECK(f.token_jaccard <= 1.0);
      CHECK(f.content_overlap >= 0.0);
      CHECK(f.content_overlap <= 1.0);
      CHECK(f.cosine_avg >= -1.0);
      CHECK(f.cosine_avg <= 1.0);
      CHECK((f.entity_match == 0.0 || f.entity_match == 1.0));
      CHECK(f.x_explained >= f.wmd_neg - 1e-12);
      CHECK(f.c_explained >= f.wmd_neg - 1e-12);
      CHECK(fz(nat, p.tokens()).values() == f.values());
    }
  }
  SUBCASE("undefined wmd falls back to the floor") {
    EmbeddingTable dropping(2, OovPolicy::Drop);
    dropping.add("a", {0.0, 0.0});
    Featurizer f2(dropping, EntityMatcher{});
    auto f = f2(tokenize("zz"), tokenize("a"));
    CHECK_FALSE(f.wmd_defined);
    auto v = f.values(-7.0);
    CHECK(v[0] == -7.0);
    CHECK(v[6] == -7.0);
    CHECK(v[7] == -7.0);
    CHECK(ScorerModel::s0().score(f) < ScorerModel::s0().score(f2(tokenize("a"), tokenize("a"))));
  }
}

TEST_CASE("train") {
  SUBCASE("linearly separable features reach training F1 1") {
    std::vector<PairFeatures> pos, neg;
    separable(pos, neg, 5);
    TrainOptions opt;
    opt.epochs = 2000;
    opt.learning_rate = 0.5;
    auto m = train(pos, neg, opt);
    CHECK(train_f1(m, pos, neg) == 1.0);
    CHECK(m.dev_f1 == 1.0);
  }
  SUBCASE("an empty class is an error") {
    std::vector<PairFeatures> pos{features({0, 0, 1})};
    CHECK_THROWS_AS(train(pos, {}), InsufficientData);
    CHECK_THROWS_AS(train({}, pos), InsufficientData);
  }
  SUBCASE("duplicating the data keeps dev F1") {
    std::vector<PairFeatures> pos, neg;
    separable(pos, neg, 9);
    // Label noise so dev F1 is informative.
    std::swap(pos[0], neg[0]);
    std::swap(pos[1], neg[1]);
    auto once = train(pos, neg);
    auto p2 = pos, n2 = neg;
    p2.insert(p2.end(), pos.begin(), pos.end());
    n2.insert(n2.end(), neg.begin(), neg.end());
    auto twice = train(p2, n2);
    CHECK(twice.dev_f1 == doctest::Approx(once.dev_f1).epsilon(0.1));
  }
  SUBCASE("dev F1 never drops below the initial model") {
    std::mt19937 rng(2);
    std::vector<PairFeatures> pos, neg;
    for (int i = 0; i < 30; ++i) pos.push_back(random_features(rng));
    for (int i = 0; i < 300; ++i) neg.push_back(random_features(rng));
    auto m = train(pos, neg);
    // The zero model predicts everything positive on the 10% dev split.
    double p = 3.0 / 33.0;
    CHECK(m.dev_f1 >= 2.0 * p / (1.0 + p) - 1e-12);
  }
  SUBCASE("training is deterministic") {
    std::vector<PairFeatures> pos, neg;
    separable(pos, neg, 4);
    auto a = train(pos, neg), b = train(pos, neg);
    CHECK(a.weights() == b.weights());
    CHECK(a.bias() == b.bias());
  }
  SUBCASE("string pairs") {
    TrainingPairs pairs;
    pairs.positives = {{"rivers in texas", "river that traverses texas"},
                       {"neighbors of oregon", "state that borders oregon"}};
    pairs.negatives = {{"rivers in texas", "number of river that traverses texas"},
                       {"neighbors of oregon", "capital of oregon"}};
    auto m = train(pairs, toy_featurizer());
    CHECK(m.weights().size() == kFeatureCount);
    pairs.negatives.push_back(pairs.positives[0]);
    CHECK_THROWS_AS(train(pairs, toy_featurizer()), Error);
  }
}

TEST_CASE("score") {
  const auto& fz = toy_featurizer();
  auto x = tokenize("rivers that flow through texas");
  SUBCASE("single-feature ordering") {
    auto m = single_feature(2);
    CHECK(m.score(fz(x, x)) > m.score(fz(x, tokenize("river that traverses texas"))));
  }
  SUBCASE("zero weights give a constant") {
    std::array<double, kFeatureCount> w{}, mean{}, scale{};
    scale.fill(1.0);
    ScorerModel m(w, 0.25, mean, scale, 0.0);
    for (const char* c : {"river", "state that borders texas", "number of river"}) {
      CHECK(m.score(fz(x, tokenize(c))) == 0.25);
    }
  }
  SUBCASE("s0 sentinel orders like s0_score") {
    auto pool = prune(generate(toy_grammar(), 4), toy_grammar().schema());
    std::mt19937 rng(8);
    auto s0 = ScorerModel::s0();
    for (int trial = 0; trial < 20; ++trial) {
      std::shuffle(pool.begin(), pool.end(), rng);
      std::vector<std::string> cands;
      for (size_t i = 0; i < 25; ++i) cands.push_back(pool[i].canonical);
      auto ranked = top_k(s0, fz, x, cands, cands.size(), false);
      std::vector<size_t> expect(cands.size());
      std::iota(expect.begin(), expect.end(), 0);
      std::vector<double> s(cands.size());
      for (size_t i = 0; i < cands.size(); ++i) s[i] = s0_score(x, tokenize(cands[i]), toy_table());
      std::stable_sort(expect.begin(), expect.end(), [&](size_t a, size_t b) {
        return s[a] != s[b] ? s[a] > s[b] : cands[a] < cands[b];
      });
      REQUIRE(ranked.size() == expect.size());
      for (size_t i = 0; i < expect.size(); ++i) CHECK(ranked[i].index == expect[i]);
    }
  }
  SUBCASE("model file round-trips") {
    std::vector<PairFeatures> pos, neg;
    separable(pos, neg, 3);
    auto m = train(pos, neg);
    m.iteration = 4;
    auto path = std::filesystem::temp_directory_path() / "granno_model_rt.json";
    m.save(path);
    auto back = ScorerModel::load(path);
    std::filesystem::remove(path);
    CHECK(back.iteration == 4);
    CHECK(back.dev_f1 == m.dev_f1);
    CHECK(back.weights() == m.weights());
    for (const auto& f : neg) CHECK(back.score(f) == m.score(f));
    auto j = m.to_json();
    CHECK(j["weights"].size() == kFeatureCount);
    CHECK(j.contains("bias"));
    CHECK(j["feature_names"].size() == kFeatureCount);
    auto s0 = ScorerModel::from_json(ScorerModel::s0().to_json());
    CHECK(s0.is_s0());
  }
}

TEST_CASE("top_k") {
  const auto& fz = toy_featurizer();
  auto s0 = ScorerModel::s0();
  auto x = tokenize("states next to california");
  std::vector<std::string> cands{"state that borders california", "state that borders texas",
                                 "state", "river that traverses california",
                                 "number of state that borders california"};
  SUBCASE("K at least the list returns everything sorted") {
    auto r = top_k(s0, fz, x, cands, 10, false);
    CHECK(r.size() == cands.size());
    for (size_t i = 1; i < r.size(); ++i) CHECK(r[i - 1].score >= r[i].score);
  }
  SUBCASE("output is a prefix of the full order") {
    auto full = top_k(s0, fz, x, cands, cands.size(), true);
    for (size_t k = 1; k <= full.size(); ++k) {
      auto r = top_k(s0, fz, x, cands, k, true);
      REQUIRE(r.size() == k);
      for (size_t i = 0; i < k; ++i) CHECK(r[i].index == full[i].index);
    }
  }
  SUBCASE("entity filter drops other entities") {
    auto r = top_k(s0, fz, x, cands, 10, true);
    for (const auto& e : r) {
      CHECK(cands[e.index].find("texas") == std::string::npos);
      CHECK(cands[e.index] != "state");
    }
    CHECK(r.size() == 3);
  }
  SUBCASE("entity filter falls back when nothing matches") {
    auto r = top_k(s0, fz, tokenize("states next to nevada"), cands, 10, true);
    CHECK(r.size() == cands.size());
  }
  SUBCASE("ties go to the smaller string") {
    std::array<double, kFeatureCount> w{}, mean{}, scale{};
    scale.fill(1.0);
    ScorerModel flat(w, 0.0, mean, scale, 0.0);
    auto r = top_k(flat, fz, x, cands, 2, false);
    auto sorted = cands;
    std::sort(sorted.begin(), sorted.end());
    CHECK(cands[r[0].index] == sorted[0]);
    CHECK(cands[r[1].index] == sorted[1]);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(top_k(s0, fz, x, {}, 5, true), EmptyCandidates);
    CHECK_THROWS_AS(top_k(s0, fz, x, cands, 0, true), Error);
  }
  SUBCASE("bit-identical reruns") {
    auto a = top_k(s0, fz, x, cands, 3, true), b = top_k(s0, fz, x, cands, 3, true);
    for (size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].index == b[i].index);
      CHECK(a[i].score == b[i].score);
    }
  }
}
