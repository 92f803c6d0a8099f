#include "granno/annotation/loop.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

#include "granno/logic/template.hpp"

namespace granno {

namespace {

std::string pair_key(const std::string& canonical, const LogicalForm& lf) {
  return canonical + '\t' + lf.str();
}

}  // namespace

CandidatePool::CandidatePool(std::vector<GeneratedPair> pairs, const Featurizer& featurizer,
                             const Schema& schema)
    : pairs_(std::move(pairs)) {
  if (pairs_.empty()) throw EmptyInput("empty candidate pool");
  canonicals_.reserve(pairs_.size());
  prepared_.reserve(pairs_.size());
  for (size_t i = 0; i < pairs_.size(); ++i) {
    const auto& p = pairs_[i];
    canonicals_.push_back(p.canonical);
    prepared_.push_back(featurizer.prepare(p.tokens()));
    entities_.push_back(prepared_.back().entities);
    keys_.push_back(granno::template_key(p.lf, schema));
    index_.emplace(pair_key(p.canonical, p.lf), i);
  }
}

std::optional<size_t> CandidatePool::find(const std::string& canonical,
                                          const LogicalForm& lf) const {
  auto it = index_.find(pair_key(canonical, lf));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

nlohmann::json IterationMetrics::to_json() const {
  return {{"t", t},
          {"tasks", tasks},
          {"newly_labeled", newly_labeled},
          {"skipped", skipped},
          {"cov", cov},
          {"judged", judged},
          {"cwAcc", cw_acc ? nlohmann::json(*cw_acc) : nlohmann::json(nullptr)},
          {"false_positives", false_positives},
          {"dev_f1", dev_f1}};
}

IterationMetrics IterationMetrics::from_json(const nlohmann::json& j) {
  IterationMetrics m;
  m.t = j.at("t");
  m.tasks = j.at("tasks");
  m.newly_labeled = j.at("newly_labeled");
  m.skipped = j.at("skipped");
  m.cov = j.at("cov");
  m.judged = j.at("judged");
  if (!j.at("cwAcc").is_null()) m.cw_acc = j.at("cwAcc").get<double>();
  m.false_positives = j.at("false_positives").get<std::map<std::string, size_t>>();
  m.dev_f1 = j.at("dev_f1");
  return m;
}

AnnotationState AnnotationState::start(std::vector<UnlabeledItem> items, uint64_t seed) {
  AnnotationState s;
  s.items = std::move(items);
  s.unlabeled.resize(s.items.size());
  std::iota(s.unlabeled.begin(), s.unlabeled.end(), 0);
  s.seed = seed;
  return s;
}

double AnnotationState::cov() const {
  if (items.empty()) return 0.0;
  return static_cast<double>(labeled.size()) / static_cast<double>(items.size());
}

TrainingPairs AnnotationState::training_pairs(const CandidatePool& pool) const {
  TrainingPairs out;
  for (const auto& p : s_pos) out.positives.emplace_back(items[p.item].utterance, pool.canonicals()[p.candidate]);
  for (const auto& p : s_neg) out.negatives.emplace_back(items[p.item].utterance, pool.canonicals()[p.candidate]);
  return out;
}

Dataset AnnotationState::dataset(const CandidatePool& pool) const {
  Dataset d;
  d.name = "D_GA";
  d.kind = DatasetKind::Annotated;
  for (const auto& l : labeled) d.examples.push_back({items[l.item].utterance, pool.pair(l.candidate).lf});
  return d;
}

namespace {

nlohmann::json ref_json(const CandidatePool& pool, size_t candidate) {
  const auto& p = pool.pair(candidate);
  return {p.canonical, p.lf.str()};
}

size_t resolve(const CandidatePool& pool, const nlohmann::json& j) {
  auto canonical = j.at(0).get<std::string>();
  auto idx = pool.find(canonical, LogicalForm::parse(j.at(1).get<std::string>()));
  if (!idx) throw FormatError("snapshot names a pair missing from the pool: " + canonical);
  return *idx;
}

}  // namespace

nlohmann::json AnnotationState::to_json(const CandidatePool& pool) const {
  nlohmann::json j;
  j["seed"] = seed;
  j["t"] = t;
  auto items_json = nlohmann::json::array();
  for (const auto& it : items) {
    items_json.push_back({{"utterance", it.utterance},
                          {"gold", it.gold ? nlohmann::json(it.gold->str()) : nlohmann::json(nullptr)}});
  }
  j["items"] = items_json;
  j["unlabeled"] = unlabeled;
  auto lab = nlohmann::json::array();
  for (const auto& l : labeled) {
    lab.push_back({{"item", l.item}, {"pair", ref_json(pool, l.candidate)}, {"iteration", l.iteration}});
  }
  j["labeled"] = lab;
  for (const auto* side : {&s_pos, &s_neg}) {
    auto arr = nlohmann::json::array();
    for (const auto& p : *side) arr.push_back({p.item, ref_json(pool, p.candidate)});
    j[side == &s_pos ? "s_pos" : "s_neg"] = arr;
  }
  auto hist = nlohmann::json::array();
  for (const auto& m : history) hist.push_back(m.to_json());
  j["history"] = hist;
  j["model"] = model.to_json();
  auto last = nlohmann::json::array();
  for (const auto& task : last_tasks) {
    nlohmann::json row = {task.at(0), nlohmann::json::array()};
    for (size_t k = 1; k < task.size(); ++k) row[1].push_back(ref_json(pool, task[k]));
    last.push_back(row);
  }
  j["last_tasks"] = last;
  j["converged"] = converged;
  j["stop_reason"] = stop_reason;
  return j;
}

AnnotationState AnnotationState::from_json(const nlohmann::json& j, const CandidatePool& pool) {
  try {
    AnnotationState s;
    s.seed = j.at("seed");
    s.t = j.at("t");
    for (const auto& it : j.at("items")) {
      UnlabeledItem u{it.at("utterance"), std::nullopt};
      if (!it.at("gold").is_null()) u.gold = LogicalForm::parse(it.at("gold").get<std::string>());
      s.items.push_back(std::move(u));
    }
    s.unlabeled = j.at("unlabeled").get<std::vector<size_t>>();
    for (const auto& l : j.at("labeled")) {
      s.labeled.push_back({l.at("item"), resolve(pool, l.at("pair")), l.at("iteration")});
    }
    for (const auto& p : j.at("s_pos")) s.s_pos.push_back({p.at(0), resolve(pool, p.at(1))});
    for (const auto& p : j.at("s_neg")) s.s_neg.push_back({p.at(0), resolve(pool, p.at(1))});
    for (const auto& m : j.at("history")) s.history.push_back(IterationMetrics::from_json(m));
    s.model = ScorerModel::from_json(j.at("model"));
    for (const auto& row : j.at("last_tasks")) {
      std::vector<size_t> task{row.at(0).get<size_t>()};
      for (const auto& c : row.at(1)) task.push_back(resolve(pool, c));
      s.last_tasks.push_back(std::move(task));
    }
    s.converged = j.at("converged");
    s.stop_reason = j.at("stop_reason");
    for (size_t i : s.unlabeled) {
      if (i >= s.items.size()) throw FormatError("snapshot: unlabeled index out of range");
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("snapshot: ") + e.what());
  }
}

void AnnotationState::save(const std::filesystem::path& path, const CandidatePool& pool) const {
  // Write then rename so a crash never leaves a truncated snapshot.
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw Error("cannot write " + tmp.string());
    out << to_json(pool).dump() << '\n';
    if (!out) throw Error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

AnnotationState AnnotationState::load(const std::filesystem::path& path,
                                      const CandidatePool& pool) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return from_json(j, pool);
}

AnnotationLoop::AnnotationLoop(const CandidatePool& pool, const Featurizer& featurizer,
                               const Schema& schema, AnnotationState state, LoopOptions options)
    : pool_(&pool),
      featurizer_(&featurizer),
      schema_(&schema),
      state_(std::move(state)),
      options_(options) {
  if (options_.k == 0 || options_.k > options_.m) throw Error("need 1 <= K <= M");
  if (options_.max_iters == 0) throw Error("max_iters must be at least 1");
}

const AnnotationLoop::Cached& AnnotationLoop::cache(size_t item) {
  auto it = cache_.find(item);
  if (it != cache_.end()) return it->second;
  Cached c;
  auto px = featurizer_->prepare(tokenize(state_.items[item].utterance));
  if (options_.entity_filter) {
    c.eligible = entity_filtered(px.entities, pool_->entities());
  } else {
    c.eligible.resize(pool_->size());
    std::iota(c.eligible.begin(), c.eligible.end(), 0);
  }
  c.features.reserve(c.eligible.size());
  for (size_t k = 0; k < c.eligible.size(); ++k) {
    c.features.push_back(featurizer_->featurize(px, pool_->prepared(c.eligible[k])));
    c.slot.emplace(c.eligible[k], k);
  }
  return cache_.emplace(item, std::move(c)).first->second;
}

const PairFeatures& AnnotationLoop::features(const PairRef& p) {
  const Cached& c = cache(p.item);
  auto it = c.slot.find(p.candidate);
  if (it == c.slot.end()) throw Error("training pair outside the item's eligible candidates");
  return c.features[it->second];
}

std::vector<Ranked> AnnotationLoop::rank(size_t item, size_t k) {
  const Cached& c = cache(item);
  std::vector<double> scores(pool_->size(), 0.0);
  for (size_t j = 0; j < c.eligible.size(); ++j) scores[c.eligible[j]] = state_.model.score(c.features[j]);
  return rank_top_k(scores, pool_->canonicals(), c.eligible, k);
}

std::vector<Task> AnnotationLoop::tasks() {
  top_m_.clear();
  std::vector<size_t> order = state_.unlabeled;
  std::mt19937_64 rng(state_.seed * 1000003ull + state_.t);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<Task> out;
  out.reserve(order.size());
  for (size_t item : order) {
    auto ranked = rank(item, options_.m);
    Task task;
    task.task_id = "t" + std::to_string(state_.t) + "-" + std::to_string(item);
    task.utterance = state_.items[item].utterance;
    task.iteration = state_.t;
    for (size_t r = 0; r < std::min(options_.k, ranked.size()); ++r) {
      const auto& p = pool_->pair(ranked[r].index);
      task.candidates.push_back({p.canonical, p.lf});
    }
    top_m_.emplace(item, std::move(ranked));
    out.push_back(std::move(task));
  }
  return out;
}

const IterationMetrics& AnnotationLoop::run_iteration(Worker& worker) {
  auto batch = tasks();
  auto responses = worker.annotate(batch);
  if (responses.size() != batch.size()) throw Error("worker returned a different number of answers");

  IterationMetrics m;
  m.t = state_.t;
  m.tasks = batch.size();
  std::set<std::pair<size_t, size_t>> pos, neg;
  for (const auto& p : state_.s_pos) pos.emplace(p.item, p.candidate);
  for (const auto& p : state_.s_neg) neg.emplace(p.item, p.candidate);
  std::set<size_t> done;
  size_t correct = 0;

  for (size_t i = 0; i < batch.size(); ++i) {
    const auto& r = responses[i];
    if (!r) {
      ++m.skipped;
      continue;
    }
    if (r->task_id != batch[i].task_id) throw Error("answer for the wrong task: " + r->task_id);
    if (!r->selection) continue;
    if (*r->selection >= batch[i].candidates.size()) {
      throw Error("selection out of range for task " + r->task_id);
    }
    size_t item = std::stoul(batch[i].task_id.substr(batch[i].task_id.find('-') + 1));
    const auto& ranked = top_m_.at(item);
    size_t chosen = ranked[*r->selection].index;
    state_.labeled.push_back({item, chosen, state_.t});
    done.insert(item);
    if (pos.emplace(item, chosen).second) state_.s_pos.push_back({item, chosen});
    for (const auto& other : ranked) {
      if (other.index == chosen || pos.contains({item, other.index})) continue;
      if (neg.emplace(item, other.index).second) state_.s_neg.push_back({item, other.index});
    }
    if (const auto& gold = state_.items[item].gold) {
      ++m.judged;
      const LogicalForm& detected = pool_->pair(chosen).lf;
      auto d = categorize_detection(*gold, detected, *schema_);
      if (d == Detection::Exact) {
        ++correct;
      } else {
        ++m.false_positives[to_string(d)];
      }
    }
  }
  m.newly_labeled = done.size();
  std::erase_if(state_.unlabeled, [&](size_t i) { return done.contains(i); });
  m.cov = state_.cov();
  if (m.judged > 0) m.cw_acc = static_cast<double>(correct) / static_cast<double>(m.judged);

  std::vector<std::vector<size_t>> presented;
  for (const auto& [item, ranked] : top_m_) {
    std::vector<size_t> row{item};
    for (size_t r = 0; r < std::min(options_.k, ranked.size()); ++r) row.push_back(ranked[r].index);
    presented.push_back(std::move(row));
  }
  std::sort(presented.begin(), presented.end());
  // Nobody answered (timeout or shutdown): not evidence of convergence, and
  // the task set is kept so the next iteration is not seen as a repeat.
  bool silent = m.tasks > 0 && m.skipped == m.tasks;
  bool repeated = state_.t > 0 && presented == state_.last_tasks;
  if (!silent) state_.last_tasks = std::move(presented);

  if (m.newly_labeled > 0 && !state_.s_pos.empty() && !state_.s_neg.empty()) {
    std::vector<PairFeatures> p, n;
    p.reserve(state_.s_pos.size());
    n.reserve(state_.s_neg.size());
    for (const auto& ref : state_.s_pos) p.push_back(features(ref));
    for (const auto& ref : state_.s_neg) n.push_back(features(ref));
    state_.model = train(p, n, options_.train);
    state_.model.iteration = state_.t + 1;
  }
  m.dev_f1 = state_.model.dev_f1;

  ++state_.t;
  state_.history.push_back(std::move(m));
  state_.stop_reason.clear();
  if (silent) {
    state_.stop_reason = "no responses";
  } else if (state_.history.back().newly_labeled == 0) {
    state_.converged = true;
    state_.stop_reason = "no new labels";
  } else if (repeated) {
    state_.converged = true;
    state_.stop_reason = "repeated task set";
  } else if (state_.unlabeled.empty()) {
    state_.converged = true;
    state_.stop_reason = "all labeled";
  }
  return state_.history.back();
}

void AnnotationLoop::run_until_convergence(
    Worker& worker, const std::function<void(const AnnotationState&)>& after) {
  while (!state_.converged) {
    if (state_.unlabeled.empty()) {
      state_.converged = true;
      state_.stop_reason = "nothing to label";
      break;
    }
    if (state_.t >= options_.max_iters) {
      state_.stop_reason = "max_iters";
      break;
    }
    run_iteration(worker);
    if (after) after(state_);
    if (state_.stop_reason == "no responses") break;
  }
}

void export_dataset(const AnnotationState& state, const CandidatePool& pool,
                    const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "# annotated dataset: " << state.labeled.size() << " of " << state.items.size()
      << " utterances, " << state.t << " iterations\n";
  for (const auto& l : state.labeled) {
    const auto& p = pool.pair(l.candidate);
    nlohmann::json j = {{"utterance", state.items[l.item].utterance},
                        {"canonical", p.canonical},
                        {"lf", p.lf.str()},
                        {"iteration_labeled", l.iteration}};
    out << j.dump() << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace granno
