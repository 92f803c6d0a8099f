#include "granno/annotation/worker.hpp"

#include <random>

#include "granno/logic/template.hpp"

namespace granno {

namespace {

uint64_t fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

nlohmann::json Task::to_json() const {
  auto cands = nlohmann::json::array();
  for (const auto& c : candidates) cands.push_back({{"canonical", c.canonical}, {"lf", c.lf.str()}});
  return {{"task_id", task_id},
          {"utterance", utterance},
          {"iteration", iteration},
          {"candidates", cands}};
}

OracleWorker::OracleWorker(std::map<std::string, LogicalForm> gold, const Schema& schema,
                           double error_rate, uint64_t seed)
    : schema_(&schema), error_rate_(error_rate), seed_(seed) {
  if (error_rate < 0.0 || error_rate > 1.0) throw Error("error rate must lie in [0, 1]");
  for (auto& [utt, lf] : gold) {
    std::string key = template_key(lf, schema);
    gold_.emplace(utt, std::make_pair(std::move(lf), std::move(key)));
  }
}

std::optional<size_t> OracleWorker::gold_index(const Task& task) const {
  auto it = gold_.find(task.utterance);
  if (it == gold_.end()) throw MissingGold("no gold form for \"" + task.utterance + "\"");
  const auto& [lf, key] = it->second;
  for (size_t i = 0; i < task.candidates.size(); ++i) {
    if (task.candidates[i].lf == lf) return i;
  }
  for (size_t i = 0; i < task.candidates.size(); ++i) {
    if (template_key(task.candidates[i].lf, *schema_) == key) return i;
  }
  return std::nullopt;
}

WorkerResponse OracleWorker::respond(const Task& task) const {
  WorkerResponse r{task.task_id, gold_index(task)};
  if (!r.selection || error_rate_ == 0.0) return r;
  std::mt19937_64 rng(seed_ ^ fnv1a(task.task_id));
  if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) >= error_rate_) return r;
  const std::string& key = gold_.at(task.utterance).second;
  std::vector<size_t> wrong;
  for (size_t i = 0; i < task.candidates.size(); ++i) {
    if (template_key(task.candidates[i].lf, *schema_) != key) wrong.push_back(i);
  }
  if (wrong.empty()) {
    r.selection.reset();
  } else {
    r.selection = wrong[std::uniform_int_distribution<size_t>(0, wrong.size() - 1)(rng)];
  }
  return r;
}

std::vector<std::optional<WorkerResponse>> OracleWorker::annotate(std::span<const Task> tasks) {
  std::vector<std::optional<WorkerResponse>> out;
  out.reserve(tasks.size());
  for (const auto& t : tasks) out.emplace_back(respond(t));
  return out;
}

}  // namespace granno
