#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "granno/annotation/task.hpp"
#include "granno/logic/errors.hpp"
#include "granno/logic/schema.hpp"

namespace granno {

class MissingGold : public Error {
 public:
  using Error::Error;
};

/// Answers a batch of tasks. An empty slot in the result means the task
/// went unanswered (timeout, worker gone); the utterance stays unlabeled.
class Worker {
 public:
  virtual ~Worker() = default;
  virtual std::vector<std::optional<WorkerResponse>> annotate(std::span<const Task> tasks) = 0;
};

/// Simulated worker with access to gold logical forms.
///
/// It picks the candidate whose form equals gold, else the first whose
/// template equals gold's, else answers none. With `error_rate` p, a task
/// showing a gold candidate instead gets a uniformly random non-gold
/// candidate with probability p (none if only gold is shown). Draws are
/// seeded per task id, so answers do not depend on batch order.
class OracleWorker : public Worker {
 public:
  OracleWorker(std::map<std::string, LogicalForm> gold, const Schema& schema,
               double error_rate = 0.0, uint64_t seed = 0);

  /// Throws MissingGold when the utterance has no gold form.
  WorkerResponse respond(const Task& task) const;
  std::vector<std::optional<WorkerResponse>> annotate(std::span<const Task> tasks) override;

  /// Index of the gold candidate, if shown.
  std::optional<size_t> gold_index(const Task& task) const;

 private:
  std::map<std::string, std::pair<LogicalForm, std::string>> gold_;  // utterance -> (lf, key)
  const Schema* schema_;
  double error_rate_;
  uint64_t seed_;
};

}  // namespace granno
