#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "granno/logic/logical_form.hpp"

namespace granno {

struct Candidate {
  std::string canonical;
  LogicalForm lf;
};

/// One utterance shown to a worker with its ranked candidates.
struct Task {
  std::string task_id;  // opaque
  std::string utterance;
  std::vector<Candidate> candidates;
  size_t iteration = 0;

  /// {task_id, utterance, iteration, candidates: [{canonical, lf}]}
  nlohmann::json to_json() const;
};

/// `selection` is a zero-based index into the task's candidates, or empty
/// for "none of these".
struct WorkerResponse {
  std::string task_id;
  std::optional<size_t> selection;
};

}  // namespace granno
