#pragma once

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "granno/annotation/worker.hpp"

namespace httplib {
class Server;
}

namespace granno {

/// The current iteration's tasks, shared between the loop thread and HTTP
/// handlers. Tasks are leased to one client at a time; an unanswered lease
/// expires and the task is offered again. The first answer for a task wins.
class TaskQueue {
 public:
  using Clock = std::chrono::steady_clock;

  explicit TaskQueue(std::chrono::milliseconds lease = std::chrono::minutes(5));

  /// Replaces the batch; answers to earlier tasks are no longer accepted.
  void publish(std::vector<Task> tasks);

  /// Next task that is neither answered nor under a live lease.
  std::optional<Task> lease(const std::string& worker_id = "");

  enum class Submit { Accepted, Duplicate, UnknownTask, BadSelection };
  Submit submit(const WorkerResponse& response, const std::string& worker_id = "");

  /// Blocks until every task is answered, `timeout` passes or close() is
  /// called; then retires the batch. Parallel to the published tasks.
  std::vector<std::optional<WorkerResponse>> collect(std::chrono::milliseconds timeout);

  size_t outstanding() const;
  size_t size() const;
  /// Wakes collect() and rejects further work.
  void close();
  bool closed() const;

 private:
  struct Slot {
    Task task;
    std::optional<WorkerResponse> answer;
    std::string answered_by;
    Clock::time_point lease_until{};
  };

  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::vector<Slot> slots_;
  std::map<std::string, size_t> by_id_;
  size_t answered_ = 0;
  std::chrono::milliseconds lease_;
  bool closed_ = false;
};

/// Thrown by QueueWorker when the queue is closed mid-iteration; the
/// iteration is abandoned and the loop state left as it was.
class Interrupted : public Error {
 public:
  Interrupted() : Error("annotation interrupted") {}
};

/// Worker backed by humans through a TaskQueue.
class QueueWorker : public Worker {
 public:
  QueueWorker(TaskQueue& queue, std::chrono::milliseconds iteration_timeout);
  std::vector<std::optional<WorkerResponse>> annotate(std::span<const Task> tasks) override;

 private:
  TaskQueue* queue_;
  std::chrono::milliseconds timeout_;
};

struct Progress {
  size_t t = 0;
  double cov = 0.0;
  std::optional<double> cw_acc;
};

/// Loop progress as last published by the loop thread.
class ProgressBoard {
 public:
  void set(Progress p);
  Progress get() const;

 private:
  mutable std::mutex mu_;
  Progress p_;
};

/// HTTP front end:
///   GET  /api/task        200 Task JSON, or 204 when nothing is available
///   POST /api/annotation  {task_id, selection|null}
///   GET  /api/progress    {t, cov, remaining, cwAcc?}
///   GET  /api/health
/// plus static files from `static_dir` under `/`.
class AnnotationServer {
 public:
  AnnotationServer(TaskQueue& queue, const ProgressBoard& progress,
                   std::filesystem::path static_dir = {});
  ~AnnotationServer();
  AnnotationServer(const AnnotationServer&) = delete;
  AnnotationServer& operator=(const AnnotationServer&) = delete;

  /// Binds (port 0 picks a free port) and serves on a background thread.
  /// Returns the bound port; throws Error when binding fails.
  int start(const std::string& host, int port);
  void stop();

 private:
  void routes();

  TaskQueue* queue_;
  const ProgressBoard* progress_;
  std::filesystem::path static_dir_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace granno
