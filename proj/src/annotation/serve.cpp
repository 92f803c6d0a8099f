#include "granno/annotation/serve.hpp"

#include <httplib.h>

#include <iostream>

namespace granno {

TaskQueue::TaskQueue(std::chrono::milliseconds lease) : lease_(lease) {}

void TaskQueue::publish(std::vector<Task> tasks) {
  std::lock_guard lock(mu_);
  slots_.clear();
  by_id_.clear();
  answered_ = 0;
  for (auto& t : tasks) {
    by_id_[t.task_id] = slots_.size();
    slots_.push_back({std::move(t), std::nullopt, {}, {}});
  }
}

std::optional<Task> TaskQueue::lease(const std::string&) {
  std::lock_guard lock(mu_);
  if (closed_) return std::nullopt;
  auto now = Clock::now();
  for (auto& s : slots_) {
    if (s.answer || s.lease_until > now) continue;
    s.lease_until = now + lease_;
    return s.task;
  }
  return std::nullopt;
}

TaskQueue::Submit TaskQueue::submit(const WorkerResponse& response, const std::string& worker_id) {
  {
    std::lock_guard lock(mu_);
    auto it = by_id_.find(response.task_id);
    if (it == by_id_.end()) return Submit::UnknownTask;
    Slot& s = slots_[it->second];
    if (s.answer) return Submit::Duplicate;
    if (response.selection && *response.selection >= s.task.candidates.size()) {
      return Submit::BadSelection;
    }
    s.answer = response;
    s.answered_by = worker_id;
    ++answered_;
  }
  cv_.notify_all();
  return Submit::Accepted;
}

std::vector<std::optional<WorkerResponse>> TaskQueue::collect(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, timeout, [&] { return closed_ || answered_ == slots_.size(); });
  std::vector<std::optional<WorkerResponse>> out;
  out.reserve(slots_.size());
  for (const auto& s : slots_) out.push_back(s.answer);
  slots_.clear();
  by_id_.clear();
  answered_ = 0;
  return out;
}

size_t TaskQueue::outstanding() const {
  std::lock_guard lock(mu_);
  return slots_.size() - answered_;
}

size_t TaskQueue::size() const {
  std::lock_guard lock(mu_);
  return slots_.size();
}

void TaskQueue::close() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

bool TaskQueue::closed() const {
  std::lock_guard lock(mu_);
  return closed_;
}

QueueWorker::QueueWorker(TaskQueue& queue, std::chrono::milliseconds iteration_timeout)
    : queue_(&queue), timeout_(iteration_timeout) {}

std::vector<std::optional<WorkerResponse>> QueueWorker::annotate(std::span<const Task> tasks) {
  queue_->publish({tasks.begin(), tasks.end()});
  auto out = queue_->collect(timeout_);
  if (queue_->closed()) throw Interrupted();
  return out;
}

void ProgressBoard::set(Progress p) {
  std::lock_guard lock(mu_);
  p_ = p;
}

Progress ProgressBoard::get() const {
  std::lock_guard lock(mu_);
  return p_;
}

AnnotationServer::AnnotationServer(TaskQueue& queue, const ProgressBoard& progress,
                                   std::filesystem::path static_dir)
    : queue_(&queue),
      progress_(&progress),
      static_dir_(std::move(static_dir)),
      server_(std::make_unique<httplib::Server>()) {
  routes();
}

AnnotationServer::~AnnotationServer() { stop(); }

namespace {

void reply_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json; charset=utf-8");
}

void reply_error(httplib::Response& res, int status, const std::string& message) {
  reply_json(res, status, {{"error", message}});
}

}  // namespace

void AnnotationServer::routes() {
  auto& s = *server_;
  s.Get("/api/health", [](const httplib::Request&, httplib::Response& res) {
    reply_json(res, 200, {{"status", "ok"}});
  });

  s.Get("/api/task", [this](const httplib::Request& req, httplib::Response& res) {
    auto task = queue_->lease(req.get_param_value("worker_id"));
    if (!task) {
      res.status = 204;
      return;
    }
    reply_json(res, 200, task->to_json());
  });

  s.Post("/api/annotation", [this](const httplib::Request& req, httplib::Response& res) {
    WorkerResponse r;
    try {
      auto body = nlohmann::json::parse(req.body);
      r.task_id = body.at("task_id").get<std::string>();
      const auto& sel = body.at("selection");
      if (!sel.is_null()) {
        if (!sel.is_number_integer() || sel.get<long long>() < 0) {
          reply_error(res, 400, "selection must be a non-negative integer or null");
          return;
        }
        r.selection = sel.get<size_t>();
      }
    } catch (const nlohmann::json::exception& e) {
      reply_error(res, 400, std::string("bad request: ") + e.what());
      return;
    }
    std::string worker = req.get_param_value("worker_id");
    switch (queue_->submit(r, worker)) {
      case TaskQueue::Submit::Accepted:
        if (!worker.empty()) std::cerr << "annotation " << r.task_id << " from " << worker << '\n';
        reply_json(res, 200, {{"status", "accepted"}});
        return;
      case TaskQueue::Submit::Duplicate:
        reply_json(res, 200, {{"status", "duplicate"}});
        return;
      case TaskQueue::Submit::UnknownTask:
        reply_error(res, 404, "unknown or expired task " + r.task_id);
        return;
      case TaskQueue::Submit::BadSelection:
        reply_error(res, 400, "selection out of range");
        return;
    }
  });

  s.Get("/api/progress", [this](const httplib::Request&, httplib::Response& res) {
    Progress p = progress_->get();
    nlohmann::json j = {{"t", p.t}, {"cov", p.cov}, {"remaining", queue_->outstanding()}};
    if (p.cw_acc) j["cwAcc"] = *p.cw_acc;
    reply_json(res, 200, j);
  });

  if (!static_dir_.empty()) {
    if (!s.set_mount_point("/", static_dir_.string())) {
      throw Error("static directory not found: " + static_dir_.string());
    }
  }
}

int AnnotationServer::start(const std::string& host, int port) {
  int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

void AnnotationServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace granno
