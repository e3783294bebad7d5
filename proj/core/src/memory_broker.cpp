// Copyright 2026 the esg authors
// SPDX-License-Identifier: Apache-2.0

#include "esg/memory_broker.hpp"

#include <algorithm>

#include "esg/errors.hpp"

namespace esg {

std::shared_ptr<MemoryBackend> MemoryBackend::create() {
  return std::make_shared<MemoryBackend>();
}

std::shared_ptr<MemoryBackend> MemoryBackend::named(const std::string& name) {
  static std::mutex registry_mutex;
  static std::map<std::string, std::shared_ptr<MemoryBackend>> registry;
  std::lock_guard<std::mutex> lock(registry_mutex);
  auto& slot = registry[name];
  if (!slot) {
    slot = create();
  }
  return slot;
}

void MemoryBackend::set_unavailable(bool unavailable) {
  std::lock_guard<std::mutex> lock(mutex_);
  unavailable_ = unavailable;
}

void MemoryBackend::check_available() const {
  if (unavailable_) {
    throw BrokerUnavailable("memory backend marked unavailable");
  }
}

void MemoryBroker::enqueue(const TaskEnvelope& envelope) {
  auto& b = *backend_;
  {
    std::lock_guard<std::mutex> lock(b.mutex_);
    b.check_available();
    if (b.tasks_.count(envelope.task_id)) {
      throw DuplicateTask(envelope.task_id.to_string());
    }
    MemoryBackend::TaskRecord record;
    record.envelope = envelope;
    record.status = TaskState::kQueued;
    record.attempt = envelope.attempt;
    record.created_at = envelope.created_at;
    b.tasks_.emplace(envelope.task_id, std::move(record));
    b.queues_[{envelope.version.to_string(), envelope.kind}].push_back(envelope.task_id);
  }
  b.queue_grew_.notify_all();
}

std::optional<TaskEnvelope> MemoryBroker::claim(const VersionTag& version, EndpointKind kind,
                                                const std::string& worker_id, Duration visibility,
                                                Duration wait) {
  auto& b = *backend_;
  const auto deadline = std::chrono::steady_clock::now() + wait;
  std::unique_lock<std::mutex> lock(b.mutex_);
  b.check_available();
  auto& queue = b.queues_[{version.to_string(), kind}];
  for (;;) {
    while (!queue.empty()) {
      TaskId id = queue.front();
      queue.pop_front();
      auto it = b.tasks_.find(id);
      if (it == b.tasks_.end()) {
        continue;  // deleted while queued
      }
      auto& record = it->second;
      if (record.outcome || record.claim) {
        continue;  // completed or already claimed elsewhere
      }
      const auto now = now_utc();
      record.claim = ClaimLease{worker_id, now, now + visibility};
      record.status = TaskState::kRunning;
      TaskEnvelope envelope = record.envelope;
      envelope.attempt = record.attempt;
      return envelope;
    }
    if (b.queue_grew_.wait_until(lock, deadline) == std::cv_status::timeout && queue.empty()) {
      return std::nullopt;
    }
    b.check_available();
  }
}

bool MemoryBroker::renew_claim(const TaskId& task_id, const std::string& worker_id,
                               Duration visibility) {
  auto& b = *backend_;
  std::lock_guard<std::mutex> lock(b.mutex_);
  b.check_available();
  auto it = b.tasks_.find(task_id);
  if (it == b.tasks_.end() || !it->second.claim || it->second.claim->worker_id != worker_id) {
    return false;
  }
  it->second.claim->visibility_deadline = now_utc() + visibility;
  return true;
}

std::size_t MemoryBroker::reap_expired_claims(TimePoint now) {
  auto& b = *backend_;
  std::size_t reaped = 0;
  {
    std::lock_guard<std::mutex> lock(b.mutex_);
    b.check_available();
    for (auto& [id, record] : b.tasks_) {
      if (!record.claim || record.outcome || record.claim->visibility_deadline >= now) {
        continue;
      }
      record.claim.reset();
      record.attempt += 1;
      record.status = TaskState::kQueued;
      b.queues_[{record.envelope.version.to_string(), record.envelope.kind}].push_back(id);
      ++reaped;
    }
  }
  if (reaped > 0) {
    b.queue_grew_.notify_all();
  }
  return reaped;
}

void MemoryBroker::set_status(const TaskId& task_id, TaskState status) {
  auto& b = *backend_;
  std::lock_guard<std::mutex> lock(b.mutex_);
  b.check_available();
  auto it = b.tasks_.find(task_id);
  if (it == b.tasks_.end()) {
    throw UnknownTask(task_id.to_string());
  }
  it->second.status = apply_transition(it->second.status, status);
}

TaskState MemoryBroker::get_status(const TaskId& task_id) {
  auto& b = *backend_;
  std::lock_guard<std::mutex> lock(b.mutex_);
  b.check_available();
  auto it = b.tasks_.find(task_id);
  if (it == b.tasks_.end()) {
    throw UnknownTask(task_id.to_string());
  }
  return it->second.status;
}

void MemoryBroker::put_outcome(const TaskOutcome& outcome) {
  auto& b = *backend_;
  std::lock_guard<std::mutex> lock(b.mutex_);
  b.check_available();
  auto it = b.tasks_.find(outcome.task_id);
  if (it == b.tasks_.end()) {
    throw UnknownTask(outcome.task_id.to_string());
  }
  if (it->second.outcome) {
    throw OutcomeAlreadySet(outcome.task_id.to_string());
  }
  it->second.outcome = outcome;
  it->second.status = TaskState::kReady;
  it->second.claim.reset();
}

std::optional<TaskOutcome> MemoryBroker::fetch_outcome(const TaskId& task_id, TimePoint now) {
  auto& b = *backend_;
  std::lock_guard<std::mutex> lock(b.mutex_);
  b.check_available();
  auto it = b.tasks_.find(task_id);
  if (it == b.tasks_.end()) {
    throw UnknownTask(task_id.to_string());
  }
  auto& record = it->second;
  if (!record.outcome) {
    return std::nullopt;
  }
  if (!record.first_fetched_at) {
    record.first_fetched_at = now;
  }
  TaskOutcome outcome = *record.outcome;
  outcome.first_fetched_at = record.first_fetched_at;
  return outcome;
}

void MemoryBroker::delete_task(const TaskId& task_id) {
  auto& b = *backend_;
  std::lock_guard<std::mutex> lock(b.mutex_);
  b.check_available();
  auto it = b.tasks_.find(task_id);
  if (it == b.tasks_.end()) {
    return;
  }
  auto& queue =
      b.queues_[{it->second.envelope.version.to_string(), it->second.envelope.kind}];
  queue.erase(std::remove(queue.begin(), queue.end(), task_id), queue.end());
  b.tasks_.erase(it);
}

std::vector<TaskScanEntry> MemoryBroker::scan_tasks() {
  auto& b = *backend_;
  std::lock_guard<std::mutex> lock(b.mutex_);
  b.check_available();
  std::vector<TaskScanEntry> entries;
  entries.reserve(b.tasks_.size());
  for (const auto& [id, record] : b.tasks_) {
    entries.push_back({id, record.created_at, record.first_fetched_at,
                       record.outcome.has_value()});
  }
  return entries;
}

std::size_t MemoryBroker::debug_key_count() const {
  auto& b = *backend_;
  std::lock_guard<std::mutex> lock(b.mutex_);
  // Mirrors the networked layout: envelope/status/meta per task, plus
  // outcome, first-fetch stamp and claim when present, plus one key per
  // queue and one task index.
  std::size_t count = 1 + b.queues_.size();
  for (const auto& [id, record] : b.tasks_) {
    count += 3;
    if (record.outcome) {
      ++count;
    }
    if (record.first_fetched_at) {
      ++count;
    }
    if (record.claim) {
      ++count;
    }
  }
  return count;
}

}  // namespace esg
