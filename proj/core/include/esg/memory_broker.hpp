// Copyright 2026 the esg authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <condition_variable>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "esg/broker.hpp"

namespace esg {

// Shared in-process backend. Several MemoryBroker handles over one backend
// model several processes over one network store: state written through one
// handle is immediately visible through the others.
class MemoryBackend {
 public:
  static std::shared_ptr<MemoryBackend> create();

  // Process-global backend registry for memory://{name} connection strings;
  // the same name always yields the same backend within this process.
  static std::shared_ptr<MemoryBackend> named(const std::string& name);

  // Test hook: while set, every operation throws BrokerUnavailable.
  void set_unavailable(bool unavailable);

 private:
  friend class MemoryBroker;

  struct QueueKey {
    std::string version;
    EndpointKind kind;
    auto operator<=>(const QueueKey&) const = default;
  };

  struct TaskRecord {
    TaskEnvelope envelope;
    TaskState status = TaskState::kQueued;
    std::uint32_t attempt = 0;
    TimePoint created_at;
    std::optional<TimePoint> first_fetched_at;
    std::optional<TaskOutcome> outcome;
    std::optional<ClaimLease> claim;
  };

  void check_available() const;

  mutable std::mutex mutex_;
  std::condition_variable queue_grew_;
  std::map<QueueKey, std::deque<TaskId>> queues_;
  std::map<TaskId, TaskRecord> tasks_;
  bool unavailable_ = false;
};

// Broker over a MemoryBackend, for tests and single-node deployments.
class MemoryBroker : public Broker {
 public:
  explicit MemoryBroker(std::shared_ptr<MemoryBackend> backend)
      : backend_(std::move(backend)) {}

  void enqueue(const TaskEnvelope& envelope) override;
  std::optional<TaskEnvelope> claim(const VersionTag& version, EndpointKind kind,
                                    const std::string& worker_id, Duration visibility,
                                    Duration wait) override;
  bool renew_claim(const TaskId& task_id, const std::string& worker_id,
                   Duration visibility) override;
  std::size_t reap_expired_claims(TimePoint now) override;
  void set_status(const TaskId& task_id, TaskState status) override;
  TaskState get_status(const TaskId& task_id) override;
  void put_outcome(const TaskOutcome& outcome) override;
  std::optional<TaskOutcome> fetch_outcome(const TaskId& task_id, TimePoint now) override;
  void delete_task(const TaskId& task_id) override;
  std::vector<TaskScanEntry> scan_tasks() override;

  // Live key count as the networked key layout would store it; GC liveness
  // tests bound this.
  std::size_t debug_key_count() const;

 private:
  std::shared_ptr<MemoryBackend> backend_;
};

}  // namespace esg
