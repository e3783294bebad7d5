// Copyright 2026 the esg authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "esg/errors.hpp"
#include "esg/time.hpp"
#include "esg/types.hpp"

namespace esg {

// Lease a worker holds on a claimed task. While the lease is live the task is
// invisible to other claimers; past the deadline a reaper may re-queue it.
struct ClaimLease {
  std::string worker_id;
  TimePoint claimed_at;
  TimePoint visibility_deadline;
};

// Metadata row yielded by scan_tasks; enough for a GC sweep decision.
struct TaskScanEntry {
  TaskId task_id;
  TimePoint created_at;
  std::optional<TimePoint> first_fetched_at;
  bool has_outcome = false;
};

// Shared state and queue fabric between API, worker and GC processes. A
// handle is safe for concurrent use by many threads, and state written
// through one handle is visible through every other handle on the same
// backend. All operations may throw BrokerUnavailable on backend loss.
class Broker {
 public:
  virtual ~Broker() = default;

  // Stores the envelope, sets status Queued and appends the task to its
  // (version, kind) queue. Throws DuplicateTask when the id already exists.
  virtual void enqueue(const TaskEnvelope& envelope) = 0;

  // Atomically pops the queue head, records a lease and sets status Running.
  // Blocks up to `wait` when the queue is empty, then returns nullopt. The
  // returned envelope's attempt counts prior deliveries (0 on the first).
  virtual std::optional<TaskEnvelope> claim(const VersionTag& version, EndpointKind kind,
                                            const std::string& worker_id, Duration visibility,
                                            Duration wait) = 0;

  // Extends the caller's live lease by `visibility` from now. Returns false
  // when the lease no longer exists or is held by another worker; the caller
  // should treat false as a lost claim.
  virtual bool renew_claim(const TaskId& task_id, const std::string& worker_id,
                           Duration visibility) = 0;

  // Re-queues every task whose lease deadline has passed and that has no
  // outcome yet; increments its attempt counter. Returns how many tasks were
  // re-queued. Safe to run from several processes concurrently.
  virtual std::size_t reap_expired_claims(TimePoint now) = 0;

  // Status bookkeeping. set_status enforces the lifecycle ordering and throws
  // IllegalTransition on a backward move; both throw UnknownTask.
  virtual void set_status(const TaskId& task_id, TaskState status) = 0;
  virtual TaskState get_status(const TaskId& task_id) = 0;

  // Stores the outcome and forces status Ready in the same logical step.
  // Throws UnknownTask or OutcomeAlreadySet.
  virtual void put_outcome(const TaskOutcome& outcome) = 0;

  // Returns the outcome when present (never deleting it), else nullopt.
  // The first successful fetch stamps first_fetched_at = now; later fetches
  // return the same stamp. Throws UnknownTask.
  virtual std::optional<TaskOutcome> fetch_outcome(const TaskId& task_id, TimePoint now) = 0;

  // Removes every key of the task; deleting an unknown task is a no-op.
  virtual void delete_task(const TaskId& task_id) = 0;

  // Yields metadata for every live task. Eventually consistent: tasks created
  // or deleted during the scan may be missed or repeated once.
  virtual std::vector<TaskScanEntry> scan_tasks() = 0;
};

// Retry schedule for BrokerUnavailable: exponential with full deadline cap
// and symmetric jitter, so many clients recovering together do not stampede.
struct BackoffPolicy {
  Duration base{100};
  double factor = 2.0;
  Duration cap{10'000};
  double jitter = 0.2;  // +-20%

  // Delay before retry number `attempt` (0-based). Jitter is sampled fresh
  // on every call.
  Duration delay(unsigned attempt) const;
};

// Runs `action`, retrying on BrokerUnavailable per `policy` up to
// `max_attempts` total attempts; rethrows the last error when exhausted.
void with_backoff(const BackoffPolicy& policy, unsigned max_attempts,
                  const std::function<void()>& action);

}  // namespace esg
