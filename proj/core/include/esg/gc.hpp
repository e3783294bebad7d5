// Copyright 2026 the esg authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <vector>

#include "esg/broker.hpp"

namespace esg {

// Retention rules for completed and abandoned tasks. A task is deleted once
// its result has been fetched and the retention window has passed, or
// unconditionally once the absolute TTL has passed since creation.
struct GcPolicy {
  Duration retain_after_fetch{15 * 60'000};
  Duration absolute_ttl{48 * 3'600'000};

  // Throws SpecInvalid when a window is negative or the TTL does not exceed
  // the post-fetch retention.
  void check_valid() const;
};

// One deletion pass over every known task. Returns the ids actually deleted.
// Broker failures propagate; a periodic runner just retries next cycle.
std::vector<TaskId> sweep(Broker& broker, const GcPolicy& policy, TimePoint now);

// Periodic sweeper. Each cycle first requeues expired claims, then applies
// the retention policy, so a dead worker's task is redelivered rather than
// lingering until the TTL.
class GcProcess {
 public:
  GcProcess(std::shared_ptr<Broker> broker, GcPolicy policy,
            Duration interval = Duration{60'000});

  // Blocks until request_stop().
  void run();
  void request_stop();

  // Single cycle, for tests: reap then sweep. Returns deleted ids.
  std::vector<TaskId> run_once(TimePoint now);

 private:
  std::shared_ptr<Broker> broker_;
  GcPolicy policy_;
  Duration interval_;
  std::mutex mutex_;
  std::condition_variable wake_;
  bool stopping_ = false;
};

}  // namespace esg
