// Copyright 2026 the esg authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "esg/broker.hpp"
#include "esg/service.hpp"

namespace esg {

struct WorkerOptions {
  std::string worker_id;                // generated when empty
  Duration visibility{30 * 60'000};     // claim lease length
  Duration heartbeat{60'000};           // lease renewal cadence
  Duration poll_wait{1'000};            // blocking claim wait per loop turn
  Duration shutdown_grace{30'000};      // in-flight task allowance after stop
  std::optional<Duration> max_runtime;  // per-task cap; overrun becomes Failure
  BackoffPolicy backoff;
};

// The computation process: claims one task at a time, runs the bound handler,
// publishes the outcome. Horizontal scale comes from more worker processes.
class Worker {
 public:
  // Throws SpecInvalid when a subscription is not resolvable in the spec.
  Worker(ServiceSpec spec, std::shared_ptr<Broker> broker,
         std::vector<std::pair<VersionTag, EndpointKind>> subscriptions,
         WorkerOptions options = {});

  const std::string& id() const { return options_.worker_id; }

  // Claim/execute loop until request_stop(). An in-flight handler gets the
  // shutdown grace period; past it the task is abandoned and its lease left
  // to expire for redelivery elsewhere.
  void run();

  void request_stop() { stop_.store(true); }
  bool stopping() const { return stop_.load(); }

  // Single loop turn, for tests: claims (waiting up to `wait`) and executes
  // one task. Returns whether a task ran.
  bool execute_one(Duration wait);

 private:
  void execute(const TaskEnvelope& envelope);
  void publish(const TaskOutcome& outcome);

  ServiceSpec spec_;
  std::shared_ptr<Broker> broker_;
  std::vector<std::pair<VersionTag, EndpointKind>> subscriptions_;
  WorkerOptions options_;
  std::atomic<bool> stop_{false};
};

}  // namespace esg
