// Copyright 2026 the esg authors
// SPDX-License-Identifier: Apache-2.0

#include "esg/gc.hpp"

#include "esg/logging.hpp"

namespace esg {

void GcPolicy::check_valid() const {
  if (retain_after_fetch.count() < 0) throw SpecInvalid("retain_after_fetch must not be negative");
  if (absolute_ttl <= retain_after_fetch) {
    throw SpecInvalid("absolute_ttl must exceed retain_after_fetch");
  }
}

std::vector<TaskId> sweep(Broker& broker, const GcPolicy& policy, TimePoint now) {
  policy.check_valid();
  std::vector<TaskId> deleted;
  for (const auto& entry : broker.scan_tasks()) {
    bool fetched_long_ago =
        entry.first_fetched_at && now - *entry.first_fetched_at > policy.retain_after_fetch;
    bool past_ttl = now - entry.created_at > policy.absolute_ttl;
    if (!fetched_long_ago && !past_ttl) continue;
    // delete_task is a no-op for ids a concurrent sweeper already removed.
    broker.delete_task(entry.task_id);
    deleted.push_back(entry.task_id);
  }
  return deleted;
}

GcProcess::GcProcess(std::shared_ptr<Broker> broker, GcPolicy policy, Duration interval)
    : broker_(std::move(broker)), policy_(policy), interval_(interval) {
  policy_.check_valid();
  if (interval_.count() <= 0) throw SpecInvalid("gc interval must be positive");
}

std::vector<TaskId> GcProcess::run_once(TimePoint now) {
  auto requeued = broker_->reap_expired_claims(now);
  auto deleted = sweep(*broker_, policy_, now);
  log::info("gc.cycle", {{"requeued", requeued}, {"deleted", deleted.size()}});
  return deleted;
}

void GcProcess::run() {
  log::info("gc.started", {{"interval_ms", interval_.count()}});
  std::unique_lock<std::mutex> lock(mutex_);
  for (;;) {
    lock.unlock();
    try {
      run_once(now_utc());
    } catch (const BrokerError& ex) {
      log::warn("gc.cycle_failed", {{"error", ex.what()}});
    }
    lock.lock();
    if (wake_.wait_for(lock, interval_, [&] { return stopping_; })) break;
  }
  log::info("gc.stopped", {});
}

void GcProcess::request_stop() {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    stopping_ = true;
  }
  wake_.notify_all();
}

}  // namespace esg
