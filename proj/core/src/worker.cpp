// Copyright 2026 the esg authors
// SPDX-License-Identifier: Apache-2.0

#include "esg/worker.hpp"

#include <unistd.h>

#include <chrono>
#include <condition_variable>
#include <exception>
#include <mutex>
#include <random>
#include <thread>

#include "esg/logging.hpp"
#include "esg/schema.hpp"

namespace esg {

namespace {

std::string default_worker_id() {
  static std::mt19937_64 rng{std::random_device{}()};
  static std::mutex mutex;
  std::uint32_t tag;
  {
    std::lock_guard<std::mutex> lock(mutex);
    tag = static_cast<std::uint32_t>(rng());
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "worker-%d-%08x", static_cast<int>(::getpid()), tag);
  return buf;
}

// One handler invocation, run on its own thread so the worker can enforce
// max_runtime and the shutdown grace period without being held hostage.
struct HandlerRun {
  Json input;
  Handler handler;
  std::function<void()> progress;

  std::mutex mutex;
  std::condition_variable done_cv;
  bool done = false;
  bool ok = false;
  Json result;
  std::string error;
};

void run_handler(const std::shared_ptr<HandlerRun>& run) {
  Json result;
  bool ok = false;
  std::string error;
  try {
    result = run->handler(run->input, run->progress);
    ok = true;
  } catch (const HandlerFailure& failure) {
    error = failure.what();
  } catch (const std::exception& ex) {
    error = std::string("handler raised: ") + ex.what();
  } catch (...) {
    error = "handler raised a non-standard exception";
  }
  std::lock_guard<std::mutex> lock(run->mutex);
  run->ok = ok;
  run->result = std::move(result);
  run->error = std::move(error);
  run->done = true;
  run->done_cv.notify_all();
}

}  // namespace

Worker::Worker(ServiceSpec spec, std::shared_ptr<Broker> broker,
               std::vector<std::pair<VersionTag, EndpointKind>> subscriptions,
               WorkerOptions options)
    : spec_(std::move(spec)),
      broker_(std::move(broker)),
      subscriptions_(std::move(subscriptions)),
      options_(std::move(options)) {
  spec_.check_valid();
  if (subscriptions_.empty()) throw SpecInvalid("worker needs at least one subscription");
  for (const auto& [version, kind] : subscriptions_) {
    if (spec_.handler(version, kind) == nullptr) {
      throw SpecInvalid("subscription not offered by service: " + version.to_string() + "/" +
                        std::string(to_path_segment(kind)));
    }
  }
  if (options_.worker_id.empty()) options_.worker_id = default_worker_id();
}

void Worker::run() {
  log::info("worker.started", {{"worker_id", options_.worker_id}});
  int consecutive_failures = 0;
  while (!stop_.load()) {
    try {
      bool ran = execute_one(options_.poll_wait);
      consecutive_failures = 0;
      (void)ran;
    } catch (const BrokerUnavailable& ex) {
      auto delay = options_.backoff.delay(consecutive_failures++);
      log::warn("worker.broker_unavailable",
                {{"worker_id", options_.worker_id},
                 {"error", ex.what()},
                 {"retry_in_ms", delay.count()}});
      std::this_thread::sleep_for(delay);
    }
  }
  log::info("worker.stopped", {{"worker_id", options_.worker_id}});
}

bool Worker::execute_one(Duration wait) {
  // Round-robin over subscriptions; the wait budget is spent on the first so
  // a single-queue worker blocks efficiently instead of spinning.
  bool first = true;
  for (const auto& [version, kind] : subscriptions_) {
    auto claimed =
        broker_->claim(version, kind, options_.worker_id, options_.visibility,
                       first ? wait : Duration{0});
    first = false;
    if (claimed) {
      execute(*claimed);
      return true;
    }
  }
  return false;
}

void Worker::execute(const TaskEnvelope& envelope) {
  auto started = std::chrono::steady_clock::now();
  auto run = std::make_shared<HandlerRun>();
  run->input = envelope.input_payload;
  run->handler = *spec_.handler(envelope.version, envelope.kind);

  // Explicit progress from the handler renews the lease immediately; long
  // silent stretches are covered by the heartbeat thread below.
  auto broker = broker_;
  auto task_id = envelope.task_id;
  auto worker_id = options_.worker_id;
  auto visibility = options_.visibility;
  run->progress = [broker, task_id, worker_id, visibility] {
    try {
      broker->renew_claim(task_id, worker_id, visibility);
    } catch (const BrokerError&) {
      // Progress renewal is best effort; the heartbeat retries on cadence.
    }
  };

  std::thread handler_thread([run] { run_handler(run); });

  std::atomic<bool> heartbeat_stop{false};
  std::mutex heartbeat_mutex;
  std::condition_variable heartbeat_cv;
  std::thread heartbeat_thread([&] {
    std::unique_lock<std::mutex> lock(heartbeat_mutex);
    while (!heartbeat_cv.wait_for(lock, options_.heartbeat,
                                  [&] { return heartbeat_stop.load(); })) {
      lock.unlock();
      try {
        bool held = broker_->renew_claim(task_id, worker_id, visibility);
        if (!held) {
          log::warn("worker.lease_lost",
                    {{"worker_id", worker_id}, {"task_id", task_id.to_string()}});
        }
      } catch (const BrokerError& ex) {
        log::warn("worker.heartbeat_failed",
                  {{"worker_id", worker_id},
                   {"task_id", task_id.to_string()},
                   {"error", ex.what()}});
      }
      lock.lock();
    }
  });

  auto stop_heartbeat = [&] {
    {
      std::lock_guard<std::mutex> lock(heartbeat_mutex);
      heartbeat_stop.store(true);
    }
    heartbeat_cv.notify_all();
    heartbeat_thread.join();
  };

  // Await the handler; enforce max_runtime and, once a stop is requested,
  // the shutdown grace period.
  bool finished = false;
  bool timed_out = false;
  bool abandoned = false;
  std::optional<std::chrono::steady_clock::time_point> stop_seen;
  {
    std::unique_lock<std::mutex> lock(run->mutex);
    for (;;) {
      if (run->done_cv.wait_for(lock, std::chrono::milliseconds(50),
                                [&] { return run->done; })) {
        finished = true;
        break;
      }
      auto now = std::chrono::steady_clock::now();
      if (options_.max_runtime && now - started >= *options_.max_runtime) {
        timed_out = true;
        break;
      }
      if (stop_.load()) {
        if (!stop_seen) stop_seen = now;
        if (now - *stop_seen >= std::chrono::milliseconds(options_.shutdown_grace)) {
          abandoned = true;
          break;
        }
      }
    }
  }

  stop_heartbeat();

  auto elapsed_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - started)
                        .count();

  if (abandoned) {
    // The lease is left to expire so another worker picks the task up; the
    // straggling handler thread owns only `run` and is harmless.
    handler_thread.detach();
    log::warn("worker.task_abandoned", {{"worker_id", worker_id},
                                        {"task_id", task_id.to_string()},
                                        {"attempt", envelope.attempt},
                                        {"duration_ms", elapsed_ms}});
    return;
  }

  TaskOutcome outcome;
  if (timed_out) {
    handler_thread.detach();
    outcome = TaskOutcome::failure(task_id, "task exceeded the maximum runtime", now_utc());
  } else {
    handler_thread.join();
    (void)finished;
    if (run->ok) {
      const schema::Node* output_schema = spec_.output_schema(envelope.version, envelope.kind);
      auto validation = schema::validate(*output_schema, run->result);
      if (validation.ok()) {
        outcome = TaskOutcome::success(task_id, run->result, now_utc());
      } else {
        // A handler emitting off-contract output is a service bug; callers
        // get a Failure, never an invalid payload.
        outcome = TaskOutcome::failure(
            task_id,
            "handler output violates the output contract: " +
                validation.errors.front().path + ": " + validation.errors.front().message,
            now_utc());
      }
    } else {
      outcome = TaskOutcome::failure(task_id, run->error, now_utc());
    }
  }

  publish(outcome);
  log::info("worker.task_done", {{"worker_id", worker_id},
                                 {"task_id", task_id.to_string()},
                                 {"attempt", envelope.attempt},
                                 {"duration_ms", elapsed_ms},
                                 {"verdict", outcome.verdict == Verdict::kSuccess
                                                 ? "success"
                                                 : "failure"}});
}

void Worker::publish(const TaskOutcome& outcome) {
  try {
    with_backoff(options_.backoff, 5, [&] { broker_->put_outcome(outcome); });
  } catch (const OutcomeAlreadySet&) {
    // A twin delivery (expired lease redelivered) won the race; the first
    // outcome stands and this one is discarded.
    log::info("worker.outcome_discarded",
              {{"worker_id", options_.worker_id},
               {"task_id", outcome.task_id.to_string()}});
  } catch (const UnknownTask&) {
    // The task was deleted while running (TTL sweep); nothing to record.
    log::warn("worker.task_vanished", {{"worker_id", options_.worker_id},
                                       {"task_id", outcome.task_id.to_string()}});
  } catch (const BrokerUnavailable& ex) {
    log::error("worker.outcome_lost", {{"worker_id", options_.worker_id},
                                       {"task_id", outcome.task_id.to_string()},
                                       {"error", ex.what()}});
  }
}

}  // namespace esg
