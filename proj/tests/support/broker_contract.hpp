// Black-box contract every Broker implementation must satisfy. Each section
// starts from a fresh broker handle so backends cannot leak state between
// sections. Called from one TEST_CASE per implementation.
#pragma once

#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <functional>
#include <memory>
#include <mutex>
#include <set>
#include <thread>
#include <vector>

#include "esg/broker.hpp"

namespace esg::testing {

using BrokerFactory = std::function<std::shared_ptr<Broker>()>;

inline TaskEnvelope make_envelope(const std::string& version = "v1",
                                  EndpointKind kind = EndpointKind::kRequest,
                                  Json payload = Json{{"n", 1}}) {
  TaskEnvelope envelope;
  envelope.task_id = TaskId::generate();
  envelope.kind = kind;
  envelope.version = *VersionTag::parse(version);
  envelope.input_payload = std::move(payload);
  envelope.created_at = now_utc();
  envelope.attempt = 0;
  return envelope;
}

inline void broker_contract_suite(const BrokerFactory& fresh) {
  const auto v1 = *VersionTag::parse("v1");
  const auto kReq = EndpointKind::kRequest;
  const Duration kVisibility{60'000};

  INFO("enqueue stores the task queued; a duplicate id is rejected");
  {
    auto broker = fresh();
    auto envelope = make_envelope();
    broker->enqueue(envelope);
    CHECK(broker->get_status(envelope.task_id) == TaskState::kQueued);
    CHECK_THROWS_AS(broker->enqueue(envelope), DuplicateTask);
  }

  INFO("claim pops FIFO, sets running, and round-trips the envelope");
  {
    auto broker = fresh();
    auto first = make_envelope("v1", kReq, Json{{"payload", "a"}, {"x", Json::array({1, 2})}});
    auto second = make_envelope();
    broker->enqueue(first);
    broker->enqueue(second);

    auto claimed = broker->claim(v1, kReq, "w1", kVisibility, Duration{0});
    REQUIRE(claimed.has_value());
    CHECK(claimed->task_id == first.task_id);
    CHECK(claimed->attempt == 0);
    CHECK(claimed->input_payload == first.input_payload);
    CHECK(claimed->created_at == first.created_at);
    CHECK(broker->get_status(first.task_id) == TaskState::kRunning);

    auto next = broker->claim(v1, kReq, "w1", kVisibility, Duration{0});
    REQUIRE(next.has_value());
    CHECK(next->task_id == second.task_id);

    CHECK_FALSE(broker->claim(v1, kReq, "w1", kVisibility, Duration{0}).has_value());
  }

  INFO("queues are isolated by version and kind");
  {
    auto broker = fresh();
    broker->enqueue(make_envelope("v1", kReq));
    CHECK_FALSE(broker->claim(v1, EndpointKind::kFitParameters, "w", kVisibility, Duration{0})
                    .has_value());
    CHECK_FALSE(broker->claim(*VersionTag::parse("v2"), kReq, "w", kVisibility, Duration{0})
                    .has_value());
    CHECK(broker->claim(v1, kReq, "w", kVisibility, Duration{0}).has_value());
  }

  INFO("a blocked claim wakes when a task arrives");
  {
    auto broker = fresh();
    auto envelope = make_envelope();
    std::thread producer([&] {
      std::this_thread::sleep_for(std::chrono::milliseconds(100));
      broker->enqueue(envelope);
    });
    auto got = broker->claim(v1, kReq, "w", kVisibility, Duration{3'000});
    producer.join();
    REQUIRE(got.has_value());
    CHECK(got->task_id == envelope.task_id);
  }

  INFO("renew extends only the holder's live lease");
  {
    auto broker = fresh();
    auto envelope = make_envelope();
    broker->enqueue(envelope);
    REQUIRE(broker->claim(v1, kReq, "holder", kVisibility, Duration{0}).has_value());
    CHECK(broker->renew_claim(envelope.task_id, "holder", kVisibility));
    CHECK_FALSE(broker->renew_claim(envelope.task_id, "intruder", kVisibility));
    CHECK_FALSE(broker->renew_claim(TaskId::generate(), "holder", kVisibility));
  }

  INFO("an expired claim is re-queued exactly once with attempt + 1");
  {
    auto broker = fresh();
    auto envelope = make_envelope();
    broker->enqueue(envelope);
    REQUIRE(broker->claim(v1, kReq, "w1", Duration{1'000}, Duration{0}).has_value());

    CHECK(broker->reap_expired_claims(now_utc()) == 0);
    auto after_expiry = now_utc() + Duration{2'000};
    CHECK(broker->reap_expired_claims(after_expiry) == 1);
    CHECK(broker->reap_expired_claims(after_expiry) == 0);
    CHECK(broker->get_status(envelope.task_id) == TaskState::kQueued);

    auto redelivered = broker->claim(v1, kReq, "w2", kVisibility, Duration{0});
    REQUIRE(redelivered.has_value());
    CHECK(redelivered->task_id == envelope.task_id);
    CHECK(redelivered->attempt == 1);
    CHECK(redelivered->input_payload == envelope.input_payload);
  }

  INFO("a completed task is never reaped");
  {
    auto broker = fresh();
    auto envelope = make_envelope();
    broker->enqueue(envelope);
    REQUIRE(broker->claim(v1, kReq, "w1", Duration{1'000}, Duration{0}).has_value());
    broker->put_outcome(TaskOutcome::success(envelope.task_id, Json{{"ok", true}}, now_utc()));
    CHECK(broker->reap_expired_claims(now_utc() + Duration{10'000}) == 0);
    CHECK(broker->get_status(envelope.task_id) == TaskState::kReady);
  }

  INFO("status moves forward only");
  {
    auto broker = fresh();
    auto envelope = make_envelope();
    broker->enqueue(envelope);
    broker->set_status(envelope.task_id, TaskState::kQueued);  // X -> X is legal
    broker->set_status(envelope.task_id, TaskState::kReady);   // composite step is legal
    CHECK(broker->get_status(envelope.task_id) == TaskState::kReady);
    CHECK_THROWS_AS(broker->set_status(envelope.task_id, TaskState::kRunning),
                    IllegalTransition);
    CHECK_THROWS_AS(broker->set_status(TaskId::generate(), TaskState::kRunning), UnknownTask);
    CHECK_THROWS_AS(broker->get_status(TaskId::generate()), UnknownTask);
  }

  INFO("outcome is write-once and fetch stamps first_fetched_at once");
  {
    auto broker = fresh();
    auto envelope = make_envelope();
    broker->enqueue(envelope);
    REQUIRE(broker->claim(v1, kReq, "w", kVisibility, Duration{0}).has_value());

    CHECK_FALSE(broker->fetch_outcome(envelope.task_id, now_utc()).has_value());

    Json result{{"value", Json::array({1, 2, 3})}, {"text", "done"}};
    broker->put_outcome(TaskOutcome::success(envelope.task_id, result, now_utc()));
    CHECK(broker->get_status(envelope.task_id) == TaskState::kReady);
    CHECK_THROWS_AS(
        broker->put_outcome(TaskOutcome::failure(envelope.task_id, "late", now_utc())),
        OutcomeAlreadySet);

    auto first_fetch_time = now_utc();
    auto fetched = broker->fetch_outcome(envelope.task_id, first_fetch_time);
    REQUIRE(fetched.has_value());
    CHECK(fetched->verdict == Verdict::kSuccess);
    CHECK(fetched->result_payload == result);
    REQUIRE(fetched->first_fetched_at.has_value());
    CHECK(*fetched->first_fetched_at == first_fetch_time);

    auto refetched = broker->fetch_outcome(envelope.task_id, first_fetch_time + Duration{5'000});
    REQUIRE(refetched.has_value());
    CHECK(*refetched->first_fetched_at == first_fetch_time);

    CHECK_THROWS_AS(broker->put_outcome(TaskOutcome::success(TaskId::generate(), {}, now_utc())),
                    UnknownTask);
    CHECK_THROWS_AS(broker->fetch_outcome(TaskId::generate(), now_utc()), UnknownTask);
  }

  INFO("failure outcomes carry the error detail");
  {
    auto broker = fresh();
    auto envelope = make_envelope();
    broker->enqueue(envelope);
    broker->put_outcome(TaskOutcome::failure(envelope.task_id, "sensor exploded", now_utc()));
    auto fetched = broker->fetch_outcome(envelope.task_id, now_utc());
    REQUIRE(fetched.has_value());
    CHECK(fetched->verdict == Verdict::kFailure);
    CHECK(fetched->error_detail == "sensor exploded");
  }

  INFO("delete removes every trace; deleting unknown ids is a no-op");
  {
    auto broker = fresh();
    auto doomed = make_envelope();
    auto kept = make_envelope();
    broker->enqueue(doomed);
    broker->enqueue(kept);
    broker->delete_task(doomed.task_id);

    CHECK_THROWS_AS(broker->get_status(doomed.task_id), UnknownTask);
    auto claimed = broker->claim(v1, kReq, "w", kVisibility, Duration{0});
    REQUIRE(claimed.has_value());
    CHECK(claimed->task_id == kept.task_id);
    CHECK_FALSE(broker->claim(v1, kReq, "w", kVisibility, Duration{0}).has_value());

    broker->delete_task(TaskId::generate());  // no-op
    auto entries = broker->scan_tasks();
    REQUIRE(entries.size() == 1);
    CHECK(entries.front().task_id == kept.task_id);
  }

  INFO("scan reports creation, outcome and fetch metadata");
  {
    auto broker = fresh();
    auto pending = make_envelope();
    auto finished = make_envelope();
    broker->enqueue(pending);
    broker->enqueue(finished);
    broker->put_outcome(TaskOutcome::success(finished.task_id, Json{{"r", 1}}, now_utc()));
    auto fetch_time = now_utc();
    REQUIRE(broker->fetch_outcome(finished.task_id, fetch_time).has_value());

    auto entries = broker->scan_tasks();
    REQUIRE(entries.size() == 2);
    auto find = [&](const TaskId& id) {
      auto it = std::find_if(entries.begin(), entries.end(),
                             [&](const TaskScanEntry& e) { return e.task_id == id; });
      REQUIRE(it != entries.end());
      return *it;
    };
    auto pending_entry = find(pending.task_id);
    CHECK(pending_entry.created_at == pending.created_at);
    CHECK_FALSE(pending_entry.has_outcome);
    CHECK_FALSE(pending_entry.first_fetched_at.has_value());

    auto finished_entry = find(finished.task_id);
    CHECK(finished_entry.has_outcome);
    REQUIRE(finished_entry.first_fetched_at.has_value());
    CHECK(*finished_entry.first_fetched_at == fetch_time);
  }
}

// Exactly-once delivery under contention: `task_count` tasks, `thread_count`
// concurrent claimers, every task delivered to exactly one claimer.
inline void broker_claim_race(const BrokerFactory& fresh, int task_count, int thread_count) {
  auto broker = fresh();
  const auto v1 = *VersionTag::parse("v1");

  std::set<TaskId> expected;
  for (int i = 0; i < task_count; ++i) {
    auto envelope = make_envelope();
    expected.insert(envelope.task_id);
    broker->enqueue(envelope);
  }

  std::mutex seen_mutex;
  std::vector<TaskId> seen;
  std::atomic<int> remaining{task_count};
  std::vector<std::thread> claimers;
  claimers.reserve(static_cast<std::size_t>(thread_count));
  for (int t = 0; t < thread_count; ++t) {
    claimers.emplace_back([&, t] {
      auto worker_id = "racer-" + std::to_string(t);
      while (remaining.load() > 0) {
        auto claimed = broker->claim(v1, EndpointKind::kRequest, worker_id, Duration{60'000},
                                     Duration{50});
        if (!claimed) {
          if (remaining.load() <= 0) break;
          continue;
        }
        remaining.fetch_sub(1);
        std::lock_guard<std::mutex> lock(seen_mutex);
        seen.push_back(claimed->task_id);
      }
    });
  }
  for (auto& thread : claimers) thread.join();

  CHECK(seen.size() == static_cast<std::size_t>(task_count));
  std::set<TaskId> unique(seen.begin(), seen.end());
  CHECK(unique.size() == expected.size());
  CHECK(unique == expected);
}

}  // namespace esg::testing
