// Copyright 2026 the esg authors
// SPDX-License-Identifier: Apache-2.0

#include "esg/resp_broker.hpp"

#include <cstdio>

#include "esg/errors.hpp"
#include "esg/json.hpp"

namespace esg {

namespace {

std::string lease_to_json(const ClaimLease& lease) {
  Json j{
      {"worker_id", lease.worker_id},
      {"claimed_at", format_rfc3339(lease.claimed_at)},
      {"visibility_deadline", format_rfc3339(lease.visibility_deadline)},
  };
  return j.dump();
}

std::optional<ClaimLease> lease_from_json(const std::string& text) {
  Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    return std::nullopt;
  }
  auto claimed = parse_rfc3339(j.value("claimed_at", ""));
  auto deadline = parse_rfc3339(j.value("visibility_deadline", ""));
  if (!claimed || !deadline) {
    return std::nullopt;
  }
  return ClaimLease{j.value("worker_id", ""), *claimed, *deadline};
}

std::string meta_to_json(TimePoint created_at, std::uint32_t attempt) {
  Json j{{"created_at", format_rfc3339(created_at)}, {"attempt", attempt}};
  return j.dump();
}

// Timeout argument for BRPOP, fractional seconds, minimum one millisecond.
std::string brpop_timeout(Duration wait) {
  double seconds = static_cast<double>(wait.count()) / 1000.0;
  if (seconds < 0.001) {
    seconds = 0.001;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", seconds);
  return buf;
}

}  // namespace

RespBroker::RespBroker(resp::Target target, std::string key_namespace)
    : target_(std::move(target)), ns_(std::move(key_namespace)) {}

RespBroker::Borrowed::~Borrowed() {
  if (connection_ && connection_->healthy()) {
    std::lock_guard<std::mutex> lock(owner_.pool_mutex_);
    owner_.idle_.push_back(std::move(connection_));
  }
}

RespBroker::Borrowed RespBroker::borrow() {
  {
    std::lock_guard<std::mutex> lock(pool_mutex_);
    if (!idle_.empty()) {
      auto connection = std::move(idle_.back());
      idle_.pop_back();
      return Borrowed(*this, std::move(connection));
    }
  }
  return Borrowed(*this, std::make_unique<resp::Connection>(target_));
}

std::string RespBroker::queue_key(const VersionTag& version, EndpointKind kind) const {
  return ns_ + ":" + version.to_string() + ":" + std::string(to_path_segment(kind)) + ":queue";
}

std::string RespBroker::task_key(const TaskId& id, const char* suffix) const {
  return ns_ + ":task:" + id.to_string() + ":" + suffix;
}

std::string RespBroker::index_key() const { return ns_ + ":tasks:index"; }

void RespBroker::enqueue(const TaskEnvelope& envelope) {
  auto c = borrow();
  const auto id = envelope.task_id;
  auto created = c->command(
      {"SET", task_key(id, "envelope"), envelope.to_json().dump(), "NX"});
  if (!created.is_ok()) {
    if (created.kind == resp::Value::Kind::kError) {
      throw BrokerError("server error: " + created.text);
    }
    throw DuplicateTask(id.to_string());
  }
  resp::expect_simple(c->command(
      {"SET", task_key(id, "meta"), meta_to_json(envelope.created_at, envelope.attempt)}));
  resp::expect_simple(
      c->command({"SET", task_key(id, "status"), std::string(to_string(TaskState::kQueued))}));
  resp::expect_integer(c->command({"RPUSH", index_key(), id.to_string()}));
  resp::expect_integer(
      c->command({"LPUSH", queue_key(envelope.version, envelope.kind), id.to_string()}));
}

std::optional<TaskEnvelope> RespBroker::claim(const VersionTag& version, EndpointKind kind,
                                              const std::string& worker_id, Duration visibility,
                                              Duration wait) {
  auto c = borrow();
  const std::string queue = queue_key(version, kind);
  const auto deadline = std::chrono::steady_clock::now() + wait;
  for (;;) {
    const auto remaining = std::chrono::duration_cast<Duration>(
        deadline - std::chrono::steady_clock::now());
    std::optional<std::string> id_text;
    if (remaining.count() > 0) {
      auto popped = c->command({"BRPOP", queue, brpop_timeout(remaining)},
                               remaining + Duration{5'000});
      auto items = resp::expect_array(popped);
      if (items.size() == 2) {
        id_text = items[1].text;
      }
    } else {
      id_text = resp::expect_bulk(c->command({"RPOP", queue}));
    }
    if (!id_text) {
      return std::nullopt;
    }
    auto id = TaskId::parse(*id_text);
    if (!id) {
      continue;  // foreign junk in the queue
    }
    auto envelope_text = resp::expect_bulk(c->command({"GET", task_key(*id, "envelope")}));
    if (!envelope_text) {
      continue;  // task deleted while queued
    }
    if (resp::expect_integer(c->command({"EXISTS", task_key(*id, "outcome")})) > 0) {
      continue;  // already completed
    }
    const auto now = now_utc();
    ClaimLease lease{worker_id, now, now + visibility};
    auto acquired =
        c->command({"SET", task_key(*id, "claim"), lease_to_json(lease), "NX"});
    if (!acquired.is_ok()) {
      continue;  // somebody else holds it
    }
    resp::expect_simple(c->command(
        {"SET", task_key(*id, "status"), std::string(to_string(TaskState::kRunning))}));
    auto envelope = TaskEnvelope::from_json(Json::parse(*envelope_text, nullptr, false));
    if (!envelope) {
      c->command({"DEL", task_key(*id, "claim")});
      continue;  // corrupt envelope; leave the task to GC
    }
    auto meta_text = resp::expect_bulk(c->command({"GET", task_key(*id, "meta")}));
    if (meta_text) {
      Json meta = Json::parse(*meta_text, nullptr, false);
      if (meta.is_object()) {
        envelope->attempt = meta.value("attempt", 0u);
      }
    }
    return *envelope;
  }
}

bool RespBroker::renew_claim(const TaskId& task_id, const std::string& worker_id,
                             Duration visibility) {
  auto c = borrow();
  auto text = resp::expect_bulk(c->command({"GET", task_key(task_id, "claim")}));
  if (!text) {
    return false;
  }
  auto lease = lease_from_json(*text);
  if (!lease || lease->worker_id != worker_id) {
    return false;
  }
  const auto now = now_utc();
  lease->visibility_deadline = now + visibility;
  // XX: only refresh an existing lease; if a reaper removed it in between the
  // claim is lost and the caller learns it here.
  auto updated = c->command({"SET", task_key(task_id, "claim"), lease_to_json(*lease), "XX"});
  return updated.is_ok();
}

std::size_t RespBroker::reap_expired_claims(TimePoint now) {
  auto c = borrow();
  std::size_t reaped = 0;
  auto ids = resp::expect_array(c->command({"LRANGE", index_key(), "0", "-1"}));
  for (const auto& entry : ids) {
    auto id = TaskId::parse(entry.text);
    if (!id) {
      continue;
    }
    auto claim_text = resp::expect_bulk(c->command({"GET", task_key(*id, "claim")}));
    if (!claim_text) {
      continue;
    }
    auto lease = lease_from_json(*claim_text);
    if (!lease || lease->visibility_deadline >= now) {
      continue;
    }
    if (resp::expect_integer(c->command({"EXISTS", task_key(*id, "outcome")})) > 0) {
      c->command({"DEL", task_key(*id, "claim")});
      continue;
    }
    // DEL is the arbitration point: of several concurrent reapers exactly one
    // sees 1 here and owns the re-queue.
    if (resp::expect_integer(c->command({"DEL", task_key(*id, "claim")})) != 1) {
      continue;
    }
    auto envelope_text = resp::expect_bulk(c->command({"GET", task_key(*id, "envelope")}));
    if (!envelope_text) {
      continue;  // deleted underneath us; nothing to re-queue
    }
    auto envelope = TaskEnvelope::from_json(Json::parse(*envelope_text, nullptr, false));
    if (!envelope) {
      continue;
    }
    std::uint32_t attempt = 0;
    auto meta_text = resp::expect_bulk(c->command({"GET", task_key(*id, "meta")}));
    if (meta_text) {
      Json meta = Json::parse(*meta_text, nullptr, false);
      if (meta.is_object()) {
        attempt = meta.value("attempt", 0u);
      }
    }
    resp::expect_simple(c->command(
        {"SET", task_key(*id, "meta"), meta_to_json(envelope->created_at, attempt + 1)}));
    resp::expect_simple(c->command(
        {"SET", task_key(*id, "status"), std::string(to_string(TaskState::kQueued))}));
    resp::expect_integer(
        c->command({"LPUSH", queue_key(envelope->version, envelope->kind), id->to_string()}));
    ++reaped;
  }
  return reaped;
}

void RespBroker::set_status(const TaskId& task_id, TaskState status) {
  auto c = borrow();
  auto current_text = resp::expect_bulk(c->command({"GET", task_key(task_id, "status")}));
  if (!current_text) {
    throw UnknownTask(task_id.to_string());
  }
  auto current = task_state_from_string(*current_text);
  if (!current) {
    throw BrokerError("corrupt status value: " + *current_text);
  }
  auto next = apply_transition(*current, status);
  resp::expect_simple(
      c->command({"SET", task_key(task_id, "status"), std::string(to_string(next))}));
}

TaskState RespBroker::get_status(const TaskId& task_id) {
  auto c = borrow();
  auto text = resp::expect_bulk(c->command({"GET", task_key(task_id, "status")}));
  if (!text) {
    throw UnknownTask(task_id.to_string());
  }
  auto state = task_state_from_string(*text);
  if (!state) {
    throw BrokerError("corrupt status value: " + *text);
  }
  return *state;
}

void RespBroker::put_outcome(const TaskOutcome& outcome) {
  auto c = borrow();
  const auto& id = outcome.task_id;
  if (resp::expect_integer(c->command({"EXISTS", task_key(id, "envelope")})) == 0) {
    throw UnknownTask(id.to_string());
  }
  auto stored = c->command({"SET", task_key(id, "outcome"), outcome.to_json().dump(), "NX"});
  if (!stored.is_ok()) {
    if (stored.kind == resp::Value::Kind::kError) {
      throw BrokerError("server error: " + stored.text);
    }
    throw OutcomeAlreadySet(id.to_string());
  }
  resp::expect_simple(
      c->command({"SET", task_key(id, "status"), std::string(to_string(TaskState::kReady))}));
  c->command({"DEL", task_key(id, "claim")});
}

std::optional<TaskOutcome> RespBroker::fetch_outcome(const TaskId& task_id, TimePoint now) {
  auto c = borrow();
  auto outcome_text = resp::expect_bulk(c->command({"GET", task_key(task_id, "outcome")}));
  if (!outcome_text) {
    if (resp::expect_integer(c->command({"EXISTS", task_key(task_id, "envelope")})) == 0) {
      throw UnknownTask(task_id.to_string());
    }
    return std::nullopt;
  }
  // First fetch stamps the retention clock; NX keeps the stamp write-once.
  c->command({"SET", task_key(task_id, "fetched"), format_rfc3339(now), "NX"});
  auto outcome = TaskOutcome::from_json(Json::parse(*outcome_text, nullptr, false));
  if (!outcome) {
    throw BrokerError("corrupt outcome for task " + task_id.to_string());
  }
  auto stamp = resp::expect_bulk(c->command({"GET", task_key(task_id, "fetched")}));
  if (stamp) {
    outcome->first_fetched_at = parse_rfc3339(*stamp);
  }
  return outcome;
}

void RespBroker::delete_task(const TaskId& task_id) {
  auto c = borrow();
  auto envelope_text = resp::expect_bulk(c->command({"GET", task_key(task_id, "envelope")}));
  if (envelope_text) {
    auto envelope = TaskEnvelope::from_json(Json::parse(*envelope_text, nullptr, false));
    if (envelope) {
      c->command(
          {"LREM", queue_key(envelope->version, envelope->kind), "0", task_id.to_string()});
    }
  }
  // Status first so concurrent readers stop seeing the task, envelope last so
  // its presence brackets every other key's lifetime.
  c->command({"DEL", task_key(task_id, "status"), task_key(task_id, "meta"),
              task_key(task_id, "outcome"), task_key(task_id, "fetched"),
              task_key(task_id, "claim")});
  c->command({"LREM", index_key(), "0", task_id.to_string()});
  c->command({"DEL", task_key(task_id, "envelope")});
}

std::vector<TaskScanEntry> RespBroker::scan_tasks() {
  auto c = borrow();
  std::vector<TaskScanEntry> entries;
  auto ids = resp::expect_array(c->command({"LRANGE", index_key(), "0", "-1"}));
  for (const auto& item : ids) {
    auto id = TaskId::parse(item.text);
    if (!id) {
      continue;
    }
    auto meta_text = resp::expect_bulk(c->command({"GET", task_key(*id, "meta")}));
    if (!meta_text) {
      continue;  // deleted between LRANGE and GET
    }
    Json meta = Json::parse(*meta_text, nullptr, false);
    if (!meta.is_object()) {
      continue;
    }
    auto created = parse_rfc3339(meta.value("created_at", ""));
    if (!created) {
      continue;
    }
    TaskScanEntry entry;
    entry.task_id = *id;
    entry.created_at = *created;
    auto stamp = resp::expect_bulk(c->command({"GET", task_key(*id, "fetched")}));
    if (stamp) {
      entry.first_fetched_at = parse_rfc3339(*stamp);
    }
    entry.has_outcome =
        resp::expect_integer(c->command({"EXISTS", task_key(*id, "outcome")})) > 0;
    entries.push_back(entry);
  }
  return entries;
}

}  // namespace esg
