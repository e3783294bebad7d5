// Copyright 2026 the esg authors
// SPDX-License-Identifier: Apache-2.0

#include "esg/types.hpp"

#include <mutex>
#include <random>

#include "esg/errors.hpp"

namespace esg {

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

TaskId TaskId::generate() {
  static std::mutex mu;
  static std::mt19937_64 rng = [] {
    std::random_device rd;
    std::seed_seq seq{rd(), rd(), rd(), rd(), rd(), rd(), rd(), rd()};
    return std::mt19937_64(seq);
  }();

  std::uint64_t hi, lo;
  {
    std::lock_guard lock(mu);
    hi = rng();
    lo = rng();
  }
  TaskId id;
  for (int i = 0; i < 8; ++i) id.bytes_[i] = static_cast<std::uint8_t>(hi >> (8 * (7 - i)));
  for (int i = 0; i < 8; ++i) id.bytes_[8 + i] = static_cast<std::uint8_t>(lo >> (8 * (7 - i)));
  id.bytes_[6] = static_cast<std::uint8_t>((id.bytes_[6] & 0x0f) | 0x40);  // version 4
  id.bytes_[8] = static_cast<std::uint8_t>((id.bytes_[8] & 0x3f) | 0x80);  // variant 10
  return id;
}

std::optional<TaskId> TaskId::parse(std::string_view text) {
  if (text.size() != 36) return std::nullopt;
  static constexpr int kDashes[4] = {8, 13, 18, 23};
  for (int pos : kDashes)
    if (text[pos] != '-') return std::nullopt;
  TaskId id;
  std::size_t out = 0;
  for (std::size_t i = 0; i < 36;) {
    if (text[i] == '-') {
      ++i;
      continue;
    }
    const int hi = hex_value(text[i]);
    const int lo = hex_value(text[i + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    id.bytes_[out++] = static_cast<std::uint8_t>((hi << 4) | lo);
    i += 2;
  }
  return id;
}

std::string TaskId::to_string() const {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(36);
  for (std::size_t i = 0; i < bytes_.size(); ++i) {
    if (i == 4 || i == 6 || i == 8 || i == 10) out.push_back('-');
    out.push_back(kHex[bytes_[i] >> 4]);
    out.push_back(kHex[bytes_[i] & 0x0f]);
  }
  return out;
}

std::string_view to_string(TaskState state) {
  switch (state) {
    case TaskState::kQueued:
      return "queued";
    case TaskState::kRunning:
      return "running";
    case TaskState::kReady:
      return "ready";
  }
  return "queued";
}

std::optional<TaskState> task_state_from_string(std::string_view text) {
  if (text == "queued") return TaskState::kQueued;
  if (text == "running") return TaskState::kRunning;
  if (text == "ready") return TaskState::kReady;
  return std::nullopt;
}

bool transition_allowed(TaskState from, TaskState to) {
  return static_cast<int>(to) >= static_cast<int>(from);
}

TaskState apply_transition(TaskState current, TaskState next) {
  if (!transition_allowed(current, next))
    throw IllegalTransition(std::string(to_string(current)), std::string(to_string(next)));
  return next;
}

Json status_to_json(TaskState state) { return Json{{"status", to_string(state)}}; }

std::optional<TaskState> status_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("status") || !j["status"].is_string()) return std::nullopt;
  return task_state_from_string(j["status"].get<std::string>());
}

std::string_view to_path_segment(EndpointKind kind) {
  return kind == EndpointKind::kRequest ? "request" : "fit-parameters";
}

std::optional<EndpointKind> endpoint_kind_from_segment(std::string_view segment) {
  if (segment == "request") return EndpointKind::kRequest;
  if (segment == "fit-parameters") return EndpointKind::kFitParameters;
  return std::nullopt;
}

std::optional<VersionTag> VersionTag::parse(std::string_view text) {
  if (text.size() < 2 || text[0] != 'v') return std::nullopt;
  int n = 0;
  for (std::size_t i = 1; i < text.size(); ++i) {
    const char c = text[i];
    if (c < '0' || c > '9') return std::nullopt;
    if (n > 100000000) return std::nullopt;
    n = n * 10 + (c - '0');
  }
  VersionTag tag;
  tag.tag_ = std::string(text);
  tag.number_ = n;
  return tag;
}

Json TaskEnvelope::to_json() const {
  return Json{{"task_id", task_id.to_string()},
              {"kind", std::string(to_path_segment(kind))},
              {"version", version.to_string()},
              {"input_payload", input_payload},
              {"created_at", format_rfc3339(created_at)},
              {"attempt", attempt}};
}

std::optional<TaskEnvelope> TaskEnvelope::from_json(const Json& j) {
  if (!j.is_object()) return std::nullopt;
  for (const char* field : {"task_id", "kind", "version", "input_payload", "created_at", "attempt"})
    if (!j.contains(field)) return std::nullopt;
  auto id = TaskId::parse(j["task_id"].get_ref<const std::string&>());
  auto kind = endpoint_kind_from_segment(j["kind"].get_ref<const std::string&>());
  auto version = VersionTag::parse(j["version"].get_ref<const std::string&>());
  auto created = parse_rfc3339(j["created_at"].get_ref<const std::string&>());
  if (!id || !kind || !version || !created || !j["attempt"].is_number_unsigned())
    return std::nullopt;
  TaskEnvelope env;
  env.task_id = *id;
  env.kind = *kind;
  env.version = *version;
  env.input_payload = j["input_payload"];
  env.created_at = *created;
  env.attempt = j["attempt"].get<std::uint32_t>();
  return env;
}

TaskOutcome TaskOutcome::success(TaskId id, Json result, TimePoint finished) {
  TaskOutcome o;
  o.task_id = id;
  o.verdict = Verdict::kSuccess;
  o.result_payload = std::move(result);
  o.finished_at = finished;
  return o;
}

TaskOutcome TaskOutcome::failure(TaskId id, std::string detail, TimePoint finished) {
  TaskOutcome o;
  o.task_id = id;
  o.verdict = Verdict::kFailure;
  o.error_detail = std::move(detail);
  o.finished_at = finished;
  return o;
}

Json TaskOutcome::to_json() const {
  Json j{{"task_id", task_id.to_string()},
         {"verdict", verdict == Verdict::kSuccess ? "success" : "failure"},
         {"finished_at", format_rfc3339(finished_at)}};
  if (verdict == Verdict::kSuccess)
    j["result_payload"] = result_payload;
  else
    j["error_detail"] = error_detail;
  if (first_fetched_at) j["first_fetched_at"] = format_rfc3339(*first_fetched_at);
  return j;
}

std::optional<TaskOutcome> TaskOutcome::from_json(const Json& j) {
  if (!j.is_object() || !j.contains("task_id") || !j.contains("verdict") ||
      !j.contains("finished_at"))
    return std::nullopt;
  auto id = TaskId::parse(j["task_id"].get_ref<const std::string&>());
  auto finished = parse_rfc3339(j["finished_at"].get_ref<const std::string&>());
  if (!id || !finished) return std::nullopt;
  const std::string& verdict = j["verdict"].get_ref<const std::string&>();

  TaskOutcome o;
  if (verdict == "success") {
    if (!j.contains("result_payload")) return std::nullopt;
    o = TaskOutcome::success(*id, j["result_payload"], *finished);
  } else if (verdict == "failure") {
    if (!j.contains("error_detail")) return std::nullopt;
    o = TaskOutcome::failure(*id, j["error_detail"].get<std::string>(), *finished);
  } else {
    return std::nullopt;
  }
  if (j.contains("first_fetched_at")) {
    auto fetched = parse_rfc3339(j["first_fetched_at"].get_ref<const std::string&>());
    if (!fetched) return std::nullopt;
    o.first_fetched_at = *fetched;
  }
  return o;
}

}  // namespace esg
