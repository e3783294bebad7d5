// Copyright 2026 the esg authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "esg/json.hpp"
#include "esg/time.hpp"

namespace esg {

// 128-bit task identifier, rendered as canonical lowercase UUID text.
class TaskId {
 public:
  TaskId() = default;

  // Fresh random (version 4) identifier.
  static TaskId generate();

  // Accepts exactly the canonical 36-char form; lowercases on input so the
  // text -> id -> text round trip is byte-identical for canonical input.
  static std::optional<TaskId> parse(std::string_view text);

  std::string to_string() const;

  auto operator<=>(const TaskId&) const = default;

 private:
  std::array<std::uint8_t, 16> bytes_{};
};

// Three-valued task lifecycle. Failure is not a state: success/failure is
// carried by the outcome and surfaced through the result endpoint.
enum class TaskState { kQueued, kRunning, kReady };

std::string_view to_string(TaskState state);
std::optional<TaskState> task_state_from_string(std::string_view text);

// Forward walk only; X -> X is allowed, and kQueued -> kReady is a legal
// composite step (a fast worker may finish before any poll observes running).
bool transition_allowed(TaskState from, TaskState to);

// Returns `next` or throws IllegalTransition.
TaskState apply_transition(TaskState current, TaskState next);

// Wire form {"status": "queued"|"running"|"ready"}.
Json status_to_json(TaskState state);
std::optional<TaskState> status_from_json(const Json& j);

enum class EndpointKind { kRequest, kFitParameters };

// URL path segment: "request" / "fit-parameters".
std::string_view to_path_segment(EndpointKind kind);
std::optional<EndpointKind> endpoint_kind_from_segment(std::string_view segment);

// Version token of the form v<digits>, e.g. "v1". Ordered by numeric suffix.
class VersionTag {
 public:
  static std::optional<VersionTag> parse(std::string_view text);

  const std::string& to_string() const { return tag_; }
  int number() const { return number_; }

  bool operator==(const VersionTag& o) const { return number_ == o.number_; }
  auto operator<=>(const VersionTag& o) const { return number_ <=> o.number_; }

 private:
  std::string tag_;
  int number_ = 0;
};

// The unit handed from API to worker: everything needed to compute a result.
struct TaskEnvelope {
  TaskId task_id;
  EndpointKind kind = EndpointKind::kRequest;
  VersionTag version;
  Json input_payload;  // already schema-validated by the API
  TimePoint created_at{};
  std::uint32_t attempt = 0;  // 0 on first delivery, +1 per re-delivery

  Json to_json() const;
  static std::optional<TaskEnvelope> from_json(const Json& j);
};

enum class Verdict { kSuccess, kFailure };

// Exactly one of result_payload / error_detail is meaningful; use the
// factories so the invariant holds by construction.
struct TaskOutcome {
  TaskId task_id;
  Verdict verdict = Verdict::kSuccess;
  Json result_payload;       // present iff kSuccess
  std::string error_detail;  // present iff kFailure
  TimePoint finished_at{};
  std::optional<TimePoint> first_fetched_at;

  static TaskOutcome success(TaskId id, Json result, TimePoint finished);
  static TaskOutcome failure(TaskId id, std::string detail, TimePoint finished);

  Json to_json() const;
  static std::optional<TaskOutcome> from_json(const Json& j);
};

}  // namespace esg
