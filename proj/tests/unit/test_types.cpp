#include <doctest.h>

#include <set>

#include "esg/errors.hpp"
#include "esg/types.hpp"

namespace {

using namespace esg;

TEST_CASE("task ids are canonical lowercase uuids and round-trip") {
  auto id = TaskId::generate();
  auto text = id.to_string();
  REQUIRE(text.size() == 36);
  CHECK(text[8] == '-');
  CHECK(text[13] == '-');
  CHECK(text[14] == '4');  // version nibble
  CHECK(text[18] == '-');
  CHECK((text[19] == '8' || text[19] == '9' || text[19] == 'a' || text[19] == 'b'));
  CHECK(text[23] == '-');
  for (char c : text) {
    CHECK((c == '-' || (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f')));
  }
  auto parsed = TaskId::parse(text);
  REQUIRE(parsed.has_value());
  CHECK(*parsed == id);
  CHECK(parsed->to_string() == text);
}

TEST_CASE("task id parsing is strict about shape, lax about case") {
  auto upper = TaskId::parse("123E4567-E89B-42D3-A456-426614174000");
  REQUIRE(upper.has_value());
  CHECK(upper->to_string() == "123e4567-e89b-42d3-a456-426614174000");

  CHECK_FALSE(TaskId::parse("").has_value());
  CHECK_FALSE(TaskId::parse("123e4567e89b42d3a456426614174000").has_value());
  CHECK_FALSE(TaskId::parse("123e4567-e89b-42d3-a456-42661417400").has_value());
  CHECK_FALSE(TaskId::parse("123e4567-e89b-42d3-a456-4266141740000").has_value());
  CHECK_FALSE(TaskId::parse("123e4567-e89b-42d3-a456-42661417400g").has_value());
  CHECK_FALSE(TaskId::parse("123e4567+e89b-42d3-a456-426614174000").has_value());
}

TEST_CASE("generated ids do not collide in a small sample") {
  std::set<std::string> seen;
  for (int i = 0; i < 1000; ++i) seen.insert(TaskId::generate().to_string());
  CHECK(seen.size() == 1000);
}

TEST_CASE("task states map to and from wire strings") {
  CHECK(to_string(TaskState::kQueued) == "queued");
  CHECK(to_string(TaskState::kRunning) == "running");
  CHECK(to_string(TaskState::kReady) == "ready");
  CHECK(task_state_from_string("queued") == TaskState::kQueued);
  CHECK(task_state_from_string("running") == TaskState::kRunning);
  CHECK(task_state_from_string("ready") == TaskState::kReady);
  CHECK_FALSE(task_state_from_string("failed").has_value());
  CHECK_FALSE(task_state_from_string("Queued").has_value());
  CHECK_FALSE(task_state_from_string("").has_value());
}

TEST_CASE("the lifecycle only walks forward") {
  using S = TaskState;
  // Self transitions are idempotent no-ops.
  CHECK(transition_allowed(S::kQueued, S::kQueued));
  CHECK(transition_allowed(S::kRunning, S::kRunning));
  CHECK(transition_allowed(S::kReady, S::kReady));
  // Forward steps, including the composite queued -> ready.
  CHECK(transition_allowed(S::kQueued, S::kRunning));
  CHECK(transition_allowed(S::kRunning, S::kReady));
  CHECK(transition_allowed(S::kQueued, S::kReady));
  // Backward steps are illegal.
  CHECK_FALSE(transition_allowed(S::kRunning, S::kQueued));
  CHECK_FALSE(transition_allowed(S::kReady, S::kRunning));
  CHECK_FALSE(transition_allowed(S::kReady, S::kQueued));

  CHECK(apply_transition(S::kQueued, S::kRunning) == S::kRunning);
  CHECK_THROWS_AS(apply_transition(S::kReady, S::kQueued), IllegalTransition);
}

TEST_CASE("status wire form is a single status field") {
  CHECK(status_to_json(TaskState::kRunning) == Json{{"status", "running"}});
  CHECK(status_from_json(Json{{"status", "ready"}}) == TaskState::kReady);
  CHECK_FALSE(status_from_json(Json{{"status", "done"}}).has_value());
  CHECK_FALSE(status_from_json(Json{{"state", "ready"}}).has_value());
  CHECK_FALSE(status_from_json(Json::parse("[]")).has_value());
}

TEST_CASE("endpoint kinds map to url path segments") {
  CHECK(to_path_segment(EndpointKind::kRequest) == "request");
  CHECK(to_path_segment(EndpointKind::kFitParameters) == "fit-parameters");
  CHECK(endpoint_kind_from_segment("request") == EndpointKind::kRequest);
  CHECK(endpoint_kind_from_segment("fit-parameters") == EndpointKind::kFitParameters);
  CHECK_FALSE(endpoint_kind_from_segment("fit_parameters").has_value());
  CHECK_FALSE(endpoint_kind_from_segment("").has_value());
}

TEST_CASE("version tags parse v<digits> and order numerically") {
  auto v1 = VersionTag::parse("v1");
  auto v2 = VersionTag::parse("v2");
  auto v10 = VersionTag::parse("v10");
  REQUIRE(v1.has_value());
  REQUIRE(v2.has_value());
  REQUIRE(v10.has_value());
  CHECK(v1->to_string() == "v1");
  CHECK(v1->number() == 1);
  CHECK(*v1 < *v2);
  CHECK(*v2 < *v10);  // numeric, not lexicographic
  CHECK_FALSE(VersionTag::parse("v").has_value());
  CHECK_FALSE(VersionTag::parse("1").has_value());
  CHECK_FALSE(VersionTag::parse("V1").has_value());
  CHECK_FALSE(VersionTag::parse("v1.2").has_value());
  CHECK_FALSE(VersionTag::parse("v01x").has_value());
}

TEST_CASE("task envelopes round-trip through json") {
  TaskEnvelope envelope;
  envelope.task_id = TaskId::generate();
  envelope.kind = EndpointKind::kFitParameters;
  envelope.version = *VersionTag::parse("v3");
  envelope.input_payload = Json{{"x", 1}, {"y", Json::array({1, 2, 3})}};
  envelope.created_at = TimePoint{} + Duration{1'700'000'000'123};
  envelope.attempt = 2;

  auto back = TaskEnvelope::from_json(envelope.to_json());
  REQUIRE(back.has_value());
  CHECK(back->task_id == envelope.task_id);
  CHECK(back->kind == envelope.kind);
  CHECK(back->version == envelope.version);
  CHECK(back->input_payload == envelope.input_payload);
  CHECK(back->created_at == envelope.created_at);
  CHECK(back->attempt == envelope.attempt);

  CHECK_FALSE(TaskEnvelope::from_json(Json::object()).has_value());
  auto j = envelope.to_json();
  j["task_id"] = "not-a-uuid";
  CHECK_FALSE(TaskEnvelope::from_json(j).has_value());
}

TEST_CASE("task outcomes carry either a result or an error detail") {
  auto id = TaskId::generate();
  auto when = TimePoint{} + Duration{1'700'000'000'000};

  auto ok = TaskOutcome::success(id, Json{{"answer", 42}}, when);
  CHECK(ok.verdict == Verdict::kSuccess);
  CHECK(ok.result_payload == Json{{"answer", 42}});
  CHECK(ok.error_detail.empty());
  CHECK_FALSE(ok.first_fetched_at.has_value());

  auto bad = TaskOutcome::failure(id, "handler exploded", when);
  CHECK(bad.verdict == Verdict::kFailure);
  CHECK(bad.error_detail == "handler exploded");

  auto round = TaskOutcome::from_json(ok.to_json());
  REQUIRE(round.has_value());
  CHECK(round->verdict == Verdict::kSuccess);
  CHECK(round->result_payload == ok.result_payload);
  CHECK(round->finished_at == when);

  ok.first_fetched_at = when + Duration{500};
  auto stamped = TaskOutcome::from_json(ok.to_json());
  REQUIRE(stamped.has_value());
  REQUIRE(stamped->first_fetched_at.has_value());
  CHECK(*stamped->first_fetched_at == when + Duration{500});

  auto bad_round = TaskOutcome::from_json(bad.to_json());
  REQUIRE(bad_round.has_value());
  CHECK(bad_round->verdict == Verdict::kFailure);
  CHECK(bad_round->error_detail == "handler exploded");
}

}  // namespace
