#include <doctest.h>

#include "esg/service.hpp"

namespace {

using namespace esg;

VersionTag v(const char* tag) { return *VersionTag::parse(tag); }

Handler echo_handler() {
  return [](const Json& input, const ProgressSink&) { return input; };
}

VersionedEndpoints request_only() {
  VersionedEndpoints endpoints;
  endpoints.request_input = schema::object({{"x", schema::number()}}, {"x"});
  endpoints.request_output = schema::object({{"y", schema::number()}}, {"y"});
  endpoints.request_handler = echo_handler();
  return endpoints;
}

VersionedEndpoints with_fit() {
  auto endpoints = request_only();
  endpoints.fit_input = schema::object({{"samples", schema::array(schema::number())}}, {"samples"});
  endpoints.fit_output = schema::object({{"gain", schema::number()}}, {"gain"});
  endpoints.fit_handler = echo_handler();
  return endpoints;
}

TEST_CASE("schemas and handlers resolve by version and kind") {
  ServiceSpec spec("demo", {{v("v1"), request_only()}, {v("v2"), with_fit()}});
  spec.check_valid();

  CHECK(spec.name() == "demo");
  CHECK(spec.versions().size() == 2);
  REQUIRE(spec.find(v("v1")) != nullptr);
  CHECK_FALSE(spec.find(v("v1"))->supports_fit());
  CHECK(spec.find(v("v2"))->supports_fit());
  CHECK(spec.find(v("v3")) == nullptr);

  CHECK(spec.input_schema(v("v1"), EndpointKind::kRequest) != nullptr);
  CHECK(spec.output_schema(v("v1"), EndpointKind::kRequest) != nullptr);
  CHECK(spec.handler(v("v1"), EndpointKind::kRequest) != nullptr);

  // Fit endpoints exist only where declared.
  CHECK(spec.input_schema(v("v1"), EndpointKind::kFitParameters) == nullptr);
  CHECK(spec.handler(v("v1"), EndpointKind::kFitParameters) == nullptr);
  CHECK(spec.input_schema(v("v2"), EndpointKind::kFitParameters) != nullptr);
  CHECK(spec.handler(v("v2"), EndpointKind::kFitParameters) != nullptr);

  // Unknown versions resolve to nothing.
  CHECK(spec.input_schema(v("v9"), EndpointKind::kRequest) == nullptr);
}

TEST_CASE("the resolved schema is the declared one") {
  ServiceSpec spec("demo", {{v("v1"), request_only()}});
  const auto* input = spec.input_schema(v("v1"), EndpointKind::kRequest);
  REQUIRE(input != nullptr);
  CHECK(schema::validate(*input, Json{{"x", 1.0}}).ok());
  CHECK_FALSE(schema::validate(*input, Json{{"x", "one"}}).ok());
}

TEST_CASE("declarations without versions are rejected") {
  ServiceSpec spec("empty", {});
  CHECK_THROWS_AS(spec.check_valid(), SpecInvalid);
}

TEST_CASE("a missing request handler is rejected") {
  auto endpoints = request_only();
  endpoints.request_handler = nullptr;
  ServiceSpec spec("demo", {{v("v1"), endpoints}});
  CHECK_THROWS_AS(spec.check_valid(), SpecInvalid);
}

TEST_CASE("partial fit declarations are rejected") {
  auto endpoints = with_fit();
  SUBCASE("fit input without fit output") {
    endpoints.fit_output.reset();
  }
  SUBCASE("fit schemas without fit handler") {
    endpoints.fit_handler = nullptr;
  }
  SUBCASE("fit handler without fit schemas") {
    endpoints.fit_input.reset();
    endpoints.fit_output.reset();
  }
  ServiceSpec spec("demo", {{v("v1"), endpoints}});
  CHECK_THROWS_AS(spec.check_valid(), SpecInvalid);
}

TEST_CASE("invalid schema nodes fail the whole declaration") {
  auto endpoints = request_only();
  endpoints.request_input = schema::object({{"x", schema::number()}}, {"not-a-field"});
  ServiceSpec spec("demo", {{v("v1"), endpoints}});
  CHECK_THROWS_AS(spec.check_valid(), SpecInvalid);
}

TEST_CASE("handler failures carry their detail text") {
  Handler failing = [](const Json&, const ProgressSink&) -> Json {
    throw HandlerFailure("input out of season");
  };
  try {
    failing(Json::object(), [] {});
    FAIL("handler did not throw");
  } catch (const HandlerFailure& e) {
    CHECK(std::string(e.what()) == "input out of season");
  }
}

}  // namespace
