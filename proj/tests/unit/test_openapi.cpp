#include <doctest.h>

#include <set>
#include <string>

#include "esg/openapi.hpp"
#include "esg/pv.hpp"

namespace {

using namespace esg;

VersionTag v(const char* tag) { return *VersionTag::parse(tag); }

std::set<std::string> path_keys(const Json& doc) {
  std::set<std::string> keys;
  for (const auto& [key, value] : doc.at("paths").items()) keys.insert(key);
  return keys;
}

std::set<std::string> component_keys(const Json& doc) {
  std::set<std::string> keys;
  for (const auto& [key, value] : doc.at("components").at("schemas").items()) keys.insert(key);
  return keys;
}

TEST_CASE("a fitting service exposes seven paths per version") {
  auto doc = emit_openapi(pv::make_pv_service(), false);
  CHECK(doc.at("openapi") == "3.1.0");
  CHECK(path_keys(doc) == std::set<std::string>{
                              "/v1/request/",
                              "/v1/request/{task_id}/status/",
                              "/v1/request/{task_id}/result/",
                              "/v1/fit-parameters/",
                              "/v1/fit-parameters/{task_id}/status/",
                              "/v1/fit-parameters/{task_id}/result/",
                              "/v1/openapi.json",
                          });
}

TEST_CASE("a single-version document uses unsuffixed component names") {
  auto doc = emit_openapi(pv::make_pv_service(), false);
  CHECK(component_keys(doc) == std::set<std::string>{
                                   "RequestInput", "RequestOutput", "FitInput", "FitOutput",
                                   "TaskCreated", "TaskStatus", "ApiError"});
  // Operations reference the components rather than inlining schemas.
  CHECK(doc.at("paths").at("/v1/request/").at("post").at("requestBody").at("content")
            .at("application/json").at("schema")
            .at("$ref") == "#/components/schemas/RequestInput");
  CHECK(doc.at("paths").at("/v1/fit-parameters/{task_id}/result/").at("get").at("responses")
            .at("200").at("content").at("application/json").at("schema")
            .at("$ref") == "#/components/schemas/FitOutput");
}

ServiceSpec two_version_spec() {
  Handler noop = [](const Json& input, const ProgressSink&) { return input; };
  VersionedEndpoints v1;
  v1.request_input = schema::object({{"a", schema::number()}}, {"a"});
  v1.request_output = schema::object({{"b", schema::number()}}, {"b"});
  v1.request_handler = noop;
  VersionedEndpoints v2 = v1;
  v2.request_input = schema::object({{"c", schema::string()}}, {"c"});
  return ServiceSpec("demo", {{v("v1"), v1}, {v("v2"), v2}});
}

TEST_CASE("a multi-version document suffixes component names by version") {
  auto doc = emit_openapi(two_version_spec(), false);
  CHECK(component_keys(doc) == std::set<std::string>{
                                   "RequestInput_v1", "RequestOutput_v1",
                                   "RequestInput_v2", "RequestOutput_v2",
                                   "TaskCreated", "TaskStatus", "ApiError"});
  CHECK(path_keys(doc).size() == 8);  // four request paths per version
  CHECK(doc.at("info").at("version") == "v1,v2");
}

TEST_CASE("restricting to one version trims paths and components") {
  auto doc = emit_openapi(two_version_spec(), false, v("v2"));
  CHECK(path_keys(doc) == std::set<std::string>{
                              "/v2/request/",
                              "/v2/request/{task_id}/status/",
                              "/v2/request/{task_id}/result/",
                              "/v2/openapi.json",
                          });
  CHECK(component_keys(doc).count("RequestInput") == 1);
  CHECK(doc.at("info").at("version") == "v2");
  CHECK_THROWS_AS(emit_openapi(two_version_spec(), false, v("v9")), SpecInvalid);
}

TEST_CASE("authentication toggles the security machinery") {
  auto open = emit_openapi(pv::make_pv_service(), false);
  CHECK_FALSE(open.contains("security"));
  CHECK_FALSE(open.at("components").contains("securitySchemes"));
  CHECK_FALSE(open.at("paths").at("/v1/request/").at("post").at("responses").contains("401"));

  auto locked = emit_openapi(pv::make_pv_service(), true);
  CHECK(locked.at("security") == Json::array({Json{{"bearerAuth", Json::array()}}}));
  CHECK(locked.at("components").at("securitySchemes").at("bearerAuth") ==
        Json{{"type", "http"}, {"scheme", "bearer"}, {"bearerFormat", "JWT"}});
  CHECK(locked.at("paths").at("/v1/request/").at("post").at("responses").contains("401"));
  CHECK(locked.at("paths").at("/v1/request/").at("post").at("responses").contains("403"));
  // The document endpoint stays reachable without a token.
  CHECK(locked.at("paths").at("/v1/openapi.json").at("get").at("security") == Json::array());
}

TEST_CASE("the document is byte-stable across emissions") {
  auto a = emit_openapi(pv::make_pv_service(), true).dump(2);
  auto b = emit_openapi(pv::make_pv_service(), true).dump(2);
  CHECK(a == b);
}

TEST_CASE("declared schemas appear translated in the components") {
  auto doc = emit_openapi(pv::make_pv_service(), false);
  const auto& fit_input = doc.at("components").at("schemas").at("FitInput");
  CHECK(fit_input.at("type") == "object");
  CHECK(fit_input.at("additionalProperties") == false);
  CHECK(fit_input.at("properties").contains("position"));
  CHECK(fit_input.at("properties").contains("sunrise"));
  CHECK(fit_input.at("properties").contains("sunset"));
  CHECK(fit_input.at("properties").contains("measurements"));
  const auto& output = doc.at("components").at("schemas").at("FitOutput");
  CHECK(output.at("properties").at("parameters").at("properties").at("peak_power_kw")
            .at("minimum") == 0);
}

}  // namespace
