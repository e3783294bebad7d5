// Copyright 2026 the esg authors
// SPDX-License-Identifier: Apache-2.0

#include "esg/openapi.hpp"

#include <string>
#include <vector>

#include "esg/errors.hpp"
#include "esg/schema.hpp"

namespace esg {

namespace {

Json ref(const std::string& component) {
  return Json{{"$ref", "#/components/schemas/" + component}};
}

Json json_response(const std::string& description, Json schema) {
  return Json{
      {"description", description},
      {"content", Json{{"application/json", Json{{"schema", std::move(schema)}}}}},
  };
}

Json task_id_parameter() {
  return Json{
      {"name", "task_id"},
      {"in", "path"},
      {"required", true},
      {"schema", Json{{"type", "string"}, {"format", "uuid"}}},
  };
}

// Error responses common to authenticated endpoints.
void add_auth_responses(Json& responses) {
  responses["401"] = json_response("Bearer token missing, expired or unverifiable.", ref("ApiError"));
  responses["403"] = json_response("Token verified but lacks a required claim.", ref("ApiError"));
}

Json submit_operation(const std::string& tag, const std::string& operation_suffix,
                      const std::string& noun, const std::string& input_component,
                      bool auth_enabled) {
  Json responses = Json::object();
  responses["201"] = json_response("Task accepted for asynchronous processing.", ref("TaskCreated"));
  if (auth_enabled) {
    add_auth_responses(responses);
  }
  responses["404"] = json_response("Unknown version or unsupported endpoint.", ref("ApiError"));
  responses["422"] = json_response("Input failed schema validation.", ref("ApiError"));
  return Json{
      {"operationId", "submit_" + operation_suffix + "_" + tag},
      {"summary", "Submit a " + noun + " task."},
      {"requestBody",
       Json{
           {"required", true},
           {"content",
            Json{{"application/json", Json{{"schema", ref(input_component)}}}}},
       }},
      {"responses", std::move(responses)},
  };
}

Json status_operation(const std::string& tag, const std::string& operation_suffix,
                      const std::string& noun, bool auth_enabled) {
  Json responses = Json::object();
  responses["200"] = json_response("Current task status.", ref("TaskStatus"));
  if (auth_enabled) {
    add_auth_responses(responses);
  }
  responses["404"] = json_response("No such task.", ref("ApiError"));
  return Json{
      {"operationId", "status_" + operation_suffix + "_" + tag},
      {"summary", "Poll the status of a " + noun + " task."},
      {"parameters", Json::array({task_id_parameter()})},
      {"responses", std::move(responses)},
  };
}

Json result_operation(const std::string& tag, const std::string& operation_suffix,
                      const std::string& noun, const std::string& output_component,
                      bool auth_enabled) {
  Json responses = Json::object();
  responses["200"] = json_response("Result of the completed task.", ref(output_component));
  if (auth_enabled) {
    add_auth_responses(responses);
  }
  responses["404"] = json_response("No such task.", ref("ApiError"));
  responses["409"] = json_response("Result not ready yet; poll the status endpoint.", ref("ApiError"));
  responses["500"] = json_response("Task failed; detail carries the failure message.", ref("ApiError"));
  return Json{
      {"operationId", "result_" + operation_suffix + "_" + tag},
      {"summary", "Fetch the result of a " + noun + " task."},
      {"parameters", Json::array({task_id_parameter()})},
      {"responses", std::move(responses)},
  };
}

Json document_operation(const std::string& tag, bool auth_enabled) {
  Json operation{
      {"operationId", "openapi_" + tag},
      {"summary", "This document."},
      {"responses",
       Json{{"200", json_response("OpenAPI document for this version.",
                                  Json{{"type", "object"}})}}},
  };
  if (auth_enabled) {
    // Served without a token by default; override the global requirement.
    operation["security"] = Json::array();
  }
  return operation;
}

Json task_created_schema() {
  return Json{
      {"type", "object"},
      {"properties",
       Json{{"task_ID", Json{{"type", "string"},
                             {"format", "uuid"},
                             {"description", "Identifier for polling status and result."}}}}},
      {"required", Json::array({"task_ID"})},
      {"additionalProperties", false},
  };
}

Json task_status_schema() {
  return Json{
      {"type", "object"},
      {"properties",
       Json{{"status",
             Json{{"type", "string"}, {"enum", Json::array({"queued", "running", "ready"})}}}}},
      {"required", Json::array({"status"})},
      {"additionalProperties", false},
  };
}

Json api_error_schema() {
  Json location_item{
      {"type", "object"},
      {"properties",
       Json{{"loc", Json{{"type", "string"},
                         {"description", "JSON pointer into the submitted document."}}},
            {"msg", Json{{"type", "string"}}}}},
      {"required", Json::array({"loc", "msg"})},
      {"additionalProperties", false},
  };
  Json detail{
      {"oneOf", Json::array({
                    Json{{"type", "string"}},
                    Json{{"type", "array"}, {"items", std::move(location_item)}},
                })},
  };
  return Json{
      {"type", "object"},
      {"properties", Json{{"detail", std::move(detail)}}},
      {"required", Json::array({"detail"})},
      {"additionalProperties", false},
  };
}

}  // namespace

Json emit_openapi(const ServiceSpec& spec, bool auth_enabled,
                  std::optional<VersionTag> only_version) {
  spec.check_valid();
  if (only_version && !spec.find(*only_version)) {
    throw SpecInvalid("unknown version " + only_version->to_string());
  }

  std::vector<std::pair<VersionTag, const VersionedEndpoints*>> selected;
  for (const auto& [tag, endpoints] : spec.versions()) {
    if (!only_version || tag == *only_version) {
      selected.emplace_back(tag, &endpoints);
    }
  }
  const bool single = selected.size() == 1;

  std::string info_version;
  for (const auto& [tag, endpoints] : selected) {
    if (!info_version.empty()) {
      info_version += ",";
    }
    info_version += tag.to_string();
  }

  Json paths = Json::object();
  Json schemas = Json::object();
  for (const auto& [tag, endpoints] : selected) {
    const std::string t = tag.to_string();
    const std::string suffix = single ? "" : "_" + t;
    const std::string request_in = "RequestInput" + suffix;
    const std::string request_out = "RequestOutput" + suffix;
    schemas[request_in] = schema::translate_node(endpoints->request_input);
    schemas[request_out] = schema::translate_node(endpoints->request_output);

    paths["/" + t + "/request/"] =
        Json{{"post", submit_operation(t, "request", "request", request_in, auth_enabled)}};
    paths["/" + t + "/request/{task_id}/status/"] =
        Json{{"get", status_operation(t, "request", "request", auth_enabled)}};
    paths["/" + t + "/request/{task_id}/result/"] =
        Json{{"get", result_operation(t, "request", "request", request_out, auth_enabled)}};

    if (endpoints->supports_fit()) {
      const std::string fit_in = "FitInput" + suffix;
      const std::string fit_out = "FitOutput" + suffix;
      schemas[fit_in] = schema::translate_node(*endpoints->fit_input);
      schemas[fit_out] = schema::translate_node(*endpoints->fit_output);
      paths["/" + t + "/fit-parameters/"] = Json{
          {"post", submit_operation(t, "fit_parameters", "parameter-fitting", fit_in, auth_enabled)}};
      paths["/" + t + "/fit-parameters/{task_id}/status/"] =
          Json{{"get", status_operation(t, "fit_parameters", "parameter-fitting", auth_enabled)}};
      paths["/" + t + "/fit-parameters/{task_id}/result/"] = Json{
          {"get", result_operation(t, "fit_parameters", "parameter-fitting", fit_out, auth_enabled)}};
    }

    paths["/" + t + "/openapi.json"] = Json{{"get", document_operation(t, auth_enabled)}};
  }

  schemas["TaskCreated"] = task_created_schema();
  schemas["TaskStatus"] = task_status_schema();
  schemas["ApiError"] = api_error_schema();

  Json components = Json::object();
  components["schemas"] = std::move(schemas);
  if (auth_enabled) {
    components["securitySchemes"] = Json{
        {"bearerAuth", Json{{"type", "http"}, {"scheme", "bearer"}, {"bearerFormat", "JWT"}}}};
  }

  Json document{
      {"openapi", "3.1.0"},
      {"info",
       Json{{"title", spec.name()},
            {"description", "Asynchronous task API: submit a task, poll its status, fetch the "
                            "result once ready."},
            {"version", info_version}}},
      {"paths", std::move(paths)},
      {"components", std::move(components)},
  };
  if (auth_enabled) {
    document["security"] = Json::array({Json{{"bearerAuth", Json::array()}}});
  }
  return document;
}

}  // namespace esg
