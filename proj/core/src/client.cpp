// Copyright 2026 the esg authors
// SPDX-License-Identifier: Apache-2.0

#include "esg/client.hpp"

#include <httplib.h>

#include <chrono>
#include <thread>
#include <utility>

#include "esg/broker.hpp"

namespace esg {

namespace {

struct HttpReply {
  bool reached = false;        // false: connection-level failure
  int status = 0;
  Json body;                   // discarded marker when unparseable or empty
  std::string transport_error;
};

httplib::Headers request_headers(const std::optional<std::string>& token) {
  httplib::Headers headers;
  if (token) headers.emplace("Authorization", "Bearer " + *token);
  return headers;
}

HttpReply to_reply(const httplib::Result& res) {
  HttpReply reply;
  if (!res) {
    reply.transport_error = httplib::to_string(res.error());
    return reply;
  }
  reply.reached = true;
  reply.status = res->status;
  reply.body = Json::parse(res->body, nullptr, false);
  return reply;
}

// Every call owns its connection; there is no pooling to invalidate when the
// service restarts between polls.
HttpReply http_get(const std::string& base_url, const std::string& path,
                   const std::optional<std::string>& token) {
  httplib::Client http(base_url);
  http.set_connection_timeout(std::chrono::seconds(5));
  http.set_read_timeout(std::chrono::seconds(30));
  http.set_follow_location(true);
  return to_reply(http.Get(path, request_headers(token)));
}

HttpReply http_post(const std::string& base_url, const std::string& path,
                    const std::optional<std::string>& token, const Json& payload) {
  httplib::Client http(base_url);
  http.set_connection_timeout(std::chrono::seconds(5));
  http.set_read_timeout(std::chrono::seconds(30));
  http.set_follow_location(true);
  return to_reply(http.Post(path, request_headers(token), payload.dump(), "application/json"));
}

std::string detail_text(const Json& body) {
  if (body.is_object() && body.contains("detail") && body["detail"].is_string()) {
    return body["detail"].get<std::string>();
  }
  return "";
}

[[noreturn]] void throw_auth(const HttpReply& reply) {
  auto text = detail_text(reply.body);
  throw AuthRejected(text.empty() ? "request rejected by authentication" : text, reply.status);
}

template <typename Fn>
auto labeled(const char* phase, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ValidationRejected& ex) {
    throw ValidationRejected(std::string(phase) + ": " + ex.what(), ex.detail());
  } catch (const AuthRejected& ex) {
    throw AuthRejected(std::string(phase) + ": " + ex.what(), ex.status());
  } catch (const TaskFailed& ex) {
    throw TaskFailed(std::string(phase) + ": " + ex.what(), ex.detail());
  } catch (const TimedOut& ex) {
    throw TimedOut(std::string(phase) + ": " + ex.what());
  } catch (const ServiceUnavailable& ex) {
    throw ServiceUnavailable(std::string(phase) + ": " + ex.what());
  } catch (const ProtocolError& ex) {
    throw ProtocolError(std::string(phase) + ": " + ex.what());
  }
}

}  // namespace

std::string TaskHandle::submit_path() const {
  return "/" + version.to_string() + "/" + std::string(to_path_segment(kind)) + "/";
}

std::string TaskHandle::status_path() const {
  return submit_path() + task_id.to_string() + "/status/";
}

std::string TaskHandle::result_path() const {
  return submit_path() + task_id.to_string() + "/result/";
}

Client::Client(std::string base_url, std::optional<std::string> bearer_token)
    : base_url_(std::move(base_url)), bearer_token_(std::move(bearer_token)) {
  while (base_url_.size() > 1 && base_url_.back() == '/') base_url_.pop_back();
}

TaskHandle Client::submit(const VersionTag& version, EndpointKind kind, const Json& input) {
  TaskHandle handle{base_url_, version, kind, TaskId{}};
  auto reply = http_post(base_url_, handle.submit_path(), bearer_token_, input);
  if (!reply.reached) {
    throw ServiceUnavailable("cannot reach " + base_url_ + ": " + reply.transport_error);
  }
  switch (reply.status) {
    case 201: {
      if (reply.body.is_object() && reply.body.contains("task_ID") &&
          reply.body["task_ID"].is_string()) {
        auto id = TaskId::parse(reply.body["task_ID"].get<std::string>());
        if (id) {
          handle.task_id = *id;
          return handle;
        }
      }
      throw ProtocolError("submission accepted but the response carries no task id");
    }
    case 422: {
      Json detail = reply.body.is_object() && reply.body.contains("detail")
                        ? reply.body["detail"]
                        : Json::array();
      std::string summary = "input rejected";
      if (detail.is_array() && !detail.empty() && detail.front().is_object()) {
        summary += ": " + detail.front().value("loc", std::string()) + ": " +
                   detail.front().value("msg", std::string());
      }
      throw ValidationRejected(summary, detail);
    }
    case 401:
    case 403:
      throw_auth(reply);
    case 404:
      throw ProtocolError("endpoint not offered: " + handle.submit_path());
    case 503:
      throw ServiceUnavailable("service temporarily unavailable");
    default:
      throw ProtocolError("unexpected status " + std::to_string(reply.status) +
                          " from " + handle.submit_path());
  }
}

TaskState Client::status(const TaskHandle& handle) {
  auto reply = http_get(base_url_, handle.status_path(), bearer_token_);
  if (!reply.reached) {
    throw ServiceUnavailable("cannot reach " + base_url_ + ": " + reply.transport_error);
  }
  if (reply.status == 401 || reply.status == 403) throw_auth(reply);
  if (reply.status == 404) throw ProtocolError("unknown task " + handle.task_id.to_string());
  if (reply.status != 200) {
    throw ProtocolError("unexpected status " + std::to_string(reply.status) + " from " +
                        handle.status_path());
  }
  auto state = status_from_json(reply.body);
  if (!state) throw ProtocolError("unrecognized status payload");
  return *state;
}

Json Client::wait(const TaskHandle& handle, const PollPolicy& policy) {
  auto started = std::chrono::steady_clock::now();
  auto out_of_budget = [&] {
    return policy.max_wait &&
           std::chrono::steady_clock::now() - started >= *policy.max_wait;
  };
  BackoffPolicy pace{policy.initial, policy.factor, policy.cap, policy.jitter};

  // Phase 1: poll status until ready. Transient failures (connection loss,
  // 503) consume the same budget as ordinary polling.
  int turn = 0;
  for (;;) {
    auto reply = http_get(base_url_, handle.status_path(), bearer_token_);
    if (reply.reached) {
      if (reply.status == 200) {
        auto state = status_from_json(reply.body);
        if (!state) throw ProtocolError("unrecognized status payload");
        if (*state == TaskState::kReady) break;
      } else if (reply.status == 401 || reply.status == 403) {
        throw_auth(reply);
      } else if (reply.status == 404) {
        throw ProtocolError("task disappeared while waiting: " + handle.task_id.to_string());
      } else if (reply.status != 503) {
        throw ProtocolError("unexpected status " + std::to_string(reply.status) + " from " +
                            handle.status_path());
      }
    }
    if (out_of_budget()) {
      throw TimedOut("task " + handle.task_id.to_string() + " not ready within the wait budget");
    }
    auto delay = pace.delay(turn++);
    if (policy.max_wait) {
      auto remaining = std::chrono::duration_cast<Duration>(
          *policy.max_wait - (std::chrono::steady_clock::now() - started));
      if (remaining <= Duration{0}) {
        throw TimedOut("task " + handle.task_id.to_string() +
                       " not ready within the wait budget");
      }
      delay = std::min(delay, remaining);
    }
    std::this_thread::sleep_for(delay);
  }

  // Phase 2: fetch the result exactly once; ready is terminal so anything
  // but 200/500 is either transient or a protocol violation.
  for (int attempt = 0;; ++attempt) {
    auto reply = http_get(base_url_, handle.result_path(), bearer_token_);
    if (!reply.reached || reply.status == 503) {
      if (out_of_budget()) {
        throw TimedOut("result of " + handle.task_id.to_string() +
                       " unreachable within the wait budget");
      }
      if (!reply.reached && !policy.max_wait && attempt >= 10) {
        throw ServiceUnavailable("cannot reach " + base_url_ + ": " + reply.transport_error);
      }
      std::this_thread::sleep_for(pace.delay(attempt));
      continue;
    }
    switch (reply.status) {
      case 200:
        return reply.body.is_discarded() ? Json() : reply.body;
      case 500: {
        Json detail = reply.body.is_object() && reply.body.contains("detail")
                          ? reply.body["detail"]
                          : Json();
        std::string text = detail.is_string() ? detail.get<std::string>() : detail.dump();
        throw TaskFailed("task failed: " + text, detail);
      }
      case 401:
      case 403:
        throw_auth(reply);
      case 404:
        throw ProtocolError("task deleted before its result was fetched: " +
                            handle.task_id.to_string());
      default:
        throw ProtocolError("unexpected status " + std::to_string(reply.status) + " from " +
                            handle.result_path());
    }
  }
}

Json Client::fit_then_request(const VersionTag& version, const Json& fit_input,
                              Json request_template, const std::string& parameter_slot,
                              const std::string& parameter_source, const PollPolicy& policy) {
  Json fit_result = labeled("fit phase", [&] {
    auto handle = submit(version, EndpointKind::kFitParameters, fit_input);
    return wait(handle, policy);
  });

  Json::json_pointer source;
  Json::json_pointer slot;
  try {
    source = Json::json_pointer(parameter_source);
    slot = Json::json_pointer(parameter_slot);
  } catch (const Json::exception& ex) {
    throw ProtocolError(std::string("invalid parameter pointer: ") + ex.what());
  }
  if (!fit_result.contains(source)) {
    throw ProtocolError("fit result carries nothing at " + parameter_source);
  }
  request_template[slot] = fit_result.at(source);

  return labeled("request phase", [&] {
    auto handle = submit(version, EndpointKind::kRequest, request_template);
    return wait(handle, policy);
  });
}

}  // namespace esg
