// Copyright 2026 the esg authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>

#include "esg/errors.hpp"
#include "esg/types.hpp"

namespace esg {

// Client-side failures, split so callers can branch without string matching.
class ClientError : public Error {
  using Error::Error;
};
// 422 from the service; detail() lists the field errors.
class ValidationRejected : public ClientError {
 public:
  ValidationRejected(std::string message, Json detail)
      : ClientError(std::move(message)), detail_(std::move(detail)) {}
  const Json& detail() const { return detail_; }

 private:
  Json detail_;
};
// 401 or 403 from the service.
class AuthRejected : public ClientError {
 public:
  AuthRejected(std::string message, int status)
      : ClientError(std::move(message)), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};
// Connection failure or 503.
class ServiceUnavailable : public ClientError {
  using ClientError::ClientError;
};
// The task finished with a Failure verdict; detail() carries the reason.
class TaskFailed : public ClientError {
 public:
  TaskFailed(std::string message, Json detail)
      : ClientError(std::move(message)), detail_(std::move(detail)) {}
  const Json& detail() const { return detail_; }

 private:
  Json detail_;
};
// The poll budget ran out before the task became ready.
class TimedOut : public ClientError {
  using ClientError::ClientError;
};
// A response outside the protocol (unexpected status or body shape).
class ProtocolError : public ClientError {
  using ClientError::ClientError;
};

// Reference to a submitted task; everything needed to poll and fetch it.
struct TaskHandle {
  std::string base_url;
  VersionTag version;
  EndpointKind kind;
  TaskId task_id;

  std::string submit_path() const;
  std::string status_path() const;
  std::string result_path() const;
};

// Status poll pacing: exponential backoff with jitter, bounded overall by
// max_wait when set.
struct PollPolicy {
  Duration initial{1'000};
  double factor = 1.5;
  Duration cap{30'000};
  double jitter = 0.2;
  std::optional<Duration> max_wait;
};

class Client {
 public:
  explicit Client(std::string base_url, std::optional<std::string> bearer_token = {});

  const std::string& base_url() const { return base_url_; }

  // POST the input; returns the handle on 201. Throws ValidationRejected,
  // AuthRejected, ServiceUnavailable, or ProtocolError.
  TaskHandle submit(const VersionTag& version, EndpointKind kind, const Json& input);

  // Polls status until ready, then fetches the result exactly once. The
  // result endpoint is never touched before a ready status is observed.
  // Throws TaskFailed, TimedOut, or the submit-side errors.
  Json wait(const TaskHandle& handle, const PollPolicy& policy = {});

  // Convenience: GET the current status.
  TaskState status(const TaskHandle& handle);

  // Chains a fit task into a request task: runs the fit, copies the value at
  // `parameter_source` in the fit result (a JSON pointer) into the request
  // template at `parameter_slot`, submits the request, returns its result.
  Json fit_then_request(const VersionTag& version, const Json& fit_input,
                        Json request_template, const std::string& parameter_slot,
                        const std::string& parameter_source = "/parameters",
                        const PollPolicy& policy = {});

 private:
  std::string base_url_;
  std::optional<std::string> bearer_token_;
};

}  // namespace esg
