// Copyright 2026 the esg authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "esg/auth.hpp"
#include "esg/broker.hpp"
#include "esg/service.hpp"

namespace esg {

// Request summary handed to the middleware hook.
struct MiddlewareRequest {
  std::string method;
  std::string path;
  std::string remote_addr;
};

// Pre-auth hook (rate limiting lives here if anywhere). Return a status code
// to reject the request with, or nullopt to let it through. Default: pass.
using Middleware = std::function<std::optional<int>(const MiddlewareRequest&)>;

struct ApiOptions {
  std::string bind_address = "127.0.0.1";
  int port = 8080;  // 0 picks an ephemeral port
  std::size_t max_body_bytes = 10 * 1024 * 1024;
  unsigned broker_attempts = 3;  // tries per broker call before 503
  BackoffPolicy backoff;
  Middleware middleware;
};

// The user-facing HTTP process. Stateless besides the broker handle: any two
// servers over the same broker are interchangeable. Plain HTTP; TLS is the
// fronting gateway's job.
//
// Routes, per service version (trailing slash canonical, slash-less forms
// answered with a permanent redirect):
//   POST /{version}/request/
//   GET  /{version}/request/{task_id}/status/
//   GET  /{version}/request/{task_id}/result/
//   POST /{version}/fit-parameters/              (when the version fits)
//   GET  /{version}/fit-parameters/{task_id}/status/
//   GET  /{version}/fit-parameters/{task_id}/result/
//   GET  /{version}/openapi.json
class ApiServer {
 public:
  ApiServer(ServiceSpec spec, std::shared_ptr<Broker> broker, AuthPolicy auth,
            ApiOptions options = {});
  ~ApiServer();

  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  // Binds and serves on a background thread; returns the bound port.
  // Throws Error when the address cannot be bound.
  int start();

  // Binds and serves on the calling thread until stop() is called.
  void run();

  // Idempotent; safe from signal-driven shutdown paths and other threads.
  void stop();

  int port() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace esg
