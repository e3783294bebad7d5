// Copyright 2026 the esg authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>

#include "esg/errors.hpp"
#include "esg/json.hpp"
#include "esg/schema.hpp"
#include "esg/types.hpp"

namespace esg {

// Called by long-running handlers to signal liveness; the worker maps it to a
// claim-lease renewal. Calling it is optional (the worker heartbeats anyway).
using ProgressSink = std::function<void()>;

// Service-provider computation. Runs in the worker process. Returns the
// result payload or throws HandlerFailure (or anything else) to fail the task.
using Handler = std::function<Json(const Json& input, const ProgressSink& progress)>;

// Domain failure signalled by a handler; the message becomes the task's
// error_detail.
class HandlerFailure : public Error {
 public:
  using Error::Error;
};

// Endpoint set one version exposes. Fitting is optional but all-or-none:
// either all three fit members are set or none are.
struct VersionedEndpoints {
  schema::Node request_input;
  schema::Node request_output;
  Handler request_handler;
  std::optional<schema::Node> fit_input;
  std::optional<schema::Node> fit_output;
  Handler fit_handler;

  bool supports_fit() const { return fit_input.has_value(); }
};

// Complete declaration of one service: its name and every version it serves.
// Immutable after construction; shared freely between threads.
class ServiceSpec {
 public:
  ServiceSpec(std::string name, std::map<VersionTag, VersionedEndpoints> versions)
      : name_(std::move(name)), versions_(std::move(versions)) {}

  const std::string& name() const { return name_; }
  const std::map<VersionTag, VersionedEndpoints>& versions() const { return versions_; }

  const VersionedEndpoints* find(const VersionTag& version) const {
    auto it = versions_.find(version);
    return it == versions_.end() ? nullptr : &it->second;
  }

  // nullptr when the version is unknown or the version does not support the
  // kind (fit-parameters on a fit-less version).
  const schema::Node* input_schema(const VersionTag& version, EndpointKind kind) const;
  const schema::Node* output_schema(const VersionTag& version, EndpointKind kind) const;
  const Handler* handler(const VersionTag& version, EndpointKind kind) const;

  // Throws SpecInvalid when invariants are violated: no versions, handlers
  // missing, partial fit support, or invalid schema nodes.
  void check_valid() const;

 private:
  std::string name_;
  std::map<VersionTag, VersionedEndpoints> versions_;
};

}  // namespace esg
