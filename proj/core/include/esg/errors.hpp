// Copyright 2026 the esg authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace esg {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A task status move that is not part of queued -> running -> ready.
class IllegalTransition : public Error {
 public:
  IllegalTransition(const std::string& from, const std::string& to)
      : Error("illegal status transition " + from + " -> " + to) {}
};

// A ServiceSpec or SchemaNode that violates its own construction invariants.
class SpecInvalid : public Error {
 public:
  using Error::Error;
};

class BrokerError : public Error {
 public:
  using Error::Error;
};

// Backend unreachable or protocol failure; callers retry with backoff.
class BrokerUnavailable : public BrokerError {
 public:
  using BrokerError::BrokerError;
};

class DuplicateTask : public BrokerError {
 public:
  explicit DuplicateTask(const std::string& id) : BrokerError("task already exists: " + id) {}
};

class UnknownTask : public BrokerError {
 public:
  explicit UnknownTask(const std::string& id) : BrokerError("unknown task: " + id) {}
};

class OutcomeAlreadySet : public BrokerError {
 public:
  explicit OutcomeAlreadySet(const std::string& id)
      : BrokerError("outcome already stored for task: " + id) {}
};

// All measurements fall outside the daylight window (or are null), so the
// least-squares system has no information about the peak power.
class DegenerateFit : public Error {
 public:
  using Error::Error;
};

}  // namespace esg
