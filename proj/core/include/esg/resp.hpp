// Copyright 2026 the esg authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "esg/time.hpp"

namespace esg::resp {

// One RESP2 reply. Null bulk strings and null arrays carry is_null.
struct Value {
  enum class Kind { kSimple, kError, kInteger, kBulk, kArray };

  Kind kind = Kind::kSimple;
  bool is_null = false;
  std::string text;          // kSimple, kError, kBulk
  std::int64_t integer = 0;  // kInteger
  std::vector<Value> items;  // kArray

  bool is_ok() const { return kind == Kind::kSimple && text == "OK"; }
};

// Where and how to reach the RESP2 store.
struct Target {
  std::string host = "127.0.0.1";
  std::uint16_t port = 6379;
  std::optional<std::string> password;
  int database = 0;
};

// One TCP connection speaking RESP2. Not thread-safe; pool connections for
// concurrent use. Every transport failure surfaces as BrokerUnavailable;
// server "-ERR" replies surface as BrokerError.
class Connection {
 public:
  // Connects, then authenticates and selects the database as configured.
  explicit Connection(const Target& target, Duration io_timeout = Duration{10'000});
  ~Connection();

  Connection(const Connection&) = delete;
  Connection& operator=(const Connection&) = delete;

  // Sends one command and reads its reply. `extra_wait` widens the read
  // timeout for server-side blocking commands (BRPOP).
  Value command(const std::vector<std::string>& parts, Duration extra_wait = Duration{0});

  bool healthy() const { return fd_ >= 0; }

 private:
  void set_read_timeout(Duration timeout);
  void send_all(const std::string& bytes);
  std::string read_line();
  std::string read_exact(std::size_t n);
  Value read_value();
  void fail(const std::string& what);

  int fd_ = -1;
  Duration io_timeout_;
  std::string buffer_;  // bytes received but not yet consumed
};

// Convenience result coercions; throw BrokerError when the reply shape or an
// error reply does not match.
std::string expect_simple(const Value& v);
std::int64_t expect_integer(const Value& v);
std::optional<std::string> expect_bulk(const Value& v);  // nullopt for null bulk
std::vector<Value> expect_array(const Value& v);

}  // namespace esg::resp
