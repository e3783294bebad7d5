// Copyright 2026 the esg authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <condition_variable>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include "esg/json.hpp"
#include "esg/jwt.hpp"
#include "esg/time.hpp"

namespace esg {

// Verification keys handed over directly, e.g. from configuration.
struct StaticKeys {
  std::vector<jwt::Key> keys;
};

// Keys fetched from a JWKS endpoint and refreshed on a cadence.
struct JwksSource {
  std::string url;
  Duration refresh_interval{300'000};
};

// How the API decides who may call. Verification is local: no identity
// provider round trip happens per request.
struct AuthPolicy {
  bool enabled = false;
  std::vector<std::string> accepted_issuers;
  std::optional<std::string> required_audience;
  // Claim that must be present and equal, e.g. {"role", "forecast-user"}.
  std::optional<std::pair<std::string, Json>> required_claim;
  std::variant<StaticKeys, JwksSource> key_source;
  std::vector<jwt::Algorithm> accepted_algorithms{jwt::Algorithm::kRS256, jwt::Algorithm::kES256,
                                                  jwt::Algorithm::kHS256};
  Duration clock_skew_tolerance{30'000};
  bool openapi_exempt = true;  // serve the document without a token

  // Throws SpecInvalid when enabled without keys or algorithms.
  void check_valid() const;
};

enum class AuthOutcome {
  kAllowed,
  kUnauthorized,  // HTTP 401: missing, malformed, expired or unverifiable token
  kForbidden,     // HTTP 403: verified token lacking a required claim
};

struct AuthResult {
  AuthOutcome outcome = AuthOutcome::kAllowed;
  Json claims = Json::object();  // token payload; empty when auth is disabled
  std::string reason;            // set on denial
};

// Verifies bearer tokens against the policy. Thread-safe; the JWKS refresh
// loop (when configured) swaps the key set atomically under readers.
class Authenticator {
 public:
  explicit Authenticator(AuthPolicy policy);
  ~Authenticator();

  Authenticator(const Authenticator&) = delete;
  Authenticator& operator=(const Authenticator&) = delete;

  const AuthPolicy& policy() const { return policy_; }

  // `authorization` is the raw Authorization header value, absent when the
  // request carried none.
  AuthResult authenticate(const std::optional<std::string>& authorization) const;

  // Re-fetches the JWKS now; true when a usable key set was installed.
  // No-op (true) for static key sources.
  bool refresh_keys();

  // Starts/stops the background refresh cadence for JWKS sources.
  void start();
  void stop();

 private:
  std::shared_ptr<const std::vector<jwt::Key>> snapshot() const;
  void install(std::vector<jwt::Key> keys);
  void refresh_loop();

  AuthPolicy policy_;
  mutable std::mutex keys_mutex_;
  std::shared_ptr<const std::vector<jwt::Key>> keys_;

  std::mutex wake_mutex_;
  std::condition_variable wake_;
  bool stopping_ = false;
  std::thread refresh_thread_;
};

}  // namespace esg
