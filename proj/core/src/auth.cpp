// Copyright 2026 the esg authors
// SPDX-License-Identifier: Apache-2.0

#include "esg/auth.hpp"

#include <httplib.h>

#include <algorithm>
#include <cctype>

#include "esg/errors.hpp"

namespace esg {

namespace {

// "http://host:port/path" -> {"http://host:port", "/path"}
std::pair<std::string, std::string> split_base_and_path(const std::string& url) {
  const auto scheme_end = url.find("://");
  const auto authority_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  const auto path_start = url.find('/', authority_start);
  if (path_start == std::string::npos) {
    return {url, "/"};
  }
  return {url.substr(0, path_start), url.substr(path_start)};
}

bool scheme_is_bearer(std::string_view scheme) {
  static constexpr std::string_view kBearer = "bearer";
  if (scheme.size() != kBearer.size()) {
    return false;
  }
  for (std::size_t i = 0; i < scheme.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(scheme[i])) != kBearer[i]) {
      return false;
    }
  }
  return true;
}

AuthResult denied(AuthOutcome outcome, std::string reason) {
  AuthResult result;
  result.outcome = outcome;
  result.reason = std::move(reason);
  return result;
}

double now_epoch_seconds() {
  return static_cast<double>(now_utc().time_since_epoch().count()) / 1000.0;
}

}  // namespace

void AuthPolicy::check_valid() const {
  if (!enabled) {
    return;
  }
  if (accepted_algorithms.empty()) {
    throw SpecInvalid("auth enabled with no accepted algorithms");
  }
  if (const auto* fixed = std::get_if<StaticKeys>(&key_source)) {
    if (fixed->keys.empty()) {
      throw SpecInvalid("auth enabled with an empty static key set");
    }
  } else if (const auto* jwks = std::get_if<JwksSource>(&key_source)) {
    if (jwks->url.empty()) {
      throw SpecInvalid("auth enabled with an empty key endpoint URL");
    }
  }
}

Authenticator::Authenticator(AuthPolicy policy) : policy_(std::move(policy)) {
  policy_.check_valid();
  if (const auto* fixed = std::get_if<StaticKeys>(&policy_.key_source)) {
    install(fixed->keys);
  } else {
    install({});
  }
}

Authenticator::~Authenticator() { stop(); }

std::shared_ptr<const std::vector<jwt::Key>> Authenticator::snapshot() const {
  std::lock_guard<std::mutex> lock(keys_mutex_);
  return keys_;
}

void Authenticator::install(std::vector<jwt::Key> keys) {
  auto next = std::make_shared<const std::vector<jwt::Key>>(std::move(keys));
  std::lock_guard<std::mutex> lock(keys_mutex_);
  keys_ = std::move(next);
}

bool Authenticator::refresh_keys() {
  const auto* jwks = std::get_if<JwksSource>(&policy_.key_source);
  if (!jwks) {
    return true;
  }
  auto [base, path] = split_base_and_path(jwks->url);
  httplib::Client client(base);
  client.set_connection_timeout(5, 0);
  client.set_read_timeout(5, 0);
  auto response = client.Get(path);
  if (!response || response->status != 200) {
    return false;
  }
  Json document = Json::parse(response->body, nullptr, false);
  if (document.is_discarded()) {
    return false;
  }
  auto keys = jwt::keys_from_jwks(document);
  if (keys.empty()) {
    return false;
  }
  install(std::move(keys));
  return true;
}

void Authenticator::start() {
  if (!policy_.enabled || !std::holds_alternative<JwksSource>(policy_.key_source) ||
      refresh_thread_.joinable()) {
    return;
  }
  refresh_keys();
  {
    std::lock_guard<std::mutex> lock(wake_mutex_);
    stopping_ = false;
  }
  refresh_thread_ = std::thread([this] { refresh_loop(); });
}

void Authenticator::stop() {
  {
    std::lock_guard<std::mutex> lock(wake_mutex_);
    stopping_ = true;
  }
  wake_.notify_all();
  if (refresh_thread_.joinable()) {
    refresh_thread_.join();
  }
}

void Authenticator::refresh_loop() {
  const auto& jwks = std::get<JwksSource>(policy_.key_source);
  std::unique_lock<std::mutex> lock(wake_mutex_);
  for (;;) {
    if (wake_.wait_for(lock, jwks.refresh_interval, [this] { return stopping_; })) {
      return;
    }
    lock.unlock();
    refresh_keys();
    lock.lock();
  }
}

AuthResult Authenticator::authenticate(const std::optional<std::string>& authorization) const {
  if (!policy_.enabled) {
    return AuthResult{};
  }
  if (!authorization) {
    return denied(AuthOutcome::kUnauthorized, "missing bearer token");
  }
  std::string_view header = *authorization;
  const auto space = header.find(' ');
  if (space == std::string_view::npos || !scheme_is_bearer(header.substr(0, space))) {
    return denied(AuthOutcome::kUnauthorized, "authorization scheme is not bearer");
  }
  std::string_view token = header.substr(space + 1);
  while (!token.empty() && token.front() == ' ') {
    token.remove_prefix(1);
  }

  auto decoded = jwt::split_token(token);
  if (!decoded) {
    return denied(AuthOutcome::kUnauthorized, "malformed token");
  }
  const auto alg = jwt::algorithm_from_string(decoded->header.value("alg", ""));
  if (!alg || std::find(policy_.accepted_algorithms.begin(), policy_.accepted_algorithms.end(),
                        *alg) == policy_.accepted_algorithms.end()) {
    return denied(AuthOutcome::kUnauthorized, "algorithm not accepted");
  }

  const std::string kid = decoded->header.value("kid", "");
  auto keys = snapshot();
  bool verified = false;
  for (const auto& key : *keys) {
    if (!key.supports(*alg)) {
      continue;
    }
    if (!kid.empty() && !key.kid().empty() && key.kid() != kid) {
      continue;
    }
    if (jwt::verify_signature(*decoded, *alg, key)) {
      verified = true;
      break;
    }
  }
  if (!verified) {
    return denied(AuthOutcome::kUnauthorized, "signature verification failed");
  }

  const Json& claims = decoded->payload;
  const double now = now_epoch_seconds();
  const double skew = static_cast<double>(policy_.clock_skew_tolerance.count()) / 1000.0;

  auto exp = claims.find("exp");
  if (exp == claims.end() || !exp->is_number()) {
    return denied(AuthOutcome::kUnauthorized, "exp claim missing");
  }
  if (exp->get<double>() + skew <= now) {
    return denied(AuthOutcome::kUnauthorized, "token expired");
  }
  auto nbf = claims.find("nbf");
  if (nbf != claims.end() && nbf->is_number() && nbf->get<double>() - skew > now) {
    return denied(AuthOutcome::kUnauthorized, "token not yet valid");
  }

  if (!policy_.accepted_issuers.empty()) {
    const std::string issuer = claims.value("iss", "");
    if (std::find(policy_.accepted_issuers.begin(), policy_.accepted_issuers.end(), issuer) ==
        policy_.accepted_issuers.end()) {
      return denied(AuthOutcome::kUnauthorized, "issuer not accepted");
    }
  }

  if (policy_.required_audience) {
    auto aud = claims.find("aud");
    bool matched = false;
    if (aud != claims.end()) {
      if (aud->is_string()) {
        matched = aud->get<std::string>() == *policy_.required_audience;
      } else if (aud->is_array()) {
        for (const auto& entry : *aud) {
          if (entry.is_string() && entry.get<std::string>() == *policy_.required_audience) {
            matched = true;
            break;
          }
        }
      }
    }
    if (!matched) {
      return denied(AuthOutcome::kUnauthorized, "audience mismatch");
    }
  }

  if (policy_.required_claim) {
    const auto& [name, expected] = *policy_.required_claim;
    auto it = claims.find(name);
    if (it == claims.end() || *it != expected) {
      return denied(AuthOutcome::kForbidden, "required claim missing: " + name);
    }
  }

  AuthResult result;
  result.claims = claims;
  return result;
}

}  // namespace esg
