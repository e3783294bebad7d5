// Copyright 2026 the esg authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "esg/api.hpp"
#include "esg/auth.hpp"
#include "esg/broker.hpp"
#include "esg/gc.hpp"
#include "esg/resp.hpp"
#include "esg/worker.hpp"

namespace esg {

class ConfigError : public Error {
  using Error::Error;
};

// Flat key -> text settings store. Keys are lowercase snake_case; every
// consumer parses its own types so a bad value names the offending key.
//
// Known keys:
//   broker_url                resp://host:port/db | redis://... | memory://name
//   broker_namespace          key prefix for the RESP backend (default "esg")
//   bind_addr, port           API listener (port 0 picks an ephemeral port)
//   max_body_bytes            request body cap
//   auth_enabled              bool
//   auth_jwks_url             key source, JWKS document over HTTP(S)
//   auth_jwks_refresh_s       JWKS re-fetch cadence
//   auth_hs256_secret         key source alternative, single shared secret
//   auth_issuers              comma-separated accepted `iss` values
//   auth_audience             required `aud` value
//   auth_required_claim       name=value pair a token must carry
//   auth_clock_skew_s         leeway for exp/nbf
//   worker_id                 stable worker name (default: generated)
//   worker_visibility_s, worker_heartbeat_s, worker_grace_s
//   worker_max_runtime_s      0 disables the per-task cap
//   gc_retain_after_fetch_s, gc_absolute_ttl_s, gc_interval_s
class Settings {
 public:
  void set(std::string key, std::string value);
  bool contains(const std::string& key) const;
  std::optional<std::string> raw(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  // Value is in (possibly fractional) seconds.
  Duration get_seconds(const std::string& key, Duration fallback) const;
  // Comma-separated; empty entries dropped.
  std::vector<std::string> get_list(const std::string& key) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

// TOML-style flat file: `key = value` lines, optional [section] headers that
// prefix following keys ("[gc]" + "interval_s" -> "gc_interval_s"), `#`
// comments, quoted or bare values, [a, b] lists stored comma-joined.
Settings parse_config_file(const std::string& path);
Settings parse_config_text(const std::string& text);

// ESG_-prefixed process environment: ESG_BROKER_URL -> broker_url.
Settings settings_from_env();

// Later layers win key-by-key: merge({file, env, flags}).
Settings merge(std::initializer_list<const Settings*> layers);

// Broker address. memory://<name> shares a process-global backend of that
// name; resp:// (alias redis://) is host[:port][/db] with an optional
// password in the userinfo slot.
struct BrokerUrl {
  enum class Scheme { kMemory, kResp };
  Scheme scheme = Scheme::kMemory;
  std::string memory_name = "default";
  resp::Target target;

  static BrokerUrl parse(const std::string& url);
};

std::shared_ptr<Broker> open_broker(const BrokerUrl& url, const std::string& key_namespace);
std::shared_ptr<Broker> open_broker(const Settings& settings);

// Typed views over the settings, defaults applied.
ApiOptions api_options_from(const Settings& settings);
AuthPolicy auth_policy_from(const Settings& settings);
WorkerOptions worker_options_from(const Settings& settings);
GcPolicy gc_policy_from(const Settings& settings);
Duration gc_interval_from(const Settings& settings);

}  // namespace esg
