// Copyright 2026 the esg authors
// SPDX-License-Identifier: Apache-2.0

#include "esg/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "esg/memory_broker.hpp"
#include "esg/resp_broker.hpp"

extern "C" char** environ;

namespace esg {

namespace {

std::string trim(const std::string& text) {
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
  return text.substr(begin, end - begin);
}

std::string lower(std::string text) {
  for (auto& c : text) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return text;
}

// Cuts a trailing comment, respecting double quotes.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

std::string parse_value(const std::string& raw, int line_no) {
  auto text = trim(raw);
  if (text.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty value");
  if (text.front() == '"') {
    if (text.size() < 2 || text.back() != '"') {
      throw ConfigError("line " + std::to_string(line_no) + ": unterminated string");
    }
    return text.substr(1, text.size() - 2);
  }
  if (text.front() == '[') {
    if (text.back() != ']') {
      throw ConfigError("line " + std::to_string(line_no) + ": unterminated list");
    }
    // Lists are stored comma-joined; get_list() splits them back apart.
    std::string joined;
    std::stringstream items(text.substr(1, text.size() - 2));
    std::string item;
    while (std::getline(items, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      if (item.front() == '"' && item.size() >= 2 && item.back() == '"') {
        item = item.substr(1, item.size() - 2);
      }
      if (!joined.empty()) joined += ',';
      joined += item;
    }
    return joined;
  }
  return text;
}

}  // namespace

void Settings::set(std::string key, std::string value) {
  values_[std::move(key)] = std::move(value);
}

bool Settings::contains(const std::string& key) const { return values_.count(key) != 0; }

std::optional<std::string> Settings::raw(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string Settings::get_string(const std::string& key, const std::string& fallback) const {
  auto value = raw(key);
  return value ? *value : fallback;
}

long long Settings::get_int(const std::string& key, long long fallback) const {
  auto value = raw(key);
  if (!value) return fallback;
  try {
    std::size_t used = 0;
    long long parsed = std::stoll(*value, &used);
    if (used != value->size()) throw std::invalid_argument("");
    return parsed;
  } catch (const std::exception&) {
    throw ConfigError(key + ": not an integer: " + *value);
  }
}

double Settings::get_double(const std::string& key, double fallback) const {
  auto value = raw(key);
  if (!value) return fallback;
  try {
    std::size_t used = 0;
    double parsed = std::stod(*value, &used);
    if (used != value->size()) throw std::invalid_argument("");
    return parsed;
  } catch (const std::exception&) {
    throw ConfigError(key + ": not a number: " + *value);
  }
}

bool Settings::get_bool(const std::string& key, bool fallback) const {
  auto value = raw(key);
  if (!value) return fallback;
  auto text = lower(trim(*value));
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError(key + ": not a boolean: " + *value);
}

Duration Settings::get_seconds(const std::string& key, Duration fallback) const {
  if (!contains(key)) return fallback;
  double seconds = get_double(key, 0.0);
  if (seconds < 0) throw ConfigError(key + ": must not be negative");
  return Duration{static_cast<Duration::rep>(seconds * 1000.0 + 0.5)};
}

std::vector<std::string> Settings::get_list(const std::string& key) const {
  std::vector<std::string> out;
  auto value = raw(key);
  if (!value) return out;
  std::stringstream items(*value);
  std::string item;
  while (std::getline(items, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

Settings parse_config_text(const std::string& text) {
  Settings settings;
  std::stringstream lines(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    auto content = trim(strip_comment(line));
    if (content.empty()) continue;
    if (content.front() == '[') {
      if (content.back() != ']') {
        throw ConfigError("line " + std::to_string(line_no) + ": unterminated section");
      }
      section = lower(trim(content.substr(1, content.size() - 2)));
      continue;
    }
    auto eq = content.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    auto key = lower(trim(content.substr(0, eq)));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    if (!section.empty()) key = section + "_" + key;
    settings.set(key, parse_value(content.substr(eq + 1), line_no));
  }
  return settings;
}

Settings parse_config_file(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw ConfigError("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << file.rdbuf();
  return parse_config_text(buffer.str());
}

Settings settings_from_env() {
  Settings settings;
  for (char** entry = environ; entry != nullptr && *entry != nullptr; ++entry) {
    std::string pair(*entry);
    auto eq = pair.find('=');
    if (eq == std::string::npos) continue;
    auto name = pair.substr(0, eq);
    if (name.size() <= 4 || name.compare(0, 4, "ESG_") != 0) continue;
    settings.set(lower(name.substr(4)), pair.substr(eq + 1));
  }
  return settings;
}

Settings merge(std::initializer_list<const Settings*> layers) {
  Settings merged;
  for (const Settings* layer : layers) {
    if (layer == nullptr) continue;
    for (const auto& [key, value] : layer->values()) merged.set(key, value);
  }
  return merged;
}

BrokerUrl BrokerUrl::parse(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("broker url needs a scheme: " + url);
  }
  auto scheme = lower(url.substr(0, scheme_end));
  auto rest = url.substr(scheme_end + 3);

  BrokerUrl parsed;
  if (scheme == "memory") {
    parsed.scheme = Scheme::kMemory;
    parsed.memory_name = rest.empty() ? "default" : rest;
    return parsed;
  }
  if (scheme != "resp" && scheme != "redis") {
    throw ConfigError("unsupported broker scheme: " + scheme);
  }

  parsed.scheme = Scheme::kResp;
  auto at = rest.rfind('@');
  if (at != std::string::npos) {
    auto userinfo = rest.substr(0, at);
    rest = rest.substr(at + 1);
    auto colon = userinfo.find(':');
    // user:password@ or :password@; the user part is ignored.
    parsed.target.password = colon == std::string::npos ? userinfo : userinfo.substr(colon + 1);
  }
  auto slash = rest.find('/');
  if (slash != std::string::npos) {
    auto db = rest.substr(slash + 1);
    rest = rest.substr(0, slash);
    if (!db.empty()) {
      try {
        parsed.target.database = std::stoi(db);
      } catch (const std::exception&) {
        throw ConfigError("broker url database must be an integer: " + db);
      }
    }
  }
  auto colon = rest.rfind(':');
  if (colon != std::string::npos) {
    try {
      parsed.target.port = static_cast<std::uint16_t>(std::stoi(rest.substr(colon + 1)));
    } catch (const std::exception&) {
      throw ConfigError("broker url port must be an integer: " + rest);
    }
    rest = rest.substr(0, colon);
  }
  if (!rest.empty()) parsed.target.host = rest;
  return parsed;
}

std::shared_ptr<Broker> open_broker(const BrokerUrl& url, const std::string& key_namespace) {
  if (url.scheme == BrokerUrl::Scheme::kMemory) {
    return std::make_shared<MemoryBroker>(MemoryBackend::named(url.memory_name));
  }
  return std::make_shared<RespBroker>(url.target, key_namespace);
}

std::shared_ptr<Broker> open_broker(const Settings& settings) {
  auto url = BrokerUrl::parse(settings.get_string("broker_url", "memory://default"));
  return open_broker(url, settings.get_string("broker_namespace", "esg"));
}

ApiOptions api_options_from(const Settings& settings) {
  ApiOptions options;
  options.bind_address = settings.get_string("bind_addr", options.bind_address);
  options.port = static_cast<int>(settings.get_int("port", options.port));
  options.max_body_bytes = static_cast<std::size_t>(
      settings.get_int("max_body_bytes", static_cast<long long>(options.max_body_bytes)));
  return options;
}

AuthPolicy auth_policy_from(const Settings& settings) {
  AuthPolicy policy;
  policy.enabled = settings.get_bool("auth_enabled", false);
  if (!policy.enabled) return policy;

  auto jwks_url = settings.get_string("auth_jwks_url", "");
  auto secret = settings.get_string("auth_hs256_secret", "");
  if (!jwks_url.empty()) {
    policy.key_source = JwksSource{
        jwks_url, settings.get_seconds("auth_jwks_refresh_s", Duration{300'000})};
  } else if (!secret.empty()) {
    policy.key_source = StaticKeys{{jwt::Key::hmac(secret, "config")}};
    policy.accepted_algorithms = {jwt::Algorithm::kHS256};
  } else {
    throw ConfigError("auth enabled but neither auth_jwks_url nor auth_hs256_secret is set");
  }

  policy.accepted_issuers = settings.get_list("auth_issuers");
  auto audience = settings.get_string("auth_audience", "");
  if (!audience.empty()) policy.required_audience = audience;

  auto claim = settings.get_string("auth_required_claim", "");
  if (!claim.empty()) {
    auto eq = claim.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError("auth_required_claim must look like name=value");
    }
    auto value_text = claim.substr(eq + 1);
    Json value = Json::parse(value_text, nullptr, false);
    if (value.is_discarded()) value = value_text;
    policy.required_claim = std::make_pair(claim.substr(0, eq), value);
  }

  policy.clock_skew_tolerance =
      settings.get_seconds("auth_clock_skew_s", policy.clock_skew_tolerance);
  return policy;
}

WorkerOptions worker_options_from(const Settings& settings) {
  WorkerOptions options;
  options.worker_id = settings.get_string("worker_id", "");
  options.visibility = settings.get_seconds("worker_visibility_s", options.visibility);
  options.heartbeat = settings.get_seconds("worker_heartbeat_s", options.heartbeat);
  options.shutdown_grace = settings.get_seconds("worker_grace_s", options.shutdown_grace);
  auto max_runtime = settings.get_seconds("worker_max_runtime_s", Duration{0});
  if (max_runtime.count() > 0) options.max_runtime = max_runtime;
  return options;
}

GcPolicy gc_policy_from(const Settings& settings) {
  GcPolicy policy;
  policy.retain_after_fetch =
      settings.get_seconds("gc_retain_after_fetch_s", policy.retain_after_fetch);
  policy.absolute_ttl = settings.get_seconds("gc_absolute_ttl_s", policy.absolute_ttl);
  return policy;
}

Duration gc_interval_from(const Settings& settings) {
  return settings.get_seconds("gc_interval_s", Duration{60'000});
}

}  // namespace esg
