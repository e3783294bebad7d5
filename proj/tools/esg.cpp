// Copyright 2026 the esg authors
// SPDX-License-Identifier: Apache-2.0
//
// Operator and user entry points. One process role per invocation; a full
// stack is composed from several invocations sharing one broker:
//
//   esg serve-broker --port 6379
//   esg serve-api    --broker resp://127.0.0.1:6379/0
//   esg serve-worker --broker resp://127.0.0.1:6379/0
//   esg serve-gc     --broker resp://127.0.0.1:6379/0

#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <thread>
#include <tuple>
#include <vector>

#include "esg/api.hpp"
#include "esg/client.hpp"
#include "esg/config.hpp"
#include "esg/gc.hpp"
#include "esg/logging.hpp"
#include "esg/openapi.hpp"
#include "esg/pv.hpp"
#include "esg/resp_server.hpp"
#include "esg/worker.hpp"

namespace {

volatile std::sig_atomic_t g_signal = 0;

void handle_signal(int) { g_signal = 1; }

void await_interrupt() {
  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);
  while (g_signal == 0) std::this_thread::sleep_for(std::chrono::milliseconds(100));
}

// Records string flags so that only flags the user actually passed override
// environment and config-file settings.
class FlagLayer {
 public:
  void option(CLI::App* cmd, const std::string& flag, const std::string& key,
              const std::string& help) {
    auto storage = std::make_shared<std::string>();
    auto* opt = cmd->add_option(flag, *storage, help);
    bound_.emplace_back(opt, key, storage);
  }

  void toggle(CLI::App* cmd, const std::string& flag, const std::string& key,
              const std::string& help) {
    auto storage = std::make_shared<std::string>();
    auto* opt = cmd->add_flag(flag, help);
    *storage = "true";
    bound_.emplace_back(opt, key, storage);
  }

  esg::Settings collect() const {
    esg::Settings flags;
    for (const auto& [opt, key, storage] : bound_) {
      if (opt->count() > 0) flags.set(key, *storage);
    }
    return flags;
  }

 private:
  std::vector<std::tuple<CLI::Option*, std::string, std::shared_ptr<std::string>>> bound_;
};

esg::Settings load_settings(const std::string& config_path, const FlagLayer& flags) {
  esg::Settings file;
  if (!config_path.empty()) file = esg::parse_config_file(config_path);
  auto env = esg::settings_from_env();
  auto flag_layer = flags.collect();
  return esg::merge({&file, &env, &flag_layer});
}

void add_broker_flags(CLI::App* cmd, FlagLayer& flags) {
  flags.option(cmd, "--broker", "broker_url",
               "Broker address: resp://host:port/db or memory://name");
  flags.option(cmd, "--namespace", "broker_namespace", "Key prefix on the RESP backend");
}

int serve_api(const std::string& config_path, const FlagLayer& flags) {
  auto settings = load_settings(config_path, flags);
  auto broker = esg::open_broker(settings);
  esg::ApiServer server(esg::pv::make_pv_service(), broker, esg::auth_policy_from(settings),
                        esg::api_options_from(settings));
  server.start();
  await_interrupt();
  server.stop();
  return 0;
}

int serve_worker(const std::string& config_path, const FlagLayer& flags) {
  auto settings = load_settings(config_path, flags);
  auto broker = esg::open_broker(settings);
  auto spec = esg::pv::make_pv_service();

  std::vector<std::pair<esg::VersionTag, esg::EndpointKind>> subscriptions;
  for (const auto& [version, endpoints] : spec.versions()) {
    subscriptions.emplace_back(version, esg::EndpointKind::kRequest);
    if (endpoints.supports_fit()) {
      subscriptions.emplace_back(version, esg::EndpointKind::kFitParameters);
    }
  }

  esg::Worker worker(std::move(spec), broker, std::move(subscriptions),
                     esg::worker_options_from(settings));
  std::thread runner([&worker] { worker.run(); });
  await_interrupt();
  worker.request_stop();
  runner.join();
  return 0;
}

int serve_gc(const std::string& config_path, const FlagLayer& flags) {
  auto settings = load_settings(config_path, flags);
  auto broker = esg::open_broker(settings);
  esg::GcProcess gc(broker, esg::gc_policy_from(settings), esg::gc_interval_from(settings));
  std::thread runner([&gc] { gc.run(); });
  await_interrupt();
  gc.request_stop();
  runner.join();
  return 0;
}

int serve_broker(const std::string& bind, int port, const std::string& password) {
  esg::resp::RespServer server(
      bind, port, password.empty() ? std::nullopt : std::make_optional(password));
  int bound = server.start();
  esg::log::info("broker.listening", {{"bind", bind}, {"port", bound}});
  await_interrupt();
  server.stop();
  return 0;
}

int print_openapi(const std::string& version_text, bool auth) {
  auto version = esg::VersionTag::parse(version_text);
  if (!version) {
    std::cerr << "not a version tag: " << version_text << "\n";
    return 2;
  }
  auto spec = esg::pv::make_pv_service();
  if (spec.find(*version) == nullptr) {
    std::cerr << "version not offered: " << version_text << "\n";
    return 2;
  }
  std::cout << esg::emit_openapi(spec, auth, *version).dump(2) << "\n";
  return 0;
}

int submit(const std::string& url, const std::string& token, const std::string& kind_text,
           const std::string& version_text, const std::string& input_path, bool wait,
           double timeout_s) {
  auto kind = esg::endpoint_kind_from_segment(kind_text);
  if (!kind) {
    std::cerr << "unknown kind: " << kind_text << " (use request or fit-parameters)\n";
    return 2;
  }
  auto version = esg::VersionTag::parse(version_text);
  if (!version) {
    std::cerr << "not a version tag: " << version_text << "\n";
    return 2;
  }
  std::ifstream file(input_path);
  if (!file) {
    std::cerr << "cannot open input file: " << input_path << "\n";
    return 2;
  }
  std::stringstream buffer;
  buffer << file.rdbuf();
  auto input = esg::Json::parse(buffer.str(), nullptr, false);
  if (input.is_discarded()) {
    std::cerr << "input file is not valid JSON: " << input_path << "\n";
    return 2;
  }

  esg::Client client(url, token.empty() ? std::nullopt : std::make_optional(token));
  try {
    auto handle = client.submit(*version, *kind, input);
    if (!wait) {
      std::cout << esg::Json{{"task_ID", handle.task_id.to_string()}}.dump() << "\n";
      return 0;
    }
    esg::PollPolicy policy;
    if (timeout_s > 0) {
      policy.max_wait = esg::Duration{static_cast<esg::Duration::rep>(timeout_s * 1000.0)};
    }
    std::cout << client.wait(handle, policy).dump(2) << "\n";
    return 0;
  } catch (const esg::ValidationRejected& ex) {
    std::cout << esg::Json{{"detail", ex.detail()}}.dump(2) << "\n";
    std::cerr << ex.what() << "\n";
    return 2;
  } catch (const esg::TaskFailed& ex) {
    std::cout << esg::Json{{"detail", ex.detail()}}.dump(2) << "\n";
    std::cerr << ex.what() << "\n";
    return 1;
  } catch (const esg::AuthRejected& ex) {
    std::cerr << ex.what() << "\n";
    return 2;
  } catch (const esg::TimedOut& ex) {
    std::cerr << ex.what() << "\n";
    return 3;
  } catch (const esg::ServiceUnavailable& ex) {
    std::cerr << ex.what() << "\n";
    return 3;
  } catch (const esg::ClientError& ex) {
    std::cerr << ex.what() << "\n";
    return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Async forecasting service framework: API, worker, GC and broker roles, "
               "plus client-side submission and document printing."};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "TOML-style configuration file")
      ->envname("ESG_CONFIG");

  auto* api_cmd = app.add_subcommand("serve-api", "Run the HTTP API process");
  FlagLayer api_flags;
  add_broker_flags(api_cmd, api_flags);
  api_flags.option(api_cmd, "--bind", "bind_addr", "Listen address");
  api_flags.option(api_cmd, "--port", "port", "Listen port (0 picks one)");
  api_flags.option(api_cmd, "--max-body-bytes", "max_body_bytes", "Request body cap");
  api_flags.toggle(api_cmd, "--auth-enabled", "auth_enabled", "Require bearer tokens");
  api_flags.option(api_cmd, "--auth-jwks-url", "auth_jwks_url", "JWKS document URL");
  api_flags.option(api_cmd, "--auth-hs256-secret", "auth_hs256_secret",
                   "Shared HMAC secret (alternative to JWKS)");
  api_flags.option(api_cmd, "--auth-issuers", "auth_issuers", "Accepted iss values, comma-separated");
  api_flags.option(api_cmd, "--auth-audience", "auth_audience", "Required aud value");
  api_flags.option(api_cmd, "--auth-required-claim", "auth_required_claim",
                   "name=value a token must carry");

  auto* worker_cmd = app.add_subcommand("serve-worker", "Run a worker process");
  FlagLayer worker_flags;
  add_broker_flags(worker_cmd, worker_flags);
  worker_flags.option(worker_cmd, "--worker-id", "worker_id", "Stable worker name");
  worker_flags.option(worker_cmd, "--visibility-s", "worker_visibility_s",
                      "Claim lease length in seconds");
  worker_flags.option(worker_cmd, "--heartbeat-s", "worker_heartbeat_s",
                      "Lease renewal cadence in seconds");
  worker_flags.option(worker_cmd, "--grace-s", "worker_grace_s",
                      "Shutdown grace for the in-flight task in seconds");
  worker_flags.option(worker_cmd, "--max-runtime-s", "worker_max_runtime_s",
                      "Per-task runtime cap in seconds (0 = none)");

  auto* gc_cmd = app.add_subcommand("serve-gc", "Run the garbage collector process");
  FlagLayer gc_flags;
  add_broker_flags(gc_cmd, gc_flags);
  gc_flags.option(gc_cmd, "--retain-s", "gc_retain_after_fetch_s",
                  "Retention after first result fetch, seconds");
  gc_flags.option(gc_cmd, "--ttl-s", "gc_absolute_ttl_s", "Absolute task lifetime, seconds");
  gc_flags.option(gc_cmd, "--interval-s", "gc_interval_s", "Sweep cadence, seconds");

  auto* broker_cmd =
      app.add_subcommand("serve-broker", "Run the bundled in-memory RESP2 store");
  std::string broker_bind = "127.0.0.1";
  int broker_port = 6379;
  std::string broker_password;
  broker_cmd->add_option("--bind", broker_bind, "Listen address");
  broker_cmd->add_option("--port", broker_port, "Listen port (0 picks one)");
  broker_cmd->add_option("--password", broker_password, "Require AUTH with this password");

  auto* openapi_cmd = app.add_subcommand("openapi", "Print the OpenAPI document");
  std::string openapi_version = "v1";
  bool openapi_auth = false;
  openapi_cmd->add_option("--version", openapi_version, "Service version tag");
  openapi_cmd->add_flag("--auth", openapi_auth, "Document bearer authentication");

  auto* submit_cmd = app.add_subcommand("submit", "Submit a task and optionally wait");
  std::string submit_url = "http://127.0.0.1:8080";
  std::string submit_token;
  std::string submit_kind = "request";
  std::string submit_version = "v1";
  std::string submit_input;
  bool submit_wait = false;
  double submit_timeout_s = 0.0;
  submit_cmd->add_option("--url", submit_url, "Service base URL")->envname("ESG_URL");
  submit_cmd->add_option("--token", submit_token, "Bearer token")->envname("ESG_TOKEN");
  submit_cmd->add_option("--kind", submit_kind, "request or fit-parameters");
  submit_cmd->add_option("--version", submit_version, "Service version tag");
  submit_cmd->add_option("--input", submit_input, "JSON payload file")->required();
  submit_cmd->add_flag("--wait", submit_wait, "Poll until the result is available");
  submit_cmd->add_option("--timeout-s", submit_timeout_s,
                         "Give up waiting after this many seconds (0 = no limit)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    int code = app.exit(ex);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(api_cmd)) return serve_api(config_path, api_flags);
    if (app.got_subcommand(worker_cmd)) return serve_worker(config_path, worker_flags);
    if (app.got_subcommand(gc_cmd)) return serve_gc(config_path, gc_flags);
    if (app.got_subcommand(broker_cmd)) {
      return serve_broker(broker_bind, broker_port, broker_password);
    }
    if (app.got_subcommand(openapi_cmd)) return print_openapi(openapi_version, openapi_auth);
    if (app.got_subcommand(submit_cmd)) {
      return submit(submit_url, submit_token, submit_kind, submit_version, submit_input,
                    submit_wait, submit_timeout_s);
    }
  } catch (const esg::ConfigError& ex) {
    std::cerr << "configuration error: " << ex.what() << "\n";
    return 2;
  } catch (const esg::SpecInvalid& ex) {
    std::cerr << "configuration error: " << ex.what() << "\n";
    return 2;
  } catch (const esg::BrokerUnavailable& ex) {
    std::cerr << "broker unreachable: " << ex.what() << "\n";
    return 3;
  } catch (const esg::Error& ex) {
    std::cerr << ex.what() << "\n";
    return 1;
  }
  return 0;
}
