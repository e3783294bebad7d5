// Copyright 2026 the esg authors
// SPDX-License-Identifier: Apache-2.0

#include "esg/api.hpp"

#include <httplib.h>

#include <atomic>
#include <thread>

#include "esg/errors.hpp"
#include "esg/logging.hpp"
#include "esg/openapi.hpp"
#include "esg/schema.hpp"

namespace esg {

namespace {

void reply_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void reply_detail(httplib::Response& res, int status, const std::string& detail) {
  reply_json(res, status, Json{{"detail", detail}});
}

Json errors_to_detail(const schema::ValidationResult& result) {
  Json list = Json::array();
  for (const auto& error : result.errors) {
    list.push_back(Json{{"loc", error.path}, {"msg", error.message}});
  }
  return Json{{"detail", std::move(list)}};
}

std::string default_reason(int status) {
  switch (status) {
    case 400:
      return "bad request";
    case 401:
      return "unauthorized";
    case 403:
      return "forbidden";
    case 404:
      return "not found";
    case 408:
      return "request timeout";
    case 413:
      return "payload too large";
    case 422:
      return "unprocessable content";
    case 429:
      return "too many requests";
    case 500:
      return "internal error";
    case 503:
      return "service unavailable";
    default:
      return "error";
  }
}

}  // namespace

struct ApiServer::Impl {
  ServiceSpec spec;
  std::shared_ptr<Broker> broker;
  Authenticator authenticator;
  ApiOptions options;

  httplib::Server server;
  std::thread serve_thread;
  std::atomic<int> bound_port{-1};

  // openapi.json is deterministic; render once per version.
  std::map<std::string, std::string> openapi_cache;

  Impl(ServiceSpec spec_in, std::shared_ptr<Broker> broker_in, AuthPolicy auth_in,
       ApiOptions options_in)
      : spec(std::move(spec_in)),
        broker(std::move(broker_in)),
        authenticator(std::move(auth_in)),
        options(std::move(options_in)) {
    spec.check_valid();
    for (const auto& [tag, endpoints] : spec.versions()) {
      openapi_cache[tag.to_string()] =
          emit_openapi(spec, authenticator.policy().enabled, tag).dump(2);
    }
    configure();
  }

  // Runs an action that talks to the broker, retrying per policy; translates
  // the terminal errors into HTTP statuses.
  template <typename Fn>
  bool run_broker_action(httplib::Response& res, Fn&& action) {
    try {
      with_backoff(options.backoff, options.broker_attempts, action);
      return true;
    } catch (const BrokerUnavailable&) {
      reply_detail(res, 503, "service temporarily unavailable");
    } catch (const UnknownTask&) {
      reply_detail(res, 404, "unknown task");
    }
    return false;
  }

  const VersionedEndpoints* resolve(const std::string& version_text, EndpointKind kind,
                                    httplib::Response& res) {
    auto version = VersionTag::parse(version_text);
    if (!version) {
      reply_detail(res, 404, "unknown version");
      return nullptr;
    }
    const auto* endpoints = spec.find(*version);
    if (!endpoints) {
      reply_detail(res, 404, "unknown version");
      return nullptr;
    }
    if (kind == EndpointKind::kFitParameters && !endpoints->supports_fit()) {
      reply_detail(res, 404, "fit-parameters not supported by this service");
      return nullptr;
    }
    return endpoints;
  }

  void post_task(const httplib::Request& req, httplib::Response& res) {
    const std::string version_text = req.matches[1];
    const auto kind = *endpoint_kind_from_segment(std::string(req.matches[2]));
    const auto* endpoints = resolve(version_text, kind, res);
    if (!endpoints) {
      return;
    }
    const auto version = *VersionTag::parse(version_text);

    Json payload = Json::parse(req.body, nullptr, false);
    if (payload.is_discarded()) {
      reply_json(res, 422,
                 Json{{"detail", Json::array({Json{{"loc", ""},
                                                   {"msg", "body is not valid JSON"}}})}});
      return;
    }
    const auto* input_schema = spec.input_schema(version, kind);
    auto validation = schema::validate(*input_schema, payload);
    if (!validation.ok()) {
      reply_json(res, 422, errors_to_detail(validation));
      return;
    }

    TaskEnvelope envelope;
    envelope.task_id = TaskId::generate();
    envelope.kind = kind;
    envelope.version = version;
    envelope.input_payload = std::move(payload);
    envelope.created_at = now_utc();
    envelope.attempt = 0;

    bool ok = run_broker_action(res, [&] { broker->enqueue(envelope); });
    if (!ok) {
      return;
    }
    reply_json(res, 201, Json{{"task_ID", envelope.task_id.to_string()}});
  }

  void get_status(const httplib::Request& req, httplib::Response& res) {
    const std::string version_text = req.matches[1];
    const auto kind = *endpoint_kind_from_segment(std::string(req.matches[2]));
    if (!resolve(version_text, kind, res)) {
      return;
    }
    auto task_id = TaskId::parse(std::string(req.matches[3]));
    if (!task_id) {
      reply_detail(res, 404, "unknown task");
      return;
    }
    TaskState state = TaskState::kQueued;
    bool ok = run_broker_action(res, [&] { state = broker->get_status(*task_id); });
    if (!ok) {
      return;
    }
    reply_json(res, 200, status_to_json(state));
  }

  void get_result(const httplib::Request& req, httplib::Response& res) {
    const std::string version_text = req.matches[1];
    const auto kind = *endpoint_kind_from_segment(std::string(req.matches[2]));
    if (!resolve(version_text, kind, res)) {
      return;
    }
    auto task_id = TaskId::parse(std::string(req.matches[3]));
    if (!task_id) {
      reply_detail(res, 404, "unknown task");
      return;
    }
    std::optional<TaskOutcome> outcome;
    bool ok = run_broker_action(res, [&] { outcome = broker->fetch_outcome(*task_id, now_utc()); });
    if (!ok) {
      return;
    }
    if (!outcome) {
      reply_detail(res, 409, "result not ready");
      return;
    }
    if (outcome->verdict == Verdict::kSuccess) {
      reply_json(res, 200, outcome->result_payload);
    } else {
      reply_detail(res, 500, outcome->error_detail);
    }
  }

  void get_openapi(const httplib::Request& req, httplib::Response& res) {
    const std::string version_text = req.matches[1];
    auto it = openapi_cache.find(version_text);
    if (it == openapi_cache.end()) {
      reply_detail(res, 404, "unknown version");
      return;
    }
    res.status = 200;
    res.set_content(it->second, "application/json");
  }

  void configure() {
    server.set_payload_max_length(options.max_body_bytes);

    server.set_pre_routing_handler(
        [this](const httplib::Request& req, httplib::Response& res) {
          if (options.middleware) {
            auto rejected = options.middleware(
                MiddlewareRequest{req.method, req.path, req.remote_addr});
            if (rejected) {
              reply_detail(res, *rejected, "request rejected");
              return httplib::Server::HandlerResponse::Handled;
            }
          }
          const auto& policy = authenticator.policy();
          if (!policy.enabled) {
            return httplib::Server::HandlerResponse::Unhandled;
          }
          const bool exempt = policy.openapi_exempt &&
                              req.path.size() >= 13 &&
                              req.path.compare(req.path.size() - 13, 13, "/openapi.json") == 0;
          if (exempt) {
            return httplib::Server::HandlerResponse::Unhandled;
          }
          std::optional<std::string> header;
          if (req.has_header("Authorization")) {
            header = req.get_header_value("Authorization");
          }
          auto verdict = authenticator.authenticate(header);
          if (verdict.outcome == AuthOutcome::kAllowed) {
            return httplib::Server::HandlerResponse::Unhandled;
          }
          reply_detail(res, verdict.outcome == AuthOutcome::kForbidden ? 403 : 401,
                       verdict.reason);
          return httplib::Server::HandlerResponse::Handled;
        });

    // Every response carries JSON, including framework-generated errors.
    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (res.body.empty()) {
        res.set_content(Json{{"detail", default_reason(res.status)}}.dump(),
                        "application/json");
      }
      return httplib::Server::HandlerResponse::Handled;
    });

    const std::string version_re = "(v\\d+)";
    const std::string kind_re = "(request|fit-parameters)";
    const std::string id_re = "([^/]+)";

    server.Post("/" + version_re + "/" + kind_re + "/",
                [this](const httplib::Request& req, httplib::Response& res) {
                  post_task(req, res);
                });
    server.Get("/" + version_re + "/" + kind_re + "/" + id_re + "/status/",
               [this](const httplib::Request& req, httplib::Response& res) {
                 get_status(req, res);
               });
    server.Get("/" + version_re + "/" + kind_re + "/" + id_re + "/result/",
               [this](const httplib::Request& req, httplib::Response& res) {
                 get_result(req, res);
               });
    server.Get("/" + version_re + "/openapi\\.json",
               [this](const httplib::Request& req, httplib::Response& res) {
                 get_openapi(req, res);
               });

    // The printed endpoint forms end with a slash; the slash-less spellings
    // redirect permanently to the canonical ones.
    server.Post("/" + version_re + "/" + kind_re,
                [](const httplib::Request& req, httplib::Response& res) {
                  res.set_redirect(req.path + "/", 308);
                });
    server.Get("/" + version_re + "/" + kind_re + "/" + id_re + "/(status|result)",
               [](const httplib::Request& req, httplib::Response& res) {
                 res.set_redirect(req.path + "/", 308);
               });
  }

  int bind() {
    if (options.port == 0) {
      int port = server.bind_to_any_port(options.bind_address);
      if (port <= 0) {
        throw Error("cannot bind " + options.bind_address);
      }
      bound_port = port;
    } else {
      if (!server.bind_to_port(options.bind_address, options.port)) {
        throw Error("cannot bind " + options.bind_address + ":" +
                    std::to_string(options.port));
      }
      bound_port = options.port;
    }
    return bound_port;
  }
};

ApiServer::ApiServer(ServiceSpec spec, std::shared_ptr<Broker> broker, AuthPolicy auth,
                     ApiOptions options)
    : impl_(std::make_unique<Impl>(std::move(spec), std::move(broker), std::move(auth),
                                   std::move(options))) {}

ApiServer::~ApiServer() { stop(); }

int ApiServer::start() {
  const int port = impl_->bind();
  impl_->authenticator.start();
  impl_->serve_thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  log::info("api.listening", Json{{"port", port}});
  return port;
}

void ApiServer::run() {
  const int port = impl_->bind();
  impl_->authenticator.start();
  log::info("api.listening", Json{{"port", port}});
  impl_->server.listen_after_bind();
  impl_->authenticator.stop();
}

void ApiServer::stop() {
  impl_->server.stop();
  impl_->authenticator.stop();
  if (impl_->serve_thread.joinable()) {
    impl_->serve_thread.join();
  }
}

int ApiServer::port() const { return impl_->bound_port; }

}  // namespace esg
