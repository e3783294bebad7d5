// Test-side JWT fixtures: local keys, claim templates, a JWKS stub server.
#pragma once

#include <httplib.h>

#include <atomic>
#include <chrono>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "esg/auth.hpp"
#include "esg/jwt.hpp"
#include "esg/time.hpp"

namespace esg::testing {

inline long long epoch_seconds_now() {
  return std::chrono::duration_cast<std::chrono::seconds>(now_utc().time_since_epoch()).count();
}

inline Json standard_claims(const std::string& iss, const std::string& aud,
                            long long lifetime_s = 3600) {
  auto now = epoch_seconds_now();
  return Json{{"iss", iss}, {"aud", aud}, {"sub", "user-1"}, {"iat", now},
              {"exp", now + lifetime_s}};
}

inline std::string bearer(const Json& claims, jwt::Algorithm alg, const jwt::Key& key) {
  return "Bearer " + jwt::sign_token(claims, alg, key);
}

inline Json jwks_document(const std::vector<jwt::Key>& keys) {
  Json array = Json::array();
  for (const auto& key : keys) array.push_back(jwt::public_jwk(key));
  return Json{{"keys", array}};
}

// Stub identity-provider endpoint: serves a JWKS document over HTTP on an
// ephemeral port. The document can be swapped to exercise key rotation.
class JwksStub {
 public:
  explicit JwksStub(Json document) : document_(std::move(document)) {
    server_.Get("/jwks.json", [this](const httplib::Request&, httplib::Response& res) {
      std::string body;
      {
        std::lock_guard<std::mutex> lock(mutex_);
        body = document_.dump();
      }
      res.set_content(body, "application/json");
      ++hits_;
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~JwksStub() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/jwks.json"; }
  int hits() const { return hits_.load(); }

  void swap_document(Json document) {
    std::lock_guard<std::mutex> lock(mutex_);
    document_ = std::move(document);
  }

 private:
  std::mutex mutex_;
  Json document_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  std::atomic<int> hits_{0};
};

}  // namespace esg::testing
