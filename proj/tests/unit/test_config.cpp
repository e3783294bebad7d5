#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include "esg/config.hpp"

namespace {

using namespace esg;

TEST_CASE("settings parse typed values with fallbacks") {
  Settings s;
  s.set("port", "8080");
  s.set("ratio", "1.5");
  s.set("flag_on", "true");
  s.set("flag_off", "false");
  s.set("wait", "0.25");
  s.set("names", "a, b,,c");

  CHECK(s.contains("port"));
  CHECK_FALSE(s.contains("missing"));
  CHECK(s.raw("port") == std::string("8080"));
  CHECK(s.get_int("port", 1) == 8080);
  CHECK(s.get_int("missing", 7) == 7);
  CHECK(s.get_double("ratio", 0.0) == 1.5);
  CHECK(s.get_bool("flag_on", false));
  CHECK_FALSE(s.get_bool("flag_off", true));
  CHECK(s.get_bool("missing", true));
  CHECK(s.get_seconds("wait", Duration{0}) == Duration{250});
  CHECK(s.get_seconds("missing", Duration{123}) == Duration{123});
  CHECK(s.get_list("names") == std::vector<std::string>{"a", "b", "c"});
  CHECK(s.get_list("missing").empty());
}

TEST_CASE("malformed typed values name the offending key") {
  Settings s;
  s.set("port", "eighty");
  s.set("flag", "yes-ish");
  CHECK_THROWS_AS(s.get_int("port", 1), ConfigError);
  CHECK_THROWS_AS(s.get_bool("flag", false), ConfigError);
  CHECK_THROWS_AS(s.get_seconds("port", Duration{0}), ConfigError);
  try {
    s.get_int("port", 1);
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("port") != std::string::npos);
  }
}

TEST_CASE("config text supports comments, quotes, sections, and lists") {
  auto s = parse_config_text(R"(
# deployment defaults
broker_url = "resp://127.0.0.1:6379/0"
bind_addr = 0.0.0.0   # trailing comment
port = 8080

[auth]
enabled = true
issuers = ["https://id.example.test", "https://alt.example.test"]
audience = "energy-api"

[gc]
interval_s = 30
)");
  CHECK(s.get_string("broker_url", "") == "resp://127.0.0.1:6379/0");
  CHECK(s.get_string("bind_addr", "") == "0.0.0.0");
  CHECK(s.get_int("port", 0) == 8080);
  CHECK(s.get_bool("auth_enabled", false));
  CHECK(s.get_list("auth_issuers") ==
        std::vector<std::string>{"https://id.example.test", "https://alt.example.test"});
  CHECK(s.get_string("auth_audience", "") == "energy-api");
  CHECK(s.get_seconds("gc_interval_s", Duration{0}) == Duration{30'000});
}

TEST_CASE("a hash inside quotes is not a comment") {
  auto s = parse_config_text("secret = \"ab#cd\"\n");
  CHECK(s.get_string("secret", "") == "ab#cd");
}

TEST_CASE("config files load from disk and report missing paths") {
  std::string path = "test_config_roundtrip.toml";
  {
    std::ofstream out(path);
    out << "port = 9999\n";
  }
  auto s = parse_config_file(path);
  CHECK(s.get_int("port", 0) == 9999);
  std::remove(path.c_str());
  CHECK_THROWS_AS(parse_config_file("does-not-exist.toml"), ConfigError);
}

TEST_CASE("environment variables map through the esg prefix") {
  ::setenv("ESG_BROKER_URL", "memory://env-test", 1);
  ::setenv("ESG_PORT", "7777", 1);
  ::setenv("UNRELATED", "x", 1);
  auto s = settings_from_env();
  ::unsetenv("ESG_BROKER_URL");
  ::unsetenv("ESG_PORT");
  ::unsetenv("UNRELATED");
  CHECK(s.get_string("broker_url", "") == "memory://env-test");
  CHECK(s.get_int("port", 0) == 7777);
  CHECK_FALSE(s.contains("unrelated"));
}

TEST_CASE("later layers win key by key") {
  Settings file;
  file.set("port", "1");
  file.set("bind_addr", "file-host");
  Settings env;
  env.set("port", "2");
  Settings flags;
  flags.set("port", "3");

  auto merged = merge({&file, &env, &flags});
  CHECK(merged.get_int("port", 0) == 3);
  CHECK(merged.get_string("bind_addr", "") == "file-host");

  auto partial = merge({&file, &env});
  CHECK(partial.get_int("port", 0) == 2);
}

TEST_CASE("broker urls parse both schemes") {
  auto memory = BrokerUrl::parse("memory://shared");
  CHECK(memory.scheme == BrokerUrl::Scheme::kMemory);
  CHECK(memory.memory_name == "shared");
  CHECK(BrokerUrl::parse("memory://").memory_name == "default");

  auto resp = BrokerUrl::parse("resp://10.0.0.5:6380/2");
  CHECK(resp.scheme == BrokerUrl::Scheme::kResp);
  CHECK(resp.target.host == "10.0.0.5");
  CHECK(resp.target.port == 6380);
  CHECK(resp.target.database == 2);

  auto redis = BrokerUrl::parse("redis://example.test");
  CHECK(redis.scheme == BrokerUrl::Scheme::kResp);
  CHECK(redis.target.host == "example.test");
  CHECK(redis.target.port == 6379);
  CHECK(redis.target.database == 0);

  auto with_password = BrokerUrl::parse("resp://:hunter2@localhost:6379/1");
  REQUIRE(with_password.target.password.has_value());
  CHECK(*with_password.target.password == "hunter2");
  CHECK(with_password.target.host == "localhost");

  CHECK_THROWS_AS(BrokerUrl::parse("amqp://example.test"), ConfigError);
  CHECK_THROWS_AS(BrokerUrl::parse("resp://host:notaport"), ConfigError);
  CHECK_THROWS_AS(BrokerUrl::parse(""), ConfigError);
}

TEST_CASE("memory brokers with the same name share a backend") {
  auto a = open_broker(BrokerUrl::parse("memory://config-shared"), "esg");
  auto b = open_broker(BrokerUrl::parse("memory://config-shared"), "esg");
  auto c = open_broker(BrokerUrl::parse("memory://config-other"), "esg");

  TaskEnvelope envelope;
  envelope.task_id = TaskId::generate();
  envelope.version = *VersionTag::parse("v1");
  envelope.input_payload = Json{{"n", 1}};
  envelope.created_at = now_utc();
  a->enqueue(envelope);
  CHECK(b->get_status(envelope.task_id) == TaskState::kQueued);
  CHECK_THROWS_AS(c->get_status(envelope.task_id), UnknownTask);
}

TEST_CASE("typed views apply documented defaults") {
  Settings empty;
  auto api = api_options_from(empty);
  CHECK(api.bind_address == "127.0.0.1");
  CHECK(api.port == 8080);
  CHECK(api.max_body_bytes == 10 * 1024 * 1024);

  auto worker = worker_options_from(empty);
  CHECK(worker.visibility == Duration{30 * 60'000});
  CHECK(worker.heartbeat == Duration{60'000});
  CHECK(worker.shutdown_grace == Duration{30'000});
  CHECK_FALSE(worker.max_runtime.has_value());

  auto gc = gc_policy_from(empty);
  CHECK(gc.retain_after_fetch == Duration{15 * 60'000});
  CHECK(gc.absolute_ttl == Duration{48 * 3'600'000});
  CHECK(gc_interval_from(empty) == Duration{60'000});

  auto auth = auth_policy_from(empty);
  CHECK_FALSE(auth.enabled);
}

TEST_CASE("typed views honor overrides") {
  Settings s;
  s.set("bind_addr", "0.0.0.0");
  s.set("port", "9000");
  s.set("max_body_bytes", "1024");
  s.set("worker_id", "w-7");
  s.set("worker_visibility_s", "120");
  s.set("worker_heartbeat_s", "5");
  s.set("worker_grace_s", "2");
  s.set("worker_max_runtime_s", "600");
  s.set("gc_retain_after_fetch_s", "2");
  s.set("gc_absolute_ttl_s", "30");
  s.set("gc_interval_s", "1");

  auto api = api_options_from(s);
  CHECK(api.bind_address == "0.0.0.0");
  CHECK(api.port == 9000);
  CHECK(api.max_body_bytes == 1024);

  auto worker = worker_options_from(s);
  CHECK(worker.worker_id == "w-7");
  CHECK(worker.visibility == Duration{120'000});
  CHECK(worker.heartbeat == Duration{5'000});
  CHECK(worker.shutdown_grace == Duration{2'000});
  CHECK(worker.max_runtime == Duration{600'000});

  auto gc = gc_policy_from(s);
  CHECK(gc.retain_after_fetch == Duration{2'000});
  CHECK(gc.absolute_ttl == Duration{30'000});
  CHECK(gc_interval_from(s) == Duration{1'000});
}

TEST_CASE("auth settings build a policy with keys and claims") {
  Settings s;
  s.set("auth_enabled", "true");
  s.set("auth_hs256_secret", "topsecret");
  s.set("auth_issuers", "https://a.test,https://b.test");
  s.set("auth_audience", "energy-api");
  s.set("auth_required_claim", "role=forecast-user");
  s.set("auth_clock_skew_s", "10");

  auto policy = auth_policy_from(s);
  CHECK(policy.enabled);
  CHECK(policy.accepted_issuers == std::vector<std::string>{"https://a.test", "https://b.test"});
  CHECK(policy.required_audience == std::string("energy-api"));
  REQUIRE(policy.required_claim.has_value());
  CHECK(policy.required_claim->first == "role");
  CHECK(policy.required_claim->second == Json("forecast-user"));
  CHECK(policy.clock_skew_tolerance == Duration{10'000});
  const auto* keys = std::get_if<StaticKeys>(&policy.key_source);
  REQUIRE(keys != nullptr);
  REQUIRE(keys->keys.size() == 1);
  CHECK(keys->keys[0].secret() == "topsecret");
  CHECK(policy.accepted_algorithms == std::vector<jwt::Algorithm>{jwt::Algorithm::kHS256});

  SUBCASE("a jwks url takes precedence as the key source") {
    s.set("auth_jwks_url", "http://127.0.0.1:1/jwks.json");
    s.set("auth_jwks_refresh_s", "60");
    auto jwks_policy = auth_policy_from(s);
    const auto* source = std::get_if<JwksSource>(&jwks_policy.key_source);
    REQUIRE(source != nullptr);
    CHECK(source->url == "http://127.0.0.1:1/jwks.json");
    CHECK(source->refresh_interval == Duration{60'000});
  }
  SUBCASE("enabled auth without any key source is a config error") {
    Settings bare;
    bare.set("auth_enabled", "true");
    CHECK_THROWS_AS(auth_policy_from(bare), ConfigError);
  }
}

}  // namespace
