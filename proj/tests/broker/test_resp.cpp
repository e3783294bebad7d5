#include <doctest.h>

#include <algorithm>
#include <set>

#include "esg/resp.hpp"
#include "esg/resp_broker.hpp"
#include "esg/resp_server.hpp"
#include "support/broker_contract.hpp"

namespace {

using namespace esg;
using namespace esg::testing;

std::set<std::string> keys_under(resp::Connection& probe, const std::string& ns) {
  std::set<std::string> keys;
  for (const auto& item : resp::expect_array(probe.command({"KEYS", ns + ":*"}))) {
    keys.insert(item.text);
  }
  return keys;
}

TEST_CASE("the task key set follows the lifecycle and empties on delete") {
  resp::RespServer server("127.0.0.1", 0);
  server.start();
  resp::Target target;
  target.host = "127.0.0.1";
  target.port = static_cast<std::uint16_t>(server.port());

  RespBroker broker(target, "lay");
  resp::Connection probe(target);

  auto envelope = make_envelope();
  auto id = envelope.task_id.to_string();
  broker.enqueue(envelope);
  CHECK(keys_under(probe, "lay") ==
        std::set<std::string>{"lay:v1:request:queue", "lay:tasks:index",
                              "lay:task:" + id + ":envelope", "lay:task:" + id + ":status",
                              "lay:task:" + id + ":meta"});

  REQUIRE(broker.claim(envelope.version, envelope.kind, "w", Duration{60'000}, Duration{0})
              .has_value());
  CHECK(keys_under(probe, "lay").count("lay:task:" + id + ":claim") == 1);
  CHECK(keys_under(probe, "lay").count("lay:v1:request:queue") == 0);

  broker.put_outcome(TaskOutcome::success(envelope.task_id, Json{{"ok", 1}}, now_utc()));
  auto after_outcome = keys_under(probe, "lay");
  CHECK(after_outcome.count("lay:task:" + id + ":outcome") == 1);
  CHECK(after_outcome.count("lay:task:" + id + ":claim") == 0);

  REQUIRE(broker.fetch_outcome(envelope.task_id, now_utc()).has_value());
  CHECK(keys_under(probe, "lay").count("lay:task:" + id + ":fetched") == 1);

  broker.delete_task(envelope.task_id);
  CHECK(keys_under(probe, "lay").empty());

  server.stop();
}

TEST_CASE("a password-protected store rejects unauthenticated brokers") {
  resp::RespServer server("127.0.0.1", 0, std::string("sesame"));
  server.start();
  resp::Target target;
  target.host = "127.0.0.1";
  target.port = static_cast<std::uint16_t>(server.port());

  RespBroker anonymous(target, "pw");
  CHECK_THROWS_AS(anonymous.enqueue(make_envelope()), BrokerError);

  target.password = "sesame";
  RespBroker authed(target, "pw");
  auto envelope = make_envelope();
  authed.enqueue(envelope);
  CHECK(authed.get_status(envelope.task_id) == TaskState::kQueued);

  server.stop();
}

TEST_CASE("an unreachable store surfaces BrokerUnavailable") {
  resp::Target target;
  target.host = "127.0.0.1";
  target.port = 1;  // nothing listens there
  RespBroker broker(target, "gone");
  CHECK_THROWS_AS(broker.enqueue(make_envelope()), BrokerUnavailable);
  CHECK_THROWS_AS(broker.scan_tasks(), BrokerUnavailable);
}

TEST_CASE("a store restart interrupts and later restores service") {
  auto server = std::make_unique<resp::RespServer>("127.0.0.1", 0);
  int port = server->start();
  resp::Target target;
  target.host = "127.0.0.1";
  target.port = static_cast<std::uint16_t>(port);
  RespBroker broker(target, "cut");

  auto envelope = make_envelope();
  broker.enqueue(envelope);

  server->stop();
  server.reset();
  CHECK_THROWS_AS(broker.get_status(envelope.task_id), BrokerUnavailable);

  // Same port, fresh store: the broker reconnects, the data is gone (the
  // bundled store is volatile; durability is the real deployment's concern).
  server = std::make_unique<resp::RespServer>("127.0.0.1", port);
  server->start();
  CHECK_THROWS_AS(broker.get_status(envelope.task_id), UnknownTask);
  broker.enqueue(envelope);
  CHECK(broker.get_status(envelope.task_id) == TaskState::kQueued);
  server->stop();
}

}  // namespace
