#include <doctest.h>

#include <atomic>

#include "esg/memory_broker.hpp"
#include "esg/resp_broker.hpp"
#include "esg/resp_server.hpp"
#include "support/broker_contract.hpp"

namespace {

using namespace esg;
using namespace esg::testing;

resp::RespServer& shared_store() {
  static resp::RespServer server("127.0.0.1", 0);
  static int port = server.start();
  (void)port;
  return server;
}

BrokerFactory memory_factory() {
  return [] { return std::make_shared<MemoryBroker>(MemoryBackend::create()); };
}

// Every factory call gets its own key namespace, the moral equivalent of a
// fresh database.
BrokerFactory resp_factory() {
  return [] {
    static std::atomic<int> counter{0};
    resp::Target target;
    target.host = "127.0.0.1";
    target.port = static_cast<std::uint16_t>(shared_store().port());
    return std::make_shared<RespBroker>(target, "t" + std::to_string(counter++));
  };
}

TEST_CASE("memory broker satisfies the contract") {
  broker_contract_suite(memory_factory());
}

TEST_CASE("memory broker delivers exactly once under contention") {
  broker_claim_race(memory_factory(), 200, 8);
}

TEST_CASE("resp broker satisfies the contract") {
  broker_contract_suite(resp_factory());
}

TEST_CASE("resp broker delivers exactly once under contention") {
  broker_claim_race(resp_factory(), 200, 8);
}

}  // namespace
