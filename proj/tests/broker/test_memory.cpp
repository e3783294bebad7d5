#include <doctest.h>

#include "esg/memory_broker.hpp"
#include "support/broker_contract.hpp"

namespace {

using namespace esg;
using namespace esg::testing;

TEST_CASE("handles over one backend see each other's writes") {
  auto backend = MemoryBackend::create();
  MemoryBroker submitter(backend);
  MemoryBroker worker(backend);

  auto envelope = make_envelope();
  submitter.enqueue(envelope);
  auto claimed = worker.claim(envelope.version, envelope.kind, "w", Duration{60'000},
                              Duration{0});
  REQUIRE(claimed.has_value());
  CHECK(claimed->task_id == envelope.task_id);
  CHECK(submitter.get_status(envelope.task_id) == TaskState::kRunning);
}

TEST_CASE("named backends are process-global; distinct names are isolated") {
  auto a1 = MemoryBackend::named("test-shared");
  auto a2 = MemoryBackend::named("test-shared");
  auto b = MemoryBackend::named("test-other");
  CHECK(a1 == a2);
  CHECK(a1 != b);

  MemoryBroker writer(a1);
  MemoryBroker reader(a2);
  MemoryBroker stranger(b);
  auto envelope = make_envelope();
  writer.enqueue(envelope);
  CHECK(reader.get_status(envelope.task_id) == TaskState::kQueued);
  CHECK_THROWS_AS(stranger.get_status(envelope.task_id), UnknownTask);
}

TEST_CASE("an unavailable backend throws BrokerUnavailable until restored") {
  auto backend = MemoryBackend::create();
  MemoryBroker broker(backend);
  auto envelope = make_envelope();
  broker.enqueue(envelope);

  backend->set_unavailable(true);
  CHECK_THROWS_AS(broker.get_status(envelope.task_id), BrokerUnavailable);
  CHECK_THROWS_AS(broker.enqueue(make_envelope()), BrokerUnavailable);

  backend->set_unavailable(false);
  CHECK(broker.get_status(envelope.task_id) == TaskState::kQueued);
}

TEST_CASE("key count grows with live tasks and shrinks on delete") {
  auto backend = MemoryBackend::create();
  MemoryBroker broker(backend);
  auto baseline = broker.debug_key_count();

  std::vector<TaskId> ids;
  for (int i = 0; i < 10; ++i) {
    auto envelope = make_envelope();
    ids.push_back(envelope.task_id);
    broker.enqueue(envelope);
  }
  CHECK(broker.debug_key_count() > baseline);

  for (const auto& id : ids) broker.delete_task(id);
  CHECK(broker.debug_key_count() <= baseline + 1);
}

}  // namespace
