#include <doctest.h>

#include <atomic>

#include "esg/broker.hpp"

namespace {

using namespace esg;

TEST_CASE("delays grow exponentially within jitter bands") {
  BackoffPolicy policy;
  policy.base = Duration{100};
  policy.factor = 2.0;
  policy.cap = Duration{10'000};
  policy.jitter = 0.2;

  auto in_band = [](Duration d, double nominal) {
    return d.count() >= nominal * 0.8 - 1 && d.count() <= nominal * 1.2 + 1;
  };
  for (int repeat = 0; repeat < 50; ++repeat) {
    CHECK(in_band(policy.delay(0), 100));
    CHECK(in_band(policy.delay(1), 200));
    CHECK(in_band(policy.delay(2), 400));
    CHECK(in_band(policy.delay(5), 3200));
  }
}

TEST_CASE("the cap bounds every delay") {
  BackoffPolicy policy;
  policy.base = Duration{100};
  policy.factor = 2.0;
  policy.cap = Duration{10'000};
  policy.jitter = 0.2;
  // Attempt 20 would nominally be 100 * 2^20 ms; the cap wins, and jitter
  // applies to the capped value.
  for (int repeat = 0; repeat < 50; ++repeat) {
    auto d = policy.delay(20);
    CHECK(d.count() <= 12'000);
    CHECK(d.count() >= 8'000);
  }
  // Deep exponents must not overflow into negative delays.
  CHECK(policy.delay(200).count() >= 0);
}

TEST_CASE("zero jitter gives deterministic delays") {
  BackoffPolicy policy;
  policy.base = Duration{100};
  policy.factor = 2.0;
  policy.cap = Duration{10'000};
  policy.jitter = 0.0;
  CHECK(policy.delay(0) == Duration{100});
  CHECK(policy.delay(1) == Duration{200});
  CHECK(policy.delay(3) == Duration{800});
  CHECK(policy.delay(20) == Duration{10'000});
}

TEST_CASE("with_backoff retries only broker unavailability") {
  BackoffPolicy fast;
  fast.base = Duration{1};
  fast.cap = Duration{2};
  fast.jitter = 0.0;

  SUBCASE("a transient outage is retried to success") {
    int calls = 0;
    with_backoff(fast, 5, [&] {
      if (++calls < 3) throw BrokerUnavailable("down");
    });
    CHECK(calls == 3);
  }
  SUBCASE("exhausting the budget rethrows the last error") {
    int calls = 0;
    CHECK_THROWS_AS(with_backoff(fast, 4,
                                 [&] {
                                   ++calls;
                                   throw BrokerUnavailable("still down");
                                 }),
                    BrokerUnavailable);
    CHECK(calls == 4);
  }
  SUBCASE("other errors pass through on the first attempt") {
    int calls = 0;
    CHECK_THROWS_AS(with_backoff(fast, 5,
                                 [&] {
                                   ++calls;
                                   throw UnknownTask("nope");
                                 }),
                    UnknownTask);
    CHECK(calls == 1);
  }
  SUBCASE("success on the first attempt calls once") {
    int calls = 0;
    with_backoff(fast, 5, [&] { ++calls; });
    CHECK(calls == 1);
  }
}

}  // namespace
