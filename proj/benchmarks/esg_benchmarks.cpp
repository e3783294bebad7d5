// Copyright 2026 the esg authors
// SPDX-License-Identifier: Apache-2.0

// Hot-path microbenchmarks: payload validation, document emission, broker
// task lifecycle (both stores), and the PV fit. Run via ./esg-benchmarks.
#include <benchmark/benchmark.h>

#include <chrono>
#include <memory>
#include <string>
#include <vector>

#include "esg/broker.hpp"
#include "esg/memory_broker.hpp"
#include "esg/openapi.hpp"
#include "esg/pv.hpp"
#include "esg/resp_broker.hpp"
#include "esg/resp_server.hpp"
#include "esg/schema.hpp"
#include "esg/time.hpp"
#include "esg/types.hpp"

namespace {

using namespace esg;

std::string stamp_at(int minutes) {
  auto base = *parse_rfc3339("2026-06-21T06:00:00Z");
  return format_rfc3339(base + std::chrono::minutes(minutes));
}

Json request_payload(int times) {
  Json list = Json::array();
  for (int i = 0; i < times; ++i) list.push_back(stamp_at(i));
  return Json{{"position", Json{{"latitude", 49.0}, {"longitude", 8.4}}},
              {"sunrise", "2026-06-21T06:00:00Z"},
              {"sunset", "2026-06-21T18:00:00Z"},
              {"parameters", Json{{"peak_power_kw", 2.5}}},
              {"times", list}};
}

void BM_ValidateAccept(benchmark::State& state) {
  auto schema = pv::request_input_schema();
  auto payload = request_payload(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto result = schema::validate(schema, payload);
    benchmark::DoNotOptimize(result.ok());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ValidateAccept)->Range(1, 1024);

void BM_ValidateReject(benchmark::State& state) {
  auto schema = pv::request_input_schema();
  auto payload = request_payload(static_cast<int>(state.range(0)));
  payload["position"]["latitude"] = 90.5;
  payload["times"][0] = "not a time";
  for (auto _ : state) {
    auto result = schema::validate(schema, payload);
    benchmark::DoNotOptimize(result.errors.size());
  }
}
BENCHMARK(BM_ValidateReject)->Range(1, 1024);

void BM_EmitOpenApi(benchmark::State& state) {
  auto spec = pv::make_pv_service();
  for (auto _ : state) {
    auto doc = emit_openapi(spec, true);
    benchmark::DoNotOptimize(doc.size());
  }
}
BENCHMARK(BM_EmitOpenApi);

void BM_Rfc3339Parse(benchmark::State& state) {
  const std::string text = "2026-06-21T12:34:56.789Z";
  for (auto _ : state) {
    auto t = parse_rfc3339(text);
    benchmark::DoNotOptimize(t.has_value());
  }
}
BENCHMARK(BM_Rfc3339Parse);

void BM_Rfc3339Format(benchmark::State& state) {
  auto t = *parse_rfc3339("2026-06-21T12:34:56.789Z");
  for (auto _ : state) {
    auto text = format_rfc3339(t);
    benchmark::DoNotOptimize(text.size());
  }
}
BENCHMARK(BM_Rfc3339Format);

void BM_FitPeakPower(benchmark::State& state) {
  auto sunrise = *parse_rfc3339("2026-06-21T06:00:00Z");
  auto sunset = *parse_rfc3339("2026-06-21T18:00:00Z");
  pv::TimeSeries series;
  int n = static_cast<int>(state.range(0));
  for (int i = 0; i < n; ++i) {
    auto t = sunrise + std::chrono::seconds(i * 43'200 / n);
    series.push_back({t, 2.5 * pv::shape_value(t, sunrise, sunset)});
  }
  for (auto _ : state) {
    auto fit = pv::fit_peak_power(series, sunrise, sunset);
    benchmark::DoNotOptimize(fit.peak_power_kw);
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_FitPeakPower)->Range(8, 4096);

// One full task lifecycle per iteration: enqueue, claim, publish, fetch,
// delete. Measures the broker, not the handler.
void lifecycle_once(Broker& broker, const VersionTag& v1) {
  TaskEnvelope envelope;
  envelope.task_id = TaskId::generate();
  envelope.version = v1;
  envelope.input_payload = Json{{"op", "echo"}};
  envelope.created_at = now_utc();
  broker.enqueue(envelope);
  auto claimed = broker.claim(v1, EndpointKind::kRequest, "bench", Duration{60'000}, Duration{0});
  broker.put_outcome(TaskOutcome::success(claimed->task_id, Json{{"echo", "x"}}, now_utc()));
  auto outcome = broker.fetch_outcome(claimed->task_id, now_utc());
  benchmark::DoNotOptimize(outcome->verdict);
  broker.delete_task(claimed->task_id);
}

void BM_MemoryBrokerLifecycle(benchmark::State& state) {
  auto v1 = *VersionTag::parse("v1");
  MemoryBroker broker(MemoryBackend::create());
  for (auto _ : state) lifecycle_once(broker, v1);
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_MemoryBrokerLifecycle);

void BM_RespBrokerLifecycle(benchmark::State& state) {
  auto v1 = *VersionTag::parse("v1");
  resp::RespServer server;
  resp::Target target;
  target.port = static_cast<std::uint16_t>(server.start());
  RespBroker broker(target, "bench");
  for (auto _ : state) lifecycle_once(broker, v1);
  state.SetItemsProcessed(state.iterations());
  server.stop();
}
BENCHMARK(BM_RespBrokerLifecycle);

}  // namespace

BENCHMARK_MAIN();
