// Copyright 2026 the esg authors
// SPDX-License-Identifier: Apache-2.0

#include "esg/broker.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <random>
#include <thread>

#include "esg/errors.hpp"

namespace esg {

namespace {

double jitter_factor(double jitter) {
  static std::mt19937_64 rng{std::random_device{}()};
  static std::mutex mutex;
  std::uniform_real_distribution<double> spread(1.0 - jitter, 1.0 + jitter);
  std::lock_guard<std::mutex> lock(mutex);
  return spread(rng);
}

}  // namespace

Duration BackoffPolicy::delay(unsigned attempt) const {
  double scaled = static_cast<double>(base.count()) * std::pow(factor, attempt);
  scaled = std::min(scaled, static_cast<double>(cap.count()));
  scaled *= jitter_factor(jitter);
  scaled = std::min(scaled, static_cast<double>(cap.count()));
  return Duration{static_cast<Duration::rep>(std::llround(std::max(0.0, scaled)))};
}

void with_backoff(const BackoffPolicy& policy, unsigned max_attempts,
                  const std::function<void()>& action) {
  for (unsigned attempt = 0;; ++attempt) {
    try {
      action();
      return;
    } catch (const BrokerUnavailable&) {
      if (attempt + 1 >= max_attempts) {
        throw;
      }
      std::this_thread::sleep_for(policy.delay(attempt));
    }
  }
}

}  // namespace esg
