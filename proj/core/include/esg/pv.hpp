// Copyright 2026 the esg authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <vector>

#include "esg/service.hpp"
#include "esg/time.hpp"

namespace esg::pv {

// Ordered measurement or forecast series; null values mark gaps.
struct ValuePoint {
  TimePoint time{};
  std::optional<double> value;
};
using TimeSeries = std::vector<ValuePoint>;

// Half-sine clear-sky proxy: sin(pi * (t - sunrise) / (sunset - sunrise))
// inside the daylight window, exactly 0 outside and at both endpoints.
// Throws SpecInvalid unless sunset > sunrise.
double shape_value(TimePoint t, TimePoint sunrise, TimePoint sunset);

struct FitResult {
  double peak_power_kw = 0.0;   // clamped to >= 0
  double residual_rms_kw = 0.0;
};

// Least-squares scalar fit of peak power against the clear-sky shape,
// skipping null values. Throws DegenerateFit when no usable measurement
// falls inside the daylight window.
FitResult fit_peak_power(const TimeSeries& measurements, TimePoint sunrise, TimePoint sunset);

// forecast[i] = peak_power_kw * shape_value(times[i]); non-negative.
TimeSeries forecast(double peak_power_kw, TimePoint sunrise, TimePoint sunset,
                    const std::vector<TimePoint>& times);

// Payload schemas, exposed for tests and documentation tooling.
schema::Node pv_parameters_schema();
schema::Node fit_input_schema();
schema::Node fit_output_schema();
schema::Node request_input_schema();
schema::Node request_output_schema();

// The reference service: name "pv-forecast", version v1, fitting supported.
ServiceSpec make_pv_service();

}  // namespace esg::pv
