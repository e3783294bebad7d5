// Copyright 2026 the esg authors
// SPDX-License-Identifier: Apache-2.0

#include "esg/pv.hpp"

#include <cmath>
#include <utility>

namespace esg::pv {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

TimePoint parse_instant(const Json& value) {
  auto parsed = parse_rfc3339(value.get<std::string>());
  if (!parsed) throw HandlerFailure("unparseable timestamp: " + value.get<std::string>());
  return *parsed;
}

// Schema validation has already run; this guards the one cross-field rule a
// schema cannot express.
std::pair<TimePoint, TimePoint> daylight_window(const Json& input) {
  auto sunrise = parse_instant(input.at("sunrise"));
  auto sunset = parse_instant(input.at("sunset"));
  if (sunset <= sunrise) throw HandlerFailure("sunset must be after sunrise");
  return {sunrise, sunset};
}

Json fit_handler(const Json& input, const ProgressSink&) {
  auto [sunrise, sunset] = daylight_window(input);
  TimeSeries measurements;
  for (const auto& item : input.at("measurements")) {
    ValuePoint point;
    point.time = parse_instant(item.at("time"));
    if (!item.at("value").is_null()) point.value = item.at("value").get<double>();
    measurements.push_back(point);
  }
  FitResult fit;
  try {
    fit = fit_peak_power(measurements, sunrise, sunset);
  } catch (const DegenerateFit&) {
    throw HandlerFailure("all measurements outside daylight window");
  }
  return Json{{"parameters", Json{{"peak_power_kw", fit.peak_power_kw}}},
              {"residual_rms_kw", fit.residual_rms_kw}};
}

Json request_handler(const Json& input, const ProgressSink&) {
  auto [sunrise, sunset] = daylight_window(input);
  double peak = input.at("parameters").at("peak_power_kw").get<double>();
  std::vector<TimePoint> times;
  for (const auto& item : input.at("times")) times.push_back(parse_instant(item));

  auto series = forecast(peak, sunrise, sunset, times);

  Json points = Json::array();
  for (const auto& point : series) {
    points.push_back(Json{{"time", format_rfc3339(point.time)}, {"value", *point.value}});
  }
  return Json{{"forecast", std::move(points)}};
}

}  // namespace

double shape_value(TimePoint t, TimePoint sunrise, TimePoint sunset) {
  if (sunset <= sunrise) throw SpecInvalid("sunset must be after sunrise");
  auto span = std::chrono::duration<double>(sunset - sunrise).count();
  auto offset = std::chrono::duration<double>(t - sunrise).count();
  double u = offset / span;
  // Endpoints return exactly 0; sin(pi) under floating point would not.
  if (u <= 0.0 || u >= 1.0) return 0.0;
  return std::sin(kPi * u);
}

FitResult fit_peak_power(const TimeSeries& measurements, TimePoint sunrise, TimePoint sunset) {
  struct Usable {
    double m, s;
  };
  std::vector<Usable> usable;
  double numerator = 0.0;
  double denominator = 0.0;
  for (const auto& point : measurements) {
    if (!point.value) continue;
    double s = shape_value(point.time, sunrise, sunset);
    usable.push_back({*point.value, s});
    numerator += *point.value * s;
    denominator += s * s;
  }
  if (usable.empty() || denominator == 0.0) {
    throw DegenerateFit("no usable measurement inside the daylight window");
  }
  double peak = numerator / denominator;
  if (peak < 0.0) peak = 0.0;
  double sse = 0.0;
  for (const auto& u : usable) {
    double r = u.m - peak * u.s;
    sse += r * r;
  }
  return {peak, std::sqrt(sse / static_cast<double>(usable.size()))};
}

TimeSeries forecast(double peak_power_kw, TimePoint sunrise, TimePoint sunset,
                    const std::vector<TimePoint>& times) {
  if (peak_power_kw < 0.0) throw SpecInvalid("peak power must be non-negative");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i - 1] < times[i])) throw SpecInvalid("times must be strictly increasing");
  }
  TimeSeries out;
  out.reserve(times.size());
  for (auto t : times) out.push_back({t, peak_power_kw * shape_value(t, sunrise, sunset)});
  return out;
}

schema::Node pv_parameters_schema() {
  return schema::object(
             {{"peak_power_kw", schema::number()
                                    .minimum(0)
                                    .description("Peak generation capability in kilowatts.")
                                    .example(4.2)}},
             {"peak_power_kw"})
      .description("User-specific model parameters; fit them once, then pass "
                   "them with every forecast request.");
}

schema::Node fit_input_schema() {
  return schema::object(
             {{"position", schema::geographic_position()},
              {"sunrise", schema::date_time().description("Start of the daylight window (UTC).")},
              {"sunset", schema::date_time().description(
                             "End of the daylight window (UTC); must lie after sunrise.")},
              {"measurements",
               schema::value_message_list().min_items(1).description(
                   "Historic power measurements in kilowatts; null marks a gap.")}},
             {"position", "sunrise", "sunset", "measurements"})
      .description("Historic measurements plus the daylight window they were taken in.")
      .example(Json{{"position", Json{{"latitude", 49.0}, {"longitude", 8.4}}},
                    {"sunrise", "2026-06-21T04:30:00Z"},
                    {"sunset", "2026-06-21T20:30:00Z"},
                    {"measurements",
                     Json::array({Json{{"time", "2026-06-21T08:00:00Z"}, {"value", 2.1}},
                                  Json{{"time", "2026-06-21T12:30:00Z"}, {"value", 4.0}},
                                  Json{{"time", "2026-06-21T17:00:00Z"}, {"value", nullptr}}})}});
}

schema::Node fit_output_schema() {
  return schema::object(
             {{"parameters", pv_parameters_schema()},
              {"residual_rms_kw",
               schema::number().minimum(0).description(
                   "Root-mean-square misfit against the measurements, in kilowatts.")}},
             {"parameters", "residual_rms_kw"})
      .description("Fitted parameters. Persist them on the caller's side; the "
                   "service retains no copy once results are collected.")
      .example(Json{{"parameters", Json{{"peak_power_kw", 4.2}}}, {"residual_rms_kw", 0.31}});
}

schema::Node request_input_schema() {
  return schema::object(
             {{"position", schema::geographic_position()},
              {"sunrise", schema::date_time().description("Start of the daylight window (UTC).")},
              {"sunset", schema::date_time().description(
                             "End of the daylight window (UTC); must lie after sunrise.")},
              {"parameters", pv_parameters_schema()},
              {"times", schema::array(schema::date_time())
                            .min_items(1)
                            .constraint(schema::ArrayConstraint::kStrictlyIncreasingInstants)
                            .description("Forecast instants (UTC).")}},
             {"position", "sunrise", "sunset", "parameters", "times"})
      .description("Forecast request: the fitted parameters plus the instants to evaluate.")
      .example(Json{{"position", Json{{"latitude", 49.0}, {"longitude", 8.4}}},
                    {"sunrise", "2026-06-21T04:30:00Z"},
                    {"sunset", "2026-06-21T20:30:00Z"},
                    {"parameters", Json{{"peak_power_kw", 4.2}}},
                    {"times", Json::array({"2026-06-21T06:00:00Z", "2026-06-21T12:00:00Z",
                                           "2026-06-21T18:00:00Z"})}});
}

schema::Node request_output_schema() {
  return schema::object(
             {{"forecast", schema::value_message_list().description(
                               "Forecast power in kilowatts at the requested instants.")}},
             {"forecast"})
      .description("The forecast series; times mirror the requested instants.")
      .example(Json{{"forecast",
                     Json::array({Json{{"time", "2026-06-21T06:00:00Z"}, {"value", 0.48}},
                                  Json{{"time", "2026-06-21T12:00:00Z"}, {"value", 4.15}}})}});
}

ServiceSpec make_pv_service() {
  VersionedEndpoints v1;
  v1.request_input = request_input_schema();
  v1.request_output = request_output_schema();
  v1.request_handler = request_handler;
  v1.fit_input = fit_input_schema();
  v1.fit_output = fit_output_schema();
  v1.fit_handler = fit_handler;

  auto tag = VersionTag::parse("v1");
  std::map<VersionTag, VersionedEndpoints> versions;
  versions.emplace(*tag, std::move(v1));
  return ServiceSpec("pv-forecast", std::move(versions));
}

}  // namespace esg::pv
