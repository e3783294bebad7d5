// Copyright 2026 the esg authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace esg {

// All wall-clock instants are UTC with millisecond precision. The wire form
// is RFC 3339 with a trailing 'Z': 2026-01-02T03:04:05.678Z
using TimePoint = std::chrono::time_point<std::chrono::system_clock, std::chrono::milliseconds>;
using Duration = std::chrono::milliseconds;

TimePoint now_utc();

std::string format_rfc3339(TimePoint tp);

// Accepts 'Z' or a numeric offset, with or without fractional seconds.
// Sub-millisecond digits are truncated.
std::optional<TimePoint> parse_rfc3339(std::string_view text);

}  // namespace esg
