// Copyright 2026 the esg authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>
#include <string_view>

#include "esg/json.hpp"

namespace esg::log {

// Line-oriented JSON on standard output:
//   {"ts":"2026-01-01T12:00:00.000Z","level":"info","event":"...", ...fields}
void write(std::string_view level, std::string_view event, Json fields = Json::object());

void info(std::string_view event, Json fields = Json::object());
void warn(std::string_view event, Json fields = Json::object());
void error(std::string_view event, Json fields = Json::object());

// Redirects whole lines somewhere else (tests); pass nullptr to restore
// standard output.
void set_sink(std::function<void(const std::string&)> sink);

}  // namespace esg::log
