// Copyright 2026 the esg authors
// SPDX-License-Identifier: Apache-2.0

#include "esg/logging.hpp"

#include <cstdio>
#include <mutex>
#include <utility>

#include "esg/time.hpp"

namespace esg::log {

namespace {

std::mutex sink_mutex;
std::function<void(const std::string&)> custom_sink;

}  // namespace

void write(std::string_view level, std::string_view event, Json fields) {
  Json line = Json::object();
  line["ts"] = format_rfc3339(now_utc());
  line["level"] = std::string(level);
  line["event"] = std::string(event);
  if (fields.is_object()) {
    for (auto& [key, value] : fields.items()) {
      line[key] = std::move(value);
    }
  }
  const std::string text = line.dump();
  std::lock_guard<std::mutex> lock(sink_mutex);
  if (custom_sink) {
    custom_sink(text);
  } else {
    std::fputs(text.c_str(), stdout);
    std::fputc('\n', stdout);
    std::fflush(stdout);
  }
}

void info(std::string_view event, Json fields) { write("info", event, std::move(fields)); }
void warn(std::string_view event, Json fields) { write("warn", event, std::move(fields)); }
void error(std::string_view event, Json fields) { write("error", event, std::move(fields)); }

void set_sink(std::function<void(const std::string&)> sink) {
  std::lock_guard<std::mutex> lock(sink_mutex);
  custom_sink = std::move(sink);
}

}  // namespace esg::log
