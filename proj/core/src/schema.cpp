// Copyright 2026 the esg authors
// SPDX-License-Identifier: Apache-2.0

#include "esg/schema.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <regex>
#include <set>

#include "esg/errors.hpp"
#include "esg/time.hpp"

namespace esg::schema {

namespace {

// RFC 6901 escaping for one pointer segment.
std::string escape_pointer_segment(const std::string& name) {
  std::string out;
  out.reserve(name.size());
  for (char c : name) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out += c;
    }
  }
  return out;
}

// Bounds print without a trailing ".0" when whole: "maximum 90 exceeded".
std::string format_bound(double v) {
  if (std::isfinite(v) && v == std::trunc(v) && std::abs(v) < 1e15) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(v));
    return buf;
  }
  return Json(v).dump();
}

Json bound_to_json(double v) {
  if (std::isfinite(v) && v == std::trunc(v) && std::abs(v) < 1e15) {
    return Json(static_cast<std::int64_t>(v));
  }
  return Json(v);
}

class Collector {
 public:
  explicit Collector(ValidationResult& result) : result_(result) {}

  bool full() const { return result_.errors.size() >= kMaxValidationErrors; }

  void add(const std::string& path, std::string message) {
    if (!full()) {
      result_.errors.push_back({path, std::move(message)});
    }
  }

 private:
  ValidationResult& result_;
};

bool is_integral_number(const Json& payload) {
  if (payload.is_number_integer() || payload.is_number_unsigned()) {
    return true;
  }
  if (payload.is_number_float()) {
    double v = payload.get<double>();
    return std::isfinite(v) && v == std::trunc(v);
  }
  return false;
}

void check_bounds(const Node& node, double value, const std::string& path, Collector& out) {
  if (node.get_minimum() && value < *node.get_minimum()) {
    out.add(path, "minimum " + format_bound(*node.get_minimum()) + " violated");
  }
  if (node.get_maximum() && value > *node.get_maximum()) {
    out.add(path, "maximum " + format_bound(*node.get_maximum()) + " exceeded");
  }
}

void validate_node(const Node& node, const Json& payload, std::string& path, Collector& out);

// Monotonicity checks run after per-item validation so unparseable entries are
// reported once, as item errors, not twice.
void check_array_order(const Node& node, const Json& payload, std::string& path, Collector& out) {
  std::optional<TimePoint> previous;
  for (std::size_t i = 0; i < payload.size(); ++i) {
    const Json* slot = nullptr;
    std::string suffix;
    if (node.get_constraint() == ArrayConstraint::kStrictlyIncreasingTimeField) {
      const Json& item = payload[i];
      if (!item.is_object() || !item.contains("time") || !item["time"].is_string()) {
        continue;
      }
      slot = &item["time"];
      suffix = "/time";
    } else {
      if (!payload[i].is_string()) {
        continue;
      }
      slot = &payload[i];
    }
    auto parsed = parse_rfc3339(slot->get<std::string>());
    if (!parsed) {
      continue;
    }
    if (previous && !(*parsed > *previous)) {
      out.add(path + "/" + std::to_string(i) + suffix, "time not strictly increasing");
    }
    previous = *parsed;
  }
}

void validate_object(const Node& node, const Json& payload, std::string& path, Collector& out) {
  if (!payload.is_object()) {
    out.add(path, "expected object");
    return;
  }
  for (const auto& name : node.required()) {
    if (!payload.contains(name)) {
      out.add(path + "/" + escape_pointer_segment(name), "required field missing");
    }
  }
  for (const auto& [key, value] : payload.items()) {
    if (out.full()) {
      return;
    }
    auto it = std::find_if(node.fields().begin(), node.fields().end(),
                           [&](const auto& field) { return field.first == key; });
    std::size_t mark = path.size();
    path += "/";
    path += escape_pointer_segment(key);
    if (it == node.fields().end()) {
      out.add(path, "unknown field");
    } else {
      validate_node(it->second, value, path, out);
    }
    path.resize(mark);
  }
}

void validate_array(const Node& node, const Json& payload, std::string& path, Collector& out) {
  if (!payload.is_array()) {
    out.add(path, "expected array");
    return;
  }
  if (node.get_min_items() && payload.size() < *node.get_min_items()) {
    out.add(path, "fewer than " + std::to_string(*node.get_min_items()) + " items");
  }
  if (node.get_max_items() && payload.size() > *node.get_max_items()) {
    out.add(path, "more than " + std::to_string(*node.get_max_items()) + " items");
  }
  for (std::size_t i = 0; i < payload.size(); ++i) {
    if (out.full()) {
      return;
    }
    std::size_t mark = path.size();
    path += "/";
    path += std::to_string(i);
    validate_node(*node.item(), payload[i], path, out);
    path.resize(mark);
  }
  if (node.get_constraint() != ArrayConstraint::kNone) {
    check_array_order(node, payload, path, out);
  }
}

void validate_string(const Node& node, const Json& payload, std::string& path, Collector& out) {
  if (!payload.is_string()) {
    out.add(path, "expected string");
    return;
  }
  const auto& text = payload.get_ref<const std::string&>();
  if (node.format() == StringFormat::kDateTime && !parse_rfc3339(text)) {
    out.add(path, "not a valid RFC 3339 date-time");
  }
  if (node.get_pattern()) {
    try {
      std::regex re(*node.get_pattern(), std::regex::ECMAScript);
      if (!std::regex_search(text, re)) {
        out.add(path, "does not match pattern " + *node.get_pattern());
      }
    } catch (const std::regex_error&) {
      out.add(path, "unusable pattern " + *node.get_pattern());
    }
  }
}

void validate_node(const Node& node, const Json& payload, std::string& path, Collector& out) {
  if (out.full()) {
    return;
  }
  if (payload.is_null() && node.is_nullable()) {
    return;
  }
  switch (node.kind()) {
    case NodeKind::kObject:
      validate_object(node, payload, path, out);
      return;
    case NodeKind::kArray:
      validate_array(node, payload, path, out);
      return;
    case NodeKind::kString:
      validate_string(node, payload, path, out);
      return;
    case NodeKind::kNumber: {
      if (!payload.is_number()) {
        out.add(path, "expected number");
        return;
      }
      double v = payload.get<double>();
      if (!std::isfinite(v)) {
        out.add(path, "number not finite");
        return;
      }
      check_bounds(node, v, path, out);
      return;
    }
    case NodeKind::kInteger: {
      if (!is_integral_number(payload)) {
        out.add(path, "expected integer");
        return;
      }
      check_bounds(node, payload.get<double>(), path, out);
      return;
    }
    case NodeKind::kBoolean:
      if (!payload.is_boolean()) {
        out.add(path, "expected boolean");
      }
      return;
    case NodeKind::kEnum: {
      if (!payload.is_string()) {
        out.add(path, "expected string");
        return;
      }
      const auto& text = payload.get_ref<const std::string&>();
      const auto& values = node.enum_values();
      if (std::find(values.begin(), values.end(), text) == values.end()) {
        out.add(path, "not one of the permitted values");
      }
      return;
    }
  }
}

}  // namespace

Node object(std::vector<std::pair<std::string, Node>> fields, std::vector<std::string> required) {
  Node n;
  n.kind_ = NodeKind::kObject;
  n.fields_ = std::move(fields);
  n.required_ = std::move(required);
  return n;
}

Node array(Node item) {
  Node n;
  n.kind_ = NodeKind::kArray;
  n.item_ = std::make_shared<const Node>(std::move(item));
  return n;
}

Node string() {
  Node n;
  n.kind_ = NodeKind::kString;
  return n;
}

Node date_time() {
  Node n;
  n.kind_ = NodeKind::kString;
  n.format_ = StringFormat::kDateTime;
  return n;
}

Node number() {
  Node n;
  n.kind_ = NodeKind::kNumber;
  return n;
}

Node integer() {
  Node n;
  n.kind_ = NodeKind::kInteger;
  return n;
}

Node boolean() {
  Node n;
  n.kind_ = NodeKind::kBoolean;
  return n;
}

Node enumeration(std::vector<std::string> values) {
  Node n;
  n.kind_ = NodeKind::kEnum;
  n.enum_values_ = std::move(values);
  return n;
}

void Node::check_valid() const {
  switch (kind_) {
    case NodeKind::kObject: {
      std::set<std::string> names;
      for (const auto& [name, child] : fields_) {
        if (!names.insert(name).second) {
          throw SpecInvalid("duplicate field name: " + name);
        }
        child.check_valid();
      }
      for (const auto& name : required_) {
        if (!names.count(name)) {
          throw SpecInvalid("required name is not a field: " + name);
        }
      }
      break;
    }
    case NodeKind::kArray:
      if (!item_) {
        throw SpecInvalid("array node without item schema");
      }
      item_->check_valid();
      if (min_items_ && max_items_ && *min_items_ > *max_items_) {
        throw SpecInvalid("min_items greater than max_items");
      }
      break;
    case NodeKind::kEnum: {
      if (enum_values_.empty()) {
        throw SpecInvalid("enum with no values");
      }
      std::set<std::string> distinct(enum_values_.begin(), enum_values_.end());
      if (distinct.size() != enum_values_.size()) {
        throw SpecInvalid("enum values not distinct");
      }
      break;
    }
    default:
      break;
  }
  if (minimum_ && maximum_ && *minimum_ > *maximum_) {
    throw SpecInvalid("minimum greater than maximum");
  }
  if (pattern_) {
    try {
      std::regex re(*pattern_, std::regex::ECMAScript);
    } catch (const std::regex_error&) {
      throw SpecInvalid("pattern does not compile: " + *pattern_);
    }
  }
  if (example_) {
    auto result = validate(*this, *example_);
    if (!result.ok()) {
      throw SpecInvalid("example does not validate against its own node (first error at " +
                        result.errors.front().path + ": " + result.errors.front().message + ")");
    }
  }
}

ValidationResult validate(const Node& schema, const Json& payload) {
  ValidationResult result;
  Collector out(result);
  std::string path;
  validate_node(schema, payload, path, out);
  return result;
}

Json translate_node(const Node& node) {
  Json fragment = Json::object();
  const char* base = nullptr;
  switch (node.kind()) {
    case NodeKind::kObject:
      base = "object";
      break;
    case NodeKind::kArray:
      base = "array";
      break;
    case NodeKind::kString:
    case NodeKind::kEnum:
      base = "string";
      break;
    case NodeKind::kNumber:
      base = "number";
      break;
    case NodeKind::kInteger:
      base = "integer";
      break;
    case NodeKind::kBoolean:
      base = "boolean";
      break;
  }
  if (node.is_nullable()) {
    fragment["type"] = Json::array({base, "null"});
  } else {
    fragment["type"] = base;
  }
  switch (node.kind()) {
    case NodeKind::kObject: {
      Json properties = Json::object();
      for (const auto& [name, child] : node.fields()) {
        properties[name] = translate_node(child);
      }
      fragment["properties"] = std::move(properties);
      if (!node.required().empty()) {
        fragment["required"] = node.required();
      }
      fragment["additionalProperties"] = false;
      break;
    }
    case NodeKind::kArray:
      fragment["items"] = translate_node(*node.item());
      if (node.get_min_items()) {
        fragment["minItems"] = *node.get_min_items();
      }
      if (node.get_max_items()) {
        fragment["maxItems"] = *node.get_max_items();
      }
      break;
    case NodeKind::kString:
      if (node.format() == StringFormat::kDateTime) {
        fragment["format"] = "date-time";
      }
      if (node.get_pattern()) {
        fragment["pattern"] = *node.get_pattern();
      }
      break;
    case NodeKind::kNumber:
    case NodeKind::kInteger:
      if (node.get_minimum()) {
        fragment["minimum"] = bound_to_json(*node.get_minimum());
      }
      if (node.get_maximum()) {
        fragment["maximum"] = bound_to_json(*node.get_maximum());
      }
      break;
    case NodeKind::kEnum: {
      Json values = Json::array();
      for (const auto& v : node.enum_values()) {
        values.push_back(v);
      }
      if (node.is_nullable()) {
        values.push_back(nullptr);
      }
      fragment["enum"] = std::move(values);
      break;
    }
    case NodeKind::kBoolean:
      break;
  }
  // Ordering constraints have no JSON-Schema encoding; surface them in prose.
  std::string description = node.get_description().value_or("");
  if (node.get_constraint() != ArrayConstraint::kNone) {
    if (!description.empty() && description.back() != ' ') {
      description += " ";
    }
    description += "Times must be strictly increasing.";
  }
  if (!description.empty()) {
    fragment["description"] = description;
  }
  if (node.get_example()) {
    fragment["examples"] = Json::array({*node.get_example()});
  }
  return fragment;
}

Node geographic_position() {
  return object(
             {
                 {"latitude", number().minimum(-90).maximum(90).description(
                                  "Latitude in degrees north of the equator.")},
                 {"longitude", number().minimum(-180).maximum(180).description(
                                   "Longitude in degrees east of the prime meridian.")},
             },
             {"latitude", "longitude"})
      .description("Geographic position in WGS 84 degrees.")
      .example(Json{{"latitude", 49.0}, {"longitude", 8.4}});
}

Node value_message_list() {
  return array(object(
                   {
                       {"time", date_time().description("Instant the value refers to.")},
                       {"value", number().nullable().description(
                                     "Value at that instant; null marks a gap.")},
                   },
                   {"time", "value"}))
      .constraint(ArrayConstraint::kStrictlyIncreasingTimeField)
      .description("Time series as time/value points.")
      .example(Json::array({
          Json{{"time", "2026-01-01T08:00:00.000Z"}, {"value", 0.0}},
          Json{{"time", "2026-01-01T09:00:00.000Z"}, {"value", 1.25}},
      }));
}

}  // namespace esg::schema
