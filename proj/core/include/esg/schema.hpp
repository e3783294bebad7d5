// Copyright 2026 the esg authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "esg/json.hpp"

namespace esg::schema {

enum class NodeKind { kObject, kArray, kString, kNumber, kInteger, kBoolean, kEnum };

enum class StringFormat { kNone, kDateTime };

// Extra-structural constraints carried by built-in building blocks. These are
// checked by validate() but have no JSON-Schema equivalent.
enum class ArrayConstraint {
  kNone,
  // Items are objects with a "time" member; times strictly increasing.
  kStrictlyIncreasingTimeField,
  // Items are date-time strings; values strictly increasing.
  kStrictlyIncreasingInstants,
};

// Structural description of a JSON value. Immutable once handed to a
// ServiceSpec; the fluent setters return *this for declaration-site chaining.
class Node {
 public:
  NodeKind kind() const { return kind_; }

  Node& description(std::string text) {
    description_ = std::move(text);
    return *this;
  }
  Node& example(Json value) {
    example_ = std::move(value);
    return *this;
  }
  Node& minimum(double v) {
    minimum_ = v;
    return *this;
  }
  Node& maximum(double v) {
    maximum_ = v;
    return *this;
  }
  Node& pattern(std::string regex) {
    pattern_ = std::move(regex);
    return *this;
  }
  Node& min_items(std::size_t n) {
    min_items_ = n;
    return *this;
  }
  Node& max_items(std::size_t n) {
    max_items_ = n;
    return *this;
  }
  // Permit JSON null in place of the declared type.
  Node& nullable() {
    nullable_ = true;
    return *this;
  }
  Node& constraint(ArrayConstraint c) {
    constraint_ = c;
    return *this;
  }

  const std::optional<std::string>& get_description() const { return description_; }
  const std::optional<Json>& get_example() const { return example_; }
  const std::optional<double>& get_minimum() const { return minimum_; }
  const std::optional<double>& get_maximum() const { return maximum_; }
  const std::optional<std::string>& get_pattern() const { return pattern_; }
  const std::optional<std::size_t>& get_min_items() const { return min_items_; }
  const std::optional<std::size_t>& get_max_items() const { return max_items_; }
  bool is_nullable() const { return nullable_; }
  ArrayConstraint get_constraint() const { return constraint_; }
  StringFormat format() const { return format_; }
  const std::vector<std::pair<std::string, Node>>& fields() const { return fields_; }
  const std::vector<std::string>& required() const { return required_; }
  const Node* item() const { return item_.get(); }
  const std::vector<std::string>& enum_values() const { return enum_values_; }

  // Throws SpecInvalid on violated invariants (required names not subset of
  // fields, empty or duplicated enum values, minimum > maximum, example not
  // validating against the node itself).
  void check_valid() const;

 private:
  friend Node object(std::vector<std::pair<std::string, Node>> fields,
                     std::vector<std::string> required);
  friend Node array(Node item);
  friend Node string();
  friend Node date_time();
  friend Node number();
  friend Node integer();
  friend Node boolean();
  friend Node enumeration(std::vector<std::string> values);

  NodeKind kind_ = NodeKind::kObject;
  StringFormat format_ = StringFormat::kNone;
  std::vector<std::pair<std::string, Node>> fields_;  // kObject, declaration order
  std::vector<std::string> required_;                 // kObject
  std::shared_ptr<const Node> item_;                  // kArray
  std::vector<std::string> enum_values_;              // kEnum
  std::optional<std::string> description_;
  std::optional<Json> example_;
  std::optional<double> minimum_, maximum_;
  std::optional<std::string> pattern_;
  std::optional<std::size_t> min_items_, max_items_;
  bool nullable_ = false;
  ArrayConstraint constraint_ = ArrayConstraint::kNone;
};

// Builders. Objects are closed-world: fields not declared here are rejected.
Node object(std::vector<std::pair<std::string, Node>> fields, std::vector<std::string> required);
Node array(Node item);
Node string();
Node date_time();  // string with RFC 3339 date-time semantics
Node number();
Node integer();
Node boolean();
Node enumeration(std::vector<std::string> values);

struct ValidationError {
  std::string path;  // JSON pointer: "/latitude", "/1/time"
  std::string message;
};

// Exhaustive error collection, capped so hostile payloads cannot inflate the
// response.
inline constexpr std::size_t kMaxValidationErrors = 100;

struct ValidationResult {
  std::vector<ValidationError> errors;
  bool ok() const { return errors.empty(); }
};

// Total over all JSON inputs: never throws for any payload.
ValidationResult validate(const Node& schema, const Json& payload);

// Deterministic JSON-Schema (2020-12) fragment for the node. Constraints that
// JSON Schema cannot express (time monotonicity) are dropped here and noted in
// the description instead.
Json translate_node(const Node& node);

// Built-in building blocks.
Node geographic_position();
Node value_message_list();

}  // namespace esg::schema
