// Copyright 2026 the esg authors
// SPDX-License-Identifier: Apache-2.0

#include "esg/service.hpp"

namespace esg {

const schema::Node* ServiceSpec::input_schema(const VersionTag& version, EndpointKind kind) const {
  const VersionedEndpoints* endpoints = find(version);
  if (!endpoints) {
    return nullptr;
  }
  if (kind == EndpointKind::kRequest) {
    return &endpoints->request_input;
  }
  return endpoints->fit_input ? &*endpoints->fit_input : nullptr;
}

const schema::Node* ServiceSpec::output_schema(const VersionTag& version, EndpointKind kind) const {
  const VersionedEndpoints* endpoints = find(version);
  if (!endpoints) {
    return nullptr;
  }
  if (kind == EndpointKind::kRequest) {
    return &endpoints->request_output;
  }
  return endpoints->fit_output ? &*endpoints->fit_output : nullptr;
}

const Handler* ServiceSpec::handler(const VersionTag& version, EndpointKind kind) const {
  const VersionedEndpoints* endpoints = find(version);
  if (!endpoints) {
    return nullptr;
  }
  if (kind == EndpointKind::kRequest) {
    return &endpoints->request_handler;
  }
  return endpoints->fit_handler ? &endpoints->fit_handler : nullptr;
}

void ServiceSpec::check_valid() const {
  if (name_.empty()) {
    throw SpecInvalid("service name empty");
  }
  if (versions_.empty()) {
    throw SpecInvalid("service declares no versions");
  }
  for (const auto& [tag, endpoints] : versions_) {
    const std::string where = name_ + " " + tag.to_string();
    if (!endpoints.request_handler) {
      throw SpecInvalid(where + ": request handler missing");
    }
    endpoints.request_input.check_valid();
    endpoints.request_output.check_valid();
    const bool has_in = endpoints.fit_input.has_value();
    const bool has_out = endpoints.fit_output.has_value();
    const bool has_handler = static_cast<bool>(endpoints.fit_handler);
    if (has_in != has_out || has_in != has_handler) {
      throw SpecInvalid(where + ": fit support must be all-or-none");
    }
    if (has_in) {
      endpoints.fit_input->check_valid();
      endpoints.fit_output->check_valid();
    }
  }
}

}  // namespace esg
