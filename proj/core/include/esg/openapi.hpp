// Copyright 2026 the esg authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>

#include "esg/json.hpp"
#include "esg/service.hpp"
#include "esg/types.hpp"

namespace esg {

// Builds the OpenAPI 3.1 document for a service: per version the three
// request paths, the three fit-parameters paths when fitting is supported,
// and the document's own path. Deterministic: identical input yields a
// byte-identical document. Pass `only_version` to restrict the document to
// one version (the per-version openapi.json endpoint serves that form).
//
// Throws SpecInvalid when the ServiceSpec violates its invariants or when
// only_version names an unknown version.
Json emit_openapi(const ServiceSpec& spec, bool auth_enabled,
                  std::optional<VersionTag> only_version = std::nullopt);

}  // namespace esg
