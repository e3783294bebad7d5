// Copyright 2026 the esg authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <json.hpp>

namespace esg {

// Insertion-ordered JSON everywhere: payloads round-trip in the order the
// caller wrote them and emitted documents are byte-stable across runs.
using Json = nlohmann::ordered_json;

}  // namespace esg
