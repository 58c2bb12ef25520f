#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

namespace toolbench {

// All structured values in the harness are JSON trees. nlohmann::json with
// the default std::map object backing keeps object keys sorted by code
// point, which is exactly the canonical key order.
using Json = nlohmann::json;

// Canonical byte form: sorted keys, no insignificant whitespace, shortest
// round-trip number rendering, UTF-8, LF between records in multi-record
// files (the caller joins lines).
std::string canonical_bytes(const Json& value);

Json parse_json(std::string_view bytes);

// SHA-256 digest of a byte string, lowercase hex.
std::string sha256_hex(std::string_view bytes);

}  // namespace toolbench
