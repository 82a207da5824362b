#pragma once

#include <json.hpp>

namespace kgmas {

/// Structured content shared by ACL messages, transport payloads and fixture
/// files. std::map-backed, so dump() emits keys sorted.
using Json = nlohmann::json;

/// Compact canonical text of a structured value.
inline std::string canonical(const Json& value) { return value.dump(); }

}  // namespace kgmas
