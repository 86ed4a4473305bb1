#pragma once

#include <string>

#include "polyrpc/policy.hpp"
#include "polyrpc/wire.hpp"

namespace polyrpc {

/// Declarative rule file: a UTF-8 JSON array of
///   {"kind": "class"|"method"|"param", "class": ..., "method": ...,
///    "param": ..., "mechanism": ..., "overridable": ..., "depth": ...}
/// plus optional {"kind": "default", "mechanism": ...} entries. `depth` is
/// a non-negative integer or absent/"unbounded". Mechanism names are
/// registered on load. Returns the number of rules applied.
std::size_t load_rules(const Json& doc, PolicyStore& store);
std::size_t load_rules_file(const std::string& path, PolicyStore& store);

}  // namespace polyrpc
