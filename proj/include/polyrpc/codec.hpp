#pragma once

#include <functional>

#include "polyrpc/policy.hpp"
#include "polyrpc/wire.hpp"

namespace polyrpc {

/// Identifies the enclosing call an argument/return graph belongs to; the
/// per-node CallSite is derived from it plus each node's class and depth.
struct EncodeSite {
    std::string call_class;
    std::string method;
    Role role = Role::Argument;
    std::optional<int> param_index;
};

using PolicyFn = std::function<PolicyMechanism(const CallSite&)>;
using ExportFn = std::function<RemoteReference(const EncodablePtr&)>;
using RefResolver = std::function<Value(const RemoteReference&)>;

/// Serializes an object graph, consulting `decide` once per object node.
/// BY_REFERENCE exports the node and stops recursion beneath it; BY_VALUE
/// inlines the node's fields at depth+1. Lists are transparent: they do not
/// consume a depth level. Objects already emitted by value become BACKREFs.
WireNode encode(const Value& root, const EncodeSite& site, const PolicyFn& decide,
                const ExportFn& export_object);

/// Rebuilds a value from the wire, whatever policy produced it. REFERENCE
/// nodes go through `resolve_reference` (proxy creation or local
/// shortcutting); VALUE nodes instantiate via the type registry two-phase so
/// BACKREFs inside a node's own closure land on the final instance.
Value decode(const WireNode& node, const RefResolver& resolve_reference,
             const TypeRegistry& types);

}  // namespace polyrpc
