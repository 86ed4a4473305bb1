#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "polyrpc/value.hpp"

namespace polyrpc {

using Json = nlohmann::ordered_json;

struct WireNode;

struct WirePrimitive {
    std::variant<bool, std::int64_t, double, std::string> value;
};

struct WireNull {};

struct WireList {
    std::vector<WireNode> elements;
};

struct WireValue {
    std::string type_name;
    std::uint32_t node_index = 0;
    std::vector<std::pair<std::string, WireNode>> fields;  // deterministic per-type order
};

struct WireRef {
    RemoteReference ref;
};

struct WireBackRef {
    std::uint32_t node_index = 0;
};

/// One node of a serialized object graph. VALUE nodes carry pre-order
/// indices; BACKREF nodes alias an earlier VALUE node, which is how shared
/// substructure and cycles survive the wire.
struct WireNode {
    std::variant<WirePrimitive, WireNull, WireList, WireValue, WireRef, WireBackRef> node;

    Json to_json() const;
    std::string to_json_string() const;

    /// Throws MalformedWireTree on any structural violation.
    static WireNode from_json(const Json& j);
    static WireNode from_json_string(const std::string& text);
};

Json reference_to_json(const RemoteReference& ref);
RemoteReference reference_from_json(const Json& j);

}  // namespace polyrpc
