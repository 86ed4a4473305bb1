#include "polyrpc/wire.hpp"

namespace polyrpc {

namespace {

[[noreturn]] void malformed(const std::string& what) {
    throw Error(ErrorCode::MalformedWireTree, what);
}

const Json& need(const Json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) malformed(std::string("missing key '") + key + "'");
    return *it;
}

}  // namespace

Json reference_to_json(const RemoteReference& ref) {
    return Json{{"space", ref.space_id}, {"obj", ref.object_id}, {"t", ref.type_name}};
}

RemoteReference reference_from_json(const Json& j) {
    if (!j.is_object()) malformed("reference is not an object");
    return RemoteReference{need(j, "space").get<std::string>(),
                           need(j, "obj").get<std::uint64_t>(),
                           need(j, "t").get<std::string>()};
}

Json WireNode::to_json() const {
    return std::visit(
        [](const auto& n) -> Json {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, WirePrimitive>) {
                Json j{{"k", "prim"}};
                std::visit(
                    [&](const auto& v) {
                        using V = std::decay_t<decltype(v)>;
                        if constexpr (std::is_same_v<V, bool>) j["t"] = "bool";
                        else if constexpr (std::is_same_v<V, std::int64_t>) j["t"] = "int64";
                        else if constexpr (std::is_same_v<V, double>) j["t"] = "float64";
                        else j["t"] = "string";
                        j["v"] = v;
                    },
                    n.value);
                return j;
            } else if constexpr (std::is_same_v<T, WireNull>) {
                return Json{{"k", "null"}};
            } else if constexpr (std::is_same_v<T, WireList>) {
                Json elems = Json::array();
                for (const auto& e : n.elements) elems.push_back(e.to_json());
                return Json{{"k", "list"}, {"v", std::move(elems)}};
            } else if constexpr (std::is_same_v<T, WireValue>) {
                Json fields = Json::object();
                for (const auto& [name, child] : n.fields) fields[name] = child.to_json();
                return Json{{"k", "val"},
                            {"t", n.type_name},
                            {"i", n.node_index},
                            {"f", std::move(fields)}};
            } else if constexpr (std::is_same_v<T, WireRef>) {
                return Json{{"k", "ref"},
                            {"space", n.ref.space_id},
                            {"obj", n.ref.object_id},
                            {"t", n.ref.type_name}};
            } else {
                return Json{{"k", "back"}, {"i", n.node_index}};
            }
        },
        node);
}

std::string WireNode::to_json_string() const { return to_json().dump(); }

WireNode WireNode::from_json(const Json& j) {
    if (!j.is_object()) malformed("wire node is not a JSON object");
    const std::string kind = need(j, "k").get<std::string>();
    if (kind == "prim") {
        const std::string tag = need(j, "t").get<std::string>();
        const Json& v = need(j, "v");
        WirePrimitive prim;
        if (tag == "bool") {
            if (!v.is_boolean()) malformed("bool primitive with non-boolean payload");
            prim.value = v.get<bool>();
        } else if (tag == "int64") {
            if (!v.is_number_integer()) malformed("int64 primitive with non-integer payload");
            prim.value = v.get<std::int64_t>();
        } else if (tag == "float64") {
            if (!v.is_number()) malformed("float64 primitive with non-numeric payload");
            prim.value = v.get<double>();
        } else if (tag == "string") {
            if (!v.is_string()) malformed("string primitive with non-string payload");
            prim.value = v.get<std::string>();
        } else {
            malformed("unknown primitive tag '" + tag + "'");
        }
        return WireNode{prim};
    }
    if (kind == "null") return WireNode{WireNull{}};
    if (kind == "list") {
        const Json& v = need(j, "v");
        if (!v.is_array()) malformed("list payload is not an array");
        WireList list;
        list.elements.reserve(v.size());
        for (const auto& e : v) list.elements.push_back(from_json(e));
        return WireNode{std::move(list)};
    }
    if (kind == "val") {
        WireValue val;
        val.type_name = need(j, "t").get<std::string>();
        val.node_index = need(j, "i").get<std::uint32_t>();
        const Json& f = need(j, "f");
        if (!f.is_object()) malformed("value fields payload is not an object");
        for (auto it = f.begin(); it != f.end(); ++it) {
            val.fields.emplace_back(it.key(), from_json(it.value()));
        }
        return WireNode{std::move(val)};
    }
    if (kind == "ref") {
        return WireNode{WireRef{RemoteReference{need(j, "space").get<std::string>(),
                                                need(j, "obj").get<std::uint64_t>(),
                                                need(j, "t").get<std::string>()}}};
    }
    if (kind == "back") return WireNode{WireBackRef{need(j, "i").get<std::uint32_t>()}};
    malformed("unknown node kind '" + kind + "'");
}

WireNode WireNode::from_json_string(const std::string& text) {
    Json j = Json::parse(text, nullptr, false);
    if (j.is_discarded()) malformed("invalid JSON");
    return from_json(j);
}

}  // namespace polyrpc
