#include "polyrpc/codec.hpp"

#include <unordered_map>

namespace polyrpc {

namespace {

class Encoder {
public:
    Encoder(const EncodeSite& site, const PolicyFn& decide, const ExportFn& export_object)
        : site_(site), decide_(decide), export_object_(export_object) {}

    WireNode encode_value(const Value& value, int depth, const std::string& path) {
        return std::visit(
            [&](const auto& v) -> WireNode {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, std::monostate>) {
                    return WireNode{WireNull{}};
                } else if constexpr (std::is_same_v<T, bool> ||
                                     std::is_same_v<T, std::int64_t> ||
                                     std::is_same_v<T, double> ||
                                     std::is_same_v<T, std::string>) {
                    return WireNode{WirePrimitive{v}};
                } else if constexpr (std::is_same_v<T, Value::List>) {
                    WireList list;
                    list.elements.reserve(v.size());
                    for (std::size_t i = 0; i < v.size(); ++i) {
                        // Lists are transparent containers: same depth.
                        list.elements.push_back(
                            encode_value(v[i], depth, path + "[" + std::to_string(i) + "]"));
                    }
                    return WireNode{std::move(list)};
                } else {
                    return encode_object(v, depth, path);
                }
            },
            value.raw());
    }

private:
    WireNode encode_object(const EncodablePtr& obj, int depth, const std::string& path) {
        if (!obj) throw Error(ErrorCode::EncodingError, "null object pointer at " + path);

        // Proxies keep their original identity regardless of policy.
        if (auto remote = obj->remote_identity()) return WireNode{WireRef{*remote}};

        if (auto it = visited_.find(obj.get()); it != visited_.end()) {
            return WireNode{WireBackRef{it->second}};
        }

        CallSite site{site_.call_class, site_.method,       site_.role,
                      site_.param_index, obj->type_name(), depth};
        PolicyMechanism mechanism = decide_(site);

        if (mechanism == PolicyMechanism::by_reference()) {
            return WireNode{WireRef{export_object_(obj)}};
        }
        if (mechanism != PolicyMechanism::by_value()) {
            throw Error(ErrorCode::EncodingError,
                        "mechanism '" + mechanism.name() + "' has no wire encoding (at " + path +
                            ")");
        }

        WireValue val;
        val.type_name = obj->type_name();
        val.node_index = next_index_++;
        visited_.emplace(obj.get(), val.node_index);
        for (const auto& [name, child] : obj->fields()) {
            val.fields.emplace_back(name, encode_value(child, depth + 1, path + "." + name));
        }
        return WireNode{std::move(val)};
    }

    const EncodeSite& site_;
    const PolicyFn& decide_;
    const ExportFn& export_object_;
    std::unordered_map<const Encodable*, std::uint32_t> visited_;
    std::uint32_t next_index_ = 0;
};

class Decoder {
public:
    Decoder(const RefResolver& resolve_reference, const TypeRegistry& types)
        : resolve_reference_(resolve_reference), types_(types) {}

    Value decode_node(const WireNode& node) {
        return std::visit(
            [&](const auto& n) -> Value {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, WirePrimitive>) {
                    return std::visit([](const auto& v) { return Value(v); }, n.value);
                } else if constexpr (std::is_same_v<T, WireNull>) {
                    return Value();
                } else if constexpr (std::is_same_v<T, WireList>) {
                    Value::List list;
                    list.reserve(n.elements.size());
                    for (const auto& e : n.elements) list.push_back(decode_node(e));
                    return Value(std::move(list));
                } else if constexpr (std::is_same_v<T, WireValue>) {
                    return decode_value_node(n);
                } else if constexpr (std::is_same_v<T, WireRef>) {
                    return resolve_reference_(n.ref);
                } else {
                    auto it = decoded_.find(n.node_index);
                    if (it == decoded_.end()) {
                        throw Error(ErrorCode::MalformedWireTree,
                                    "back-reference to unknown node " +
                                        std::to_string(n.node_index));
                    }
                    return Value(it->second);
                }
            },
            node.node);
    }

private:
    Value decode_value_node(const WireValue& n) {
        const TypeInfo* info = types_.find(n.type_name);
        if (!info || !info->create || !info->load) {
            throw Error(ErrorCode::UnknownType,
                        "no instantiator registered for type '" + n.type_name + "'");
        }
        if (decoded_.count(n.node_index)) {
            throw Error(ErrorCode::MalformedWireTree,
                        "duplicate node index " + std::to_string(n.node_index));
        }
        EncodablePtr obj = info->create();
        // Register before decoding fields so cyclic BACKREFs find us.
        decoded_.emplace(n.node_index, obj);
        FieldList fields;
        fields.reserve(n.fields.size());
        for (const auto& [name, child] : n.fields) fields.emplace_back(name, decode_node(child));
        info->load(*obj, fields);
        return Value(obj);
    }

    const RefResolver& resolve_reference_;
    const TypeRegistry& types_;
    std::unordered_map<std::uint32_t, EncodablePtr> decoded_;
};

}  // namespace

WireNode encode(const Value& root, const EncodeSite& site, const PolicyFn& decide,
                const ExportFn& export_object) {
    Encoder encoder(site, decide, export_object);
    return encoder.encode_value(root, 0, "$");
}

Value decode(const WireNode& node, const RefResolver& resolve_reference,
             const TypeRegistry& types) {
    Decoder decoder(resolve_reference, types);
    return decoder.decode_node(node);
}

}  // namespace polyrpc
