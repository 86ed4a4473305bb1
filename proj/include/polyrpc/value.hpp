#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "polyrpc/errors.hpp"

namespace polyrpc {

class Encodable;
using EncodablePtr = std::shared_ptr<Encodable>;

struct RemoteReference {
    std::string space_id;
    std::uint64_t object_id = 0;
    std::string type_name;

    friend bool operator==(const RemoteReference&, const RemoteReference&) = default;
};

/// A runtime value crossing the boundary: null, a primitive, a list, or an
/// object participating in the encodable contract.
class Value {
public:
    using List = std::vector<Value>;
    using Variant =
        std::variant<std::monostate, bool, std::int64_t, double, std::string, List, EncodablePtr>;

    Value() = default;
    Value(bool b) : v_(b) {}
    Value(std::int64_t n) : v_(n) {}
    Value(int n) : v_(static_cast<std::int64_t>(n)) {}
    Value(double d) : v_(d) {}
    Value(std::string s) : v_(std::move(s)) {}
    Value(const char* s) : v_(std::string(s)) {}
    Value(List l) : v_(std::move(l)) {}
    Value(EncodablePtr o) : v_(std::move(o)) {}

    bool is_null() const { return std::holds_alternative<std::monostate>(v_); }
    bool is_bool() const { return std::holds_alternative<bool>(v_); }
    bool is_int() const { return std::holds_alternative<std::int64_t>(v_); }
    bool is_double() const { return std::holds_alternative<double>(v_); }
    bool is_string() const { return std::holds_alternative<std::string>(v_); }
    bool is_list() const { return std::holds_alternative<List>(v_); }
    bool is_object() const { return std::holds_alternative<EncodablePtr>(v_); }

    bool as_bool() const { return std::get<bool>(v_); }
    std::int64_t as_int() const { return std::get<std::int64_t>(v_); }
    double as_double() const { return std::get<double>(v_); }
    const std::string& as_string() const { return std::get<std::string>(v_); }
    const List& as_list() const { return std::get<List>(v_); }
    List& as_list() { return std::get<List>(v_); }
    const EncodablePtr& object() const { return std::get<EncodablePtr>(v_); }

    const Variant& raw() const { return v_; }

private:
    Variant v_;
};

using FieldList = std::vector<std::pair<std::string, Value>>;

/// Contract every by-value transmissible object satisfies: a dynamic type
/// name and named fields enumerated in a deterministic per-type order.
/// Objects that already live in another address space (proxies) report a
/// remote identity instead of state.
class Encodable {
public:
    virtual ~Encodable() = default;
    virtual std::string type_name() const = 0;
    virtual FieldList fields() const = 0;

    /// Non-empty for proxies: the reference they stand in for.
    virtual std::optional<RemoteReference> remote_identity() const { return std::nullopt; }
};

using MethodFn = std::function<Value(Encodable& self, const std::vector<Value>& args)>;
using MethodTable = std::map<std::string, MethodFn>;

/// Everything a space knows about one transmissible type: how to create an
/// empty instance, how to load decoded fields into it (two-phase so cyclic
/// graphs can decode), and which methods remote callers may invoke.
struct TypeInfo {
    std::function<EncodablePtr()> create;
    std::function<void(Encodable& obj, const FieldList& fields)> load;
    MethodTable methods;
};

class TypeRegistry {
public:
    void register_type(const std::string& name, TypeInfo info);
    const TypeInfo* find(const std::string& name) const;
    bool is_dispatchable(const std::string& name) const;

private:
    mutable std::shared_mutex mutex_;
    std::map<std::string, TypeInfo> types_;
};

}  // namespace polyrpc
