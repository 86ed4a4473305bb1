#pragma once

#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <tuple>
#include <vector>

#include "polyrpc/errors.hpp"

namespace polyrpc {

/// One parameter-passing mechanism. BY_VALUE and BY_REFERENCE are always
/// registered; additional mechanism names may be registered at runtime.
/// Instances are obtained only through the registry, so a PolicyMechanism
/// value is always a registered one.
class PolicyMechanism {
public:
    static PolicyMechanism by_value();
    static PolicyMechanism by_reference();

    /// Registers (idempotently) and returns the mechanism with this name.
    static PolicyMechanism register_mechanism(const std::string& name);

    static std::optional<PolicyMechanism> find(const std::string& name);

    /// Looks up a registered mechanism; throws UnknownMechanism otherwise.
    static PolicyMechanism require(const std::string& name);

    static bool is_registered(const std::string& name);

    const std::string& name() const noexcept { return name_; }

    friend bool operator==(const PolicyMechanism& a, const PolicyMechanism& b) {
        return a.name_ == b.name_;
    }
    friend bool operator!=(const PolicyMechanism& a, const PolicyMechanism& b) {
        return !(a == b);
    }

private:
    explicit PolicyMechanism(std::string name) : name_(std::move(name)) {}
    std::string name_;
};

enum class RuleKind { Parameter, Method, Class, Default };

const char* to_string(RuleKind kind) noexcept;
std::optional<RuleKind> rule_kind_from_string(const std::string& name);

enum class Role { Argument, Return };

/// Unbounded depth is represented as an empty optional.
using DepthLimit = std::optional<int>;
inline constexpr std::nullopt_t kUnboundedDepth = std::nullopt;

/// The call-site coordinates a single transmission decision is made for.
/// `call_class`/`method` name the invoked method; `actual_class` is the
/// dynamic type of the object node being transmitted; `depth` is the hop
/// count from the argument/return root (0 = the root object itself).
struct CallSite {
    std::string call_class;
    std::string method;
    Role role = Role::Argument;
    std::optional<int> param_index;  // set iff role == Argument
    std::string actual_class;
    int depth = 0;
};

struct PolicyRule {
    RuleKind kind = RuleKind::Class;
    std::string class_name;
    std::string method_name;         // METHOD / PARAMETER only
    std::optional<int> param_index;  // PARAMETER only
    PolicyMechanism mechanism = PolicyMechanism::by_value();
    bool overridable = true;
    DepthLimit depth = kUnboundedDepth;  // METHOD / PARAMETER only

    bool applies_to(const CallSite& site) const;
};

/// Identifies one stored rule for removal.
struct RuleSelector {
    RuleKind kind = RuleKind::Class;
    std::string class_name;
    std::string method_name;
    std::optional<int> param_index;
};

/// The per-address-space rule database. At most one rule is stored per
/// (kind, class, method, param) key; setting an existing key replaces the
/// rule. All mutations are immediately visible to subsequent snapshots.
class PolicyStore {
public:
    /// An immutable copy of the store taken at one instant; resolution
    /// operates on snapshots so a decision never sees a half-applied update.
    struct Snapshot {
        std::vector<PolicyRule> rules;
        PolicyMechanism default_mechanism = PolicyMechanism::by_value();

        std::vector<PolicyRule> applicable(const CallSite& site) const;
    };

    void set_class_policy(const std::string& class_name, PolicyMechanism mechanism,
                          bool overridable);
    void set_method_policy(const std::string& class_name, const std::string& method_name,
                           PolicyMechanism mechanism, bool overridable,
                           DepthLimit depth = kUnboundedDepth);
    void set_param_policy(const std::string& class_name, const std::string& method_name,
                          int param_index, PolicyMechanism mechanism, bool overridable,
                          DepthLimit depth = kUnboundedDepth);

    // Name-based variants; throw UnknownMechanism for unregistered names.
    void set_class_policy(const std::string& class_name, const std::string& mechanism,
                          bool overridable);
    void set_method_policy(const std::string& class_name, const std::string& method_name,
                           const std::string& mechanism, bool overridable,
                           DepthLimit depth = kUnboundedDepth);
    void set_param_policy(const std::string& class_name, const std::string& method_name,
                          int param_index, const std::string& mechanism, bool overridable,
                          DepthLimit depth = kUnboundedDepth);

    void set_default_policy(PolicyMechanism mechanism);
    void set_default_policy(const std::string& mechanism);
    PolicyMechanism default_policy() const;

    void clear_rules();
    bool remove_rule(const RuleSelector& selector);

    std::size_t rule_count() const;
    Snapshot snapshot() const;
    std::vector<PolicyRule> lookup_applicable(const CallSite& site) const;

private:
    using Key = std::tuple<int, std::string, std::string, int>;
    static Key key_of(RuleKind kind, const std::string& class_name,
                      const std::string& method_name, std::optional<int> param_index);
    void put(PolicyRule rule);

    mutable std::shared_mutex mutex_;
    std::map<Key, PolicyRule> rules_;
    PolicyMechanism default_ = PolicyMechanism::by_value();
};

}  // namespace polyrpc
