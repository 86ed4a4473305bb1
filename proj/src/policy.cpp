#include "polyrpc/policy.hpp"

#include <mutex>
#include <set>

namespace polyrpc {

namespace {

std::set<std::string>& mechanism_names() {
    static std::set<std::string> names{"by_value", "by_reference"};
    return names;
}

std::mutex& mechanism_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

PolicyMechanism PolicyMechanism::by_value() { return PolicyMechanism("by_value"); }

PolicyMechanism PolicyMechanism::by_reference() { return PolicyMechanism("by_reference"); }

PolicyMechanism PolicyMechanism::register_mechanism(const std::string& name) {
    if (name.empty()) throw Error(ErrorCode::InvalidSelector, "mechanism name is empty");
    std::lock_guard lock(mechanism_mutex());
    mechanism_names().insert(name);
    return PolicyMechanism(name);
}

std::optional<PolicyMechanism> PolicyMechanism::find(const std::string& name) {
    std::lock_guard lock(mechanism_mutex());
    if (mechanism_names().count(name)) return PolicyMechanism(name);
    return std::nullopt;
}

PolicyMechanism PolicyMechanism::require(const std::string& name) {
    auto m = find(name);
    if (!m) throw Error(ErrorCode::UnknownMechanism, "mechanism '" + name + "' is not registered");
    return *m;
}

bool PolicyMechanism::is_registered(const std::string& name) { return find(name).has_value(); }

const char* to_string(RuleKind kind) noexcept {
    switch (kind) {
        case RuleKind::Parameter: return "parameter";
        case RuleKind::Method: return "method";
        case RuleKind::Class: return "class";
        case RuleKind::Default: return "default";
    }
    return "default";
}

std::optional<RuleKind> rule_kind_from_string(const std::string& name) {
    for (RuleKind kind :
         {RuleKind::Parameter, RuleKind::Method, RuleKind::Class, RuleKind::Default}) {
        if (name == to_string(kind)) return kind;
    }
    return std::nullopt;
}

bool PolicyRule::applies_to(const CallSite& site) const {
    switch (kind) {
        case RuleKind::Class:
            // Exact class of the transmitted node; never subtypes, no depth bound.
            return class_name == site.actual_class;
        case RuleKind::Method:
        case RuleKind::Parameter: {
            if (class_name != site.call_class || method_name != site.method) return false;
            if (kind == RuleKind::Parameter) {
                if (site.role != Role::Argument) return false;
                if (param_index != site.param_index) return false;
            }
            // Inclusive depth bound: depth d covers nodes at 0..d.
            return !depth.has_value() || site.depth <= *depth;
        }
        case RuleKind::Default:
            return false;
    }
    return false;
}

std::vector<PolicyRule> PolicyStore::Snapshot::applicable(const CallSite& site) const {
    std::vector<PolicyRule> out;
    for (const auto& rule : rules) {
        if (rule.applies_to(site)) out.push_back(rule);
    }
    return out;
}

PolicyStore::Key PolicyStore::key_of(RuleKind kind, const std::string& class_name,
                                     const std::string& method_name,
                                     std::optional<int> param_index) {
    return {static_cast<int>(kind), class_name, method_name, param_index.value_or(-1)};
}

void PolicyStore::put(PolicyRule rule) {
    std::unique_lock lock(mutex_);
    rules_.insert_or_assign(key_of(rule.kind, rule.class_name, rule.method_name, rule.param_index),
                            std::move(rule));
}

void PolicyStore::set_class_policy(const std::string& class_name, PolicyMechanism mechanism,
                                   bool overridable) {
    if (class_name.empty()) throw Error(ErrorCode::InvalidSelector, "class name is empty");
    put(PolicyRule{RuleKind::Class, class_name, "", std::nullopt, mechanism, overridable,
                   kUnboundedDepth});
}

void PolicyStore::set_method_policy(const std::string& class_name, const std::string& method_name,
                                    PolicyMechanism mechanism, bool overridable, DepthLimit depth) {
    if (class_name.empty() || method_name.empty())
        throw Error(ErrorCode::InvalidSelector, "class/method name is empty");
    if (depth && *depth < 0) throw Error(ErrorCode::InvalidSelector, "negative depth");
    put(PolicyRule{RuleKind::Method, class_name, method_name, std::nullopt, mechanism, overridable,
                   depth});
}

void PolicyStore::set_param_policy(const std::string& class_name, const std::string& method_name,
                                   int param_index, PolicyMechanism mechanism, bool overridable,
                                   DepthLimit depth) {
    if (class_name.empty() || method_name.empty())
        throw Error(ErrorCode::InvalidSelector, "class/method name is empty");
    if (param_index < 0) throw Error(ErrorCode::InvalidSelector, "negative parameter index");
    if (depth && *depth < 0) throw Error(ErrorCode::InvalidSelector, "negative depth");
    put(PolicyRule{RuleKind::Parameter, class_name, method_name, param_index, mechanism,
                   overridable, depth});
}

void PolicyStore::set_class_policy(const std::string& class_name, const std::string& mechanism,
                                   bool overridable) {
    set_class_policy(class_name, PolicyMechanism::require(mechanism), overridable);
}

void PolicyStore::set_method_policy(const std::string& class_name, const std::string& method_name,
                                    const std::string& mechanism, bool overridable,
                                    DepthLimit depth) {
    set_method_policy(class_name, method_name, PolicyMechanism::require(mechanism), overridable,
                      depth);
}

void PolicyStore::set_param_policy(const std::string& class_name, const std::string& method_name,
                                   int param_index, const std::string& mechanism, bool overridable,
                                   DepthLimit depth) {
    set_param_policy(class_name, method_name, param_index, PolicyMechanism::require(mechanism),
                     overridable, depth);
}

void PolicyStore::set_default_policy(PolicyMechanism mechanism) {
    std::unique_lock lock(mutex_);
    default_ = mechanism;
}

void PolicyStore::set_default_policy(const std::string& mechanism) {
    set_default_policy(PolicyMechanism::require(mechanism));
}

PolicyMechanism PolicyStore::default_policy() const {
    std::shared_lock lock(mutex_);
    return default_;
}

void PolicyStore::clear_rules() {
    std::unique_lock lock(mutex_);
    rules_.clear();
}

bool PolicyStore::remove_rule(const RuleSelector& selector) {
    std::unique_lock lock(mutex_);
    return rules_.erase(key_of(selector.kind, selector.class_name, selector.method_name,
                               selector.param_index)) > 0;
}

std::size_t PolicyStore::rule_count() const {
    std::shared_lock lock(mutex_);
    return rules_.size();
}

PolicyStore::Snapshot PolicyStore::snapshot() const {
    std::shared_lock lock(mutex_);
    Snapshot snap;
    snap.default_mechanism = default_;
    snap.rules.reserve(rules_.size());
    for (const auto& [key, rule] : rules_) snap.rules.push_back(rule);
    return snap;
}

std::vector<PolicyRule> PolicyStore::lookup_applicable(const CallSite& site) const {
    return snapshot().applicable(site);
}

}  // namespace polyrpc
