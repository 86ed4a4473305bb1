#include "polyrpc/resolution.hpp"

namespace polyrpc {

int hierarchy_level(RuleKind kind, bool overridable) noexcept {
    switch (kind) {
        case RuleKind::Parameter: return overridable ? 4 : 1;
        case RuleKind::Method: return overridable ? 5 : 2;
        case RuleKind::Class: return overridable ? 6 : 3;
        case RuleKind::Default: return 7;
    }
    return 7;
}

TransmissionDecision resolve(const PolicyStore::Snapshot& snapshot, const CallSite& site) {
    const PolicyRule* best = nullptr;
    int best_level = 7;
    for (const auto& rule : snapshot.rules) {
        if (!rule.applies_to(site)) continue;
        int level = hierarchy_level(rule.kind, rule.overridable);
        if (!best || level < best_level) {
            best = &rule;
            best_level = level;
        }
    }
    if (!best) {
        return TransmissionDecision{snapshot.default_mechanism, RuleKind::Default, 7, true};
    }
    return TransmissionDecision{best->mechanism, best->kind, best_level, best->overridable};
}

TransmissionDecision get_transmission_policy(const PolicyStore& store,
                                             const std::string& class_name,
                                             const std::string& method_name, int param_index,
                                             const std::string& actual_class, int depth) {
    if (param_index < 0) throw Error(ErrorCode::InvalidSelector, "negative parameter index");
    if (depth < 0) throw Error(ErrorCode::InvalidSelector, "negative depth");
    CallSite site{class_name, method_name, Role::Argument, param_index, actual_class, depth};
    return resolve(store.snapshot(), site);
}

TransmissionDecision get_return_transmission_policy(const PolicyStore& store,
                                                    const std::string& class_name,
                                                    const std::string& method_name,
                                                    const std::string& actual_class, int depth) {
    if (depth < 0) throw Error(ErrorCode::InvalidSelector, "negative depth");
    CallSite site{class_name, method_name, Role::Return, std::nullopt, actual_class, depth};
    return resolve(store.snapshot(), site);
}

}  // namespace polyrpc
