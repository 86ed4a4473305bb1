#pragma once

#include "polyrpc/policy.hpp"

namespace polyrpc {

/// Precedence of a rule kind/overridable combination. Lower is stronger:
///   1 parameter (non-overridable)   4 parameter (overridable)
///   2 method    (non-overridable)   5 method    (overridable)
///   3 class     (non-overridable)   6 class     (overridable)
///   7 default
int hierarchy_level(RuleKind kind, bool overridable) noexcept;

/// A resolved transmission decision plus the provenance of the dominant
/// rule, which cross-space contention resolution needs.
struct TransmissionDecision {
    PolicyMechanism mechanism = PolicyMechanism::by_value();
    RuleKind dominant_kind = RuleKind::Default;
    int dominant_level = 7;
    bool overridable = true;
};

/// Picks the applicable rule with the lowest hierarchy level; an empty
/// candidate set yields the default decision (level 7).
TransmissionDecision resolve(const PolicyStore::Snapshot& snapshot, const CallSite& site);

TransmissionDecision get_transmission_policy(const PolicyStore& store,
                                             const std::string& class_name,
                                             const std::string& method_name, int param_index,
                                             const std::string& actual_class, int depth);

TransmissionDecision get_return_transmission_policy(const PolicyStore& store,
                                                    const std::string& class_name,
                                                    const std::string& method_name,
                                                    const std::string& actual_class, int depth);

}  // namespace polyrpc
