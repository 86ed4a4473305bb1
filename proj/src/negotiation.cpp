#include "polyrpc/negotiation.hpp"

namespace polyrpc {

PolicyQuery PolicyQuery::from_site(const CallSite& site) {
    return PolicyQuery{site.call_class, site.method,      site.role,
                       site.param_index, site.actual_class, site.depth};
}

CallSite PolicyQuery::to_site() const {
    return CallSite{call_class, method, role, param_index, actual_class, depth};
}

PolicyAnswer PolicyAnswer::from_decision(const TransmissionDecision& d) {
    return PolicyAnswer{d.mechanism, d.dominant_kind, d.dominant_level, d.overridable};
}

TransmissionDecision PolicyAnswer::to_decision() const {
    return TransmissionDecision{mechanism, dominant_kind, dominant_level, overridable};
}

PolicyMechanism combine(const TransmissionDecision& serializer_side,
                        const TransmissionDecision& other_side, Role role,
                        bool serializer_is_caller) {
    if (serializer_side.dominant_level != other_side.dominant_level) {
        return serializer_side.dominant_level < other_side.dominant_level
                   ? serializer_side.mechanism
                   : other_side.mechanism;
    }
    // Equal levels: callee wins for arguments, caller wins for returns.
    bool callee_wins = (role == Role::Argument);
    bool serializer_is_callee = !serializer_is_caller;
    bool serializer_wins = (callee_wins == serializer_is_callee);
    return serializer_wins ? serializer_side.mechanism : other_side.mechanism;
}

TransmissionDecision PolicyManager::resolve(const CallSite& site) const {
    return polyrpc::resolve(store_.snapshot(), site);
}

PolicyAnswer PolicyManager::answer_query(const PolicyQuery& q) const {
    return PolicyAnswer::from_decision(resolve(q.to_site()));
}

PolicyMechanism PolicyManager::evaluate_for_transmission(const CallSite& site,
                                                         PolicyPeer* peer) const {
    TransmissionDecision local = resolve(site);
    if (mode_.load() != ManagerMode::Cooperative || peer == nullptr) return local.mechanism;
    auto answer = peer->query(PolicyQuery::from_site(site));
    if (!answer) {
        peer_fallbacks_.fetch_add(1);
        return local.mechanism;
    }
    bool serializer_is_caller = (site.role == Role::Argument);
    return combine(local, answer->to_decision(), site.role, serializer_is_caller);
}

}  // namespace polyrpc
