#pragma once

#include <atomic>
#include <cstdint>

#include "polyrpc/resolution.hpp"

namespace polyrpc {

/// A cooperative manager consults the peer's dominant rule before
/// serializing; an autonomous one decides from local rules alone. Either
/// mode still answers incoming queries.
enum class ManagerMode { Cooperative, Autonomous };

/// Mirror of CallSite sent to the remote policy manager.
struct PolicyQuery {
    std::string call_class;
    std::string method;
    Role role = Role::Argument;
    std::optional<int> param_index;
    std::string actual_class;
    int depth = 0;

    static PolicyQuery from_site(const CallSite& site);
    CallSite to_site() const;
};

/// Shape-identical to TransmissionDecision; the wire form of an answer.
struct PolicyAnswer {
    PolicyMechanism mechanism = PolicyMechanism::by_value();
    RuleKind dominant_kind = RuleKind::Default;
    int dominant_level = 7;
    bool overridable = true;

    static PolicyAnswer from_decision(const TransmissionDecision& d);
    TransmissionDecision to_decision() const;
};

/// Handle through which a serializer reaches the remote policy manager.
/// Returns nullopt when the peer is unreachable or the query times out.
class PolicyPeer {
public:
    virtual ~PolicyPeer() = default;
    virtual std::optional<PolicyAnswer> query(const PolicyQuery& q) = 0;
};

/// Resolves contention between the serializing side's dominant rule and the
/// other side's. A strictly lower level wins; on equal levels the callee
/// wins for arguments and the caller wins for return values.
PolicyMechanism combine(const TransmissionDecision& serializer_side,
                        const TransmissionDecision& other_side, Role role,
                        bool serializer_is_caller);

class PolicyManager {
public:
    PolicyStore& store() { return store_; }
    const PolicyStore& store() const { return store_; }

    ManagerMode mode() const { return mode_.load(); }
    void set_mode(ManagerMode mode) { mode_.store(mode); }

    TransmissionDecision resolve(const CallSite& site) const;

    /// Local resolution of a remote query; side-effect free.
    PolicyAnswer answer_query(const PolicyQuery& q) const;

    /// Decision made on the serializing side. Arguments are serialized by
    /// the caller and returns by the callee, which fixes the tie-break
    /// direction. Peer failures fall back to the local decision.
    PolicyMechanism evaluate_for_transmission(const CallSite& site, PolicyPeer* peer) const;

    std::uint64_t peer_fallbacks() const { return peer_fallbacks_.load(); }

private:
    PolicyStore store_;
    std::atomic<ManagerMode> mode_{ManagerMode::Autonomous};
    mutable std::atomic<std::uint64_t> peer_fallbacks_{0};
};

}  // namespace polyrpc
