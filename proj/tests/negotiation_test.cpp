#include <doctest.h>

#include "test_support.hpp"

using namespace polyrpc;
using namespace testsup;

namespace {

struct FakePeer final : PolicyPeer {
    std::function<std::optional<PolicyAnswer>(const PolicyQuery&)> fn;
    int queries = 0;

    std::optional<PolicyAnswer> query(const PolicyQuery& q) override {
        ++queries;
        return fn(q);
    }
};

TransmissionDecision decision(int level, PolicyMechanism mechanism) {
    // Any (kind, overridable) pair mapping to the level works here.
    static const std::pair<RuleKind, bool> shapes[] = {
        {RuleKind::Parameter, false}, {RuleKind::Method, false}, {RuleKind::Class, false},
        {RuleKind::Parameter, true},  {RuleKind::Method, true},  {RuleKind::Class, true},
        {RuleKind::Default, true},
    };
    auto [kind, ov] = shapes[level - 1];
    return TransmissionDecision{mechanism, kind, level, ov};
}

}  // namespace

TEST_CASE("strictly lower level wins regardless of side") {
    auto local = decision(1, PolicyMechanism::by_reference());
    auto remote = decision(3, PolicyMechanism::by_value());
    CHECK(combine(local, remote, Role::Argument, true) == PolicyMechanism::by_reference());
    CHECK(combine(remote, local, Role::Argument, true) == PolicyMechanism::by_reference());
    CHECK(combine(local, remote, Role::Return, false) == PolicyMechanism::by_reference());
}

TEST_CASE("equal levels: the callee's rule is followed for arguments") {
    auto caller_side = decision(6, PolicyMechanism::by_value());
    auto callee_side = decision(6, PolicyMechanism::by_reference());
    // Arguments are serialized by the caller.
    CHECK(combine(caller_side, callee_side, Role::Argument, true) ==
          PolicyMechanism::by_reference());
}

TEST_CASE("equal levels: the caller's rule is followed for return values") {
    auto caller_side = decision(5, PolicyMechanism::by_reference());
    auto callee_side = decision(5, PolicyMechanism::by_value());
    // Returns are serialized by the callee.
    CHECK(combine(callee_side, caller_side, Role::Return, false) ==
          PolicyMechanism::by_reference());
}

TEST_CASE("combine matches the table oracle over all 196 cases") {
    auto mech_a = PolicyMechanism::register_mechanism("side-a");
    auto mech_b = PolicyMechanism::register_mechanism("side-b");
    int cases = 0;
    for (int serializer_level = 1; serializer_level <= 7; ++serializer_level) {
        for (int other_level = 1; other_level <= 7; ++other_level) {
            for (Role role : {Role::Argument, Role::Return}) {
                for (bool serializer_is_caller : {true, false}) {
                    auto s = decision(serializer_level, mech_a);
                    auto o = decision(other_level, mech_b);
                    CHECK(combine(s, o, role, serializer_is_caller) ==
                          oracle_combine(s, o, role, serializer_is_caller));
                    ++cases;
                }
            }
        }
    }
    CHECK(cases == 196);
}

TEST_CASE("identical mechanisms are preserved through any tie-break") {
    for (int level = 1; level <= 7; ++level) {
        for (Role role : {Role::Argument, Role::Return}) {
            for (bool pos : {true, false}) {
                auto d = decision(level, PolicyMechanism::by_reference());
                CHECK(combine(d, d, role, pos) == PolicyMechanism::by_reference());
            }
        }
    }
}

TEST_CASE("answer_query always equals the local resolution") {
    PolicyManager manager;
    manager.store().set_param_policy("X", "m", 0, PolicyMechanism::by_reference(), false);
    manager.store().set_class_policy("Y", PolicyMechanism::by_reference(), true);

    GraphGen gen(11);
    for (int i = 0; i < 40; ++i) {
        PolicyQuery q;
        q.call_class = "X";
        q.method = gen.pick(0, 1) ? "m" : "other";
        q.role = gen.pick(0, 1) ? Role::Argument : Role::Return;
        if (q.role == Role::Argument) q.param_index = gen.pick(0, 1);
        q.actual_class = gen.pick(0, 1) ? "Y" : "Z";
        q.depth = gen.pick(0, 3);
        auto answer = manager.answer_query(q);
        auto local = manager.resolve(q.to_site());
        CHECK(answer.mechanism == local.mechanism);
        CHECK(answer.dominant_level == local.dominant_level);
        CHECK(answer.dominant_kind == local.dominant_kind);
        CHECK(answer.overridable == local.overridable);
    }
}

TEST_CASE("empty store answers the default at level 7") {
    PolicyManager manager;
    auto answer = manager.answer_query(PolicyQuery{"X", "m", Role::Argument, 0, "X", 0});
    CHECK(answer.dominant_level == 7);
    CHECK(answer.dominant_kind == RuleKind::Default);
    CHECK(answer.mechanism == PolicyMechanism::by_value());
}

TEST_CASE("an autonomous manager answers queries but never issues them") {
    PolicyManager manager;
    manager.set_mode(ManagerMode::Autonomous);
    manager.store().set_class_policy("X", PolicyMechanism::by_reference(), true);

    FakePeer peer;
    peer.fn = [](const PolicyQuery&) {
        return PolicyAnswer{PolicyMechanism::by_value(), RuleKind::Parameter, 1, false};
    };
    CallSite site{"S", "m", Role::Argument, 0, "X", 0};
    // A remote level-1 rule would dominate, but autonomous managers ignore it.
    CHECK(manager.evaluate_for_transmission(site, &peer) == PolicyMechanism::by_reference());
    CHECK(peer.queries == 0);
    // Answering still works in autonomous mode.
    CHECK(manager.answer_query(PolicyQuery::from_site(site)).dominant_level == 6);
}

TEST_CASE("a cooperative manager combines with the peer's answer") {
    PolicyManager manager;
    manager.set_mode(ManagerMode::Cooperative);
    manager.store().set_class_policy("X", PolicyMechanism::by_reference(), true);  // level 6

    FakePeer peer;
    SUBCASE("remote default loses to a local class rule") {
        peer.fn = [](const PolicyQuery&) {
            return PolicyAnswer{PolicyMechanism::by_value(), RuleKind::Default, 7, true};
        };
        CallSite site{"S", "m", Role::Argument, 0, "X", 0};
        CHECK(manager.evaluate_for_transmission(site, &peer) == PolicyMechanism::by_reference());
        CHECK(peer.queries == 1);
    }
    SUBCASE("remote level-4 rule beats the local level-6 rule") {
        peer.fn = [](const PolicyQuery&) {
            return PolicyAnswer{PolicyMechanism::by_value(), RuleKind::Parameter, 4, true};
        };
        CallSite site{"S", "m", Role::Argument, 0, "X", 0};
        CHECK(manager.evaluate_for_transmission(site, &peer) == PolicyMechanism::by_value());
    }
}

TEST_CASE("unreachable peer falls back to the local decision and is counted") {
    PolicyManager manager;
    manager.set_mode(ManagerMode::Cooperative);
    manager.store().set_class_policy("X", PolicyMechanism::by_reference(), true);

    FakePeer peer;
    peer.fn = [](const PolicyQuery&) { return std::nullopt; };
    CallSite site{"S", "m", Role::Argument, 0, "X", 0};
    CHECK(manager.peer_fallbacks() == 0);
    CHECK(manager.evaluate_for_transmission(site, &peer) == PolicyMechanism::by_reference());
    CHECK(manager.peer_fallbacks() == 1);

    // No peer handle at all behaves the same but is not a failure.
    CHECK(manager.evaluate_for_transmission(site, nullptr) == PolicyMechanism::by_reference());
    CHECK(manager.peer_fallbacks() == 1);
}

TEST_CASE("cooperative over a live transport: remote rule observed") {
    SpacePair pair(false);
    pair.caller.policy().set_mode(ManagerMode::Cooperative);
    pair.callee.policy().store().set_param_policy("Sink", "keep", 0,
                                                  PolicyMechanism::by_reference(), false);
    pair.call_sink("keep", {Value(EncodablePtr(std::make_shared<Cell>("c")))});
    CHECK(pair.call_sink("kept_is_proxy").as_bool());
}
