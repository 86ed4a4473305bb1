#include <doctest.h>

#include "test_support.hpp"

using namespace polyrpc;
using namespace testsup;

TEST_CASE("envelope frame round trip") {
    Envelope env{Envelope::Kind::Call, 17,
                 Json{{"target", reference_to_json({"s", 1, "T"})}, {"method", "m"},
                      {"args", Json::array()}}};
    Envelope back = Envelope::from_frame(env.to_frame());
    CHECK(back.kind == Envelope::Kind::Call);
    CHECK(back.call_id == 17);
    CHECK(back.payload["method"] == "m");

    CHECK_THROWS_AS(Envelope::from_frame("not json"), Error);
    CHECK_THROWS_AS(Envelope::from_frame(R"({"kind":"NOPE","call_id":1,"payload":{}})"), Error);
}

TEST_CASE("in-memory endpoints deliver frames in order and intact") {
    auto [a, b] = in_memory_pair();
    for (int i = 0; i < 100; ++i) a->send("frame-" + std::to_string(i));
    for (int i = 0; i < 100; ++i) {
        auto frame = b->recv();
        REQUIRE(frame);
        CHECK(*frame == "frame-" + std::to_string(i));
    }
    a->close();
    CHECK_FALSE(b->recv().has_value());
    CHECK_FALSE(b->send("after close"));
}

TEST_CASE("TCP endpoints round trip a 1 MiB frame bit-exactly") {
    TcpListener listener("127.0.0.1", 0);
    std::shared_ptr<Endpoint> server;
    std::thread acceptor([&] { server = listener.accept(); });
    auto client = tcp_connect("127.0.0.1", listener.port());
    acceptor.join();
    REQUIRE(server);

    std::string big(1 << 20, '\0');
    for (std::size_t i = 0; i < big.size(); ++i) big[i] = static_cast<char>(i * 131 % 251);
    REQUIRE(client->send(big));
    auto got = server->recv(std::chrono::milliseconds(5000));
    REQUIRE(got);
    CHECK(*got == big);
    REQUIRE(server->send(*got));
    auto echoed = client->recv(std::chrono::milliseconds(5000));
    REQUIRE(echoed);
    CHECK(*echoed == big);

    CHECK_FALSE(client->send(std::string(kMaxFrameBytes + 1, 'x')));
    client->close();
    server->close();
}

TEST_CASE("export is idempotent per identity, distinct per object") {
    Space space;
    register_cell_and_sink(space.types());
    auto c1 = std::make_shared<Cell>("one");
    auto c2 = std::make_shared<Cell>("two");
    auto r1 = space.export_object(c1);
    auto r1_again = space.export_object(c1);
    auto r2 = space.export_object(c2);
    CHECK(r1 == r1_again);
    CHECK(r1.object_id != r2.object_id);
    CHECK(r1.space_id == space.id());
    CHECK(r1.type_name == "Cell");
}

TEST_CASE("export requires a method table") {
    Space space;
    auto node = std::make_shared<TestNode>("Unregistered");
    try {
        space.export_object(node);
        FAIL("expected NotDispatchable");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotDispatchable);
    }
}

TEST_CASE("unexport semantics") {
    Space space;
    register_cell_and_sink(space.types());
    auto c1 = std::make_shared<Cell>("one");
    auto c2 = std::make_shared<Cell>("two");
    auto r1 = space.export_object(c1);
    auto r2 = space.export_object(c2);
    CHECK(space.unexport(r1));
    CHECK_FALSE(space.unexport(r1));
    CHECK(space.find_exported(r1.object_id) == nullptr);
    // Sibling exports are untouched.
    CHECK(space.find_exported(r2.object_id) == c2);
}

TEST_CASE("calls after unexport fail with StaleReference") {
    SpacePair pair(false);
    auto cell = std::make_shared<Cell>("live");
    auto ref = pair.callee.export_object(cell);
    CHECK(pair.caller_conn->invoke(ref, "get_text", {}).as_string() == "live");
    pair.callee.unexport(ref);
    try {
        pair.caller_conn->invoke(ref, "get_text", {});
        FAIL("expected StaleReference");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::StaleReference);
    }
}

TEST_CASE("unknown method and mismatched space") {
    SpacePair pair(false);
    try {
        pair.call_sink("no_such_method");
        FAIL("expected NoSuchMethod");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NoSuchMethod);
    }
    RemoteReference wrong_space{"some-other-space", pair.sink_ref.object_id, "Sink"};
    try {
        pair.caller_conn->invoke(wrong_space, "kept_is_proxy", {});
        FAIL("expected StaleReference");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::StaleReference);
    }
}

TEST_CASE("proxies dispatch to the exporting space") {
    SpacePair pair(false);
    auto cell = std::make_shared<Cell>("start");
    auto ref = pair.callee.export_object(cell);
    auto p1 = pair.caller_conn->proxy_for(ref);
    auto p2 = pair.caller_conn->proxy_for(ref);

    CHECK(p1->call("get_text").as_string() == "start");
    p1->call("set_text", {Value("changed")});
    CHECK(cell->text() == "changed");
    // Two proxies to one export observe the same state.
    CHECK(p2->call("get_text").as_string() == "changed");
}

TEST_CASE("a proxy without a live channel is unreachable") {
    Proxy orphan(RemoteReference{"nowhere", 5, "Cell"}, nullptr);
    try {
        orphan.call("get_text");
        FAIL("expected Unreachable");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Unreachable);
    }
}

TEST_CASE("remote application errors carry RemoteError") {
    SpacePair pair(false);
    // mutate_arg with a missing argument throws inside the handler.
    try {
        pair.call_sink("mutate_arg");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::RemoteError);
    }
}

TEST_CASE("a reference passed back to its home space is the original object") {
    SpacePair pair(false);
    pair.callee.policy().store().set_method_policy("Sink", "make_cell",
                                                   PolicyMechanism::by_reference(), true);
    Value got = pair.call_sink("make_cell");
    auto proxy = std::dynamic_pointer_cast<Proxy>(got.object());
    REQUIRE(proxy);
    // Hand the proxy straight back as an argument; the callee must see its
    // own resident cell, not a proxy to itself.
    pair.caller.policy().store().set_param_policy("Sink", "keep", 0,
                                                  PolicyMechanism::by_reference(), true);
    pair.call_sink("keep", {Value(EncodablePtr(proxy))});
    CHECK(pair.call_sink("kept_is_resident").as_bool());
}

TEST_CASE("concurrent interleaved calls are matched to the right awaiters") {
    for (bool tcp : {false, true}) {
        CAPTURE(tcp);
        SpacePair pair(tcp);
        auto node = std::make_shared<TestNode>();
        auto ref = pair.callee.export_object(node);
        constexpr int kThreads = 8;
        constexpr int kCalls = 25;
        std::vector<std::thread> threads;
        std::atomic<int> mismatches{0};
        for (int t = 0; t < kThreads; ++t) {
            threads.emplace_back([&, t] {
                for (int i = 0; i < kCalls; ++i) {
                    std::int64_t token = t * 1000 + i;
                    Value got = pair.caller_conn->invoke(ref, "echo", {Value(token)});
                    if (!got.is_int() || got.as_int() != token) mismatches.fetch_add(1);
                }
            });
        }
        for (auto& t : threads) t.join();
        CHECK(mismatches.load() == 0);
    }
}

TEST_CASE("oversized calls fail with FrameTooLarge") {
    SpacePair pair(false);
    auto node = std::make_shared<TestNode>();
    auto ref = pair.callee.export_object(node);
    std::string huge(kMaxFrameBytes + 1, 'x');
    try {
        pair.caller_conn->invoke(ref, "echo", {Value(std::move(huge))});
        FAIL("expected FrameTooLarge");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::FrameTooLarge);
    }
    // The connection survives for well-sized traffic.
    CHECK(pair.caller_conn->invoke(ref, "echo", {Value(std::int64_t(5))}).as_int() == 5);
}

TEST_CASE("policy queries are answered over the call connection") {
    SpacePair pair(false);
    pair.callee.policy().store().set_param_policy("Sink", "keep", 0,
                                                  PolicyMechanism::by_reference(), false);
    PolicyQuery q{"Sink", "keep", Role::Argument, 0, "Cell", 0};
    auto answer = pair.caller_conn->query_policy(q);
    REQUIRE(answer);
    CHECK(answer->dominant_level == 1);
    CHECK(answer->mechanism == PolicyMechanism::by_reference());

    pair.close();
    CHECK_FALSE(pair.caller_conn->query_policy(q).has_value());
}

TEST_CASE("manager control object steers a live space") {
    SpacePair pair(false);
    auto control = install_manager_control(pair.callee);
    CHECK(control.object_id == kControlObjectId);

    pair.caller_conn->invoke(control, "set_method_policy",
                             {Value("Sink"), Value("make_cell"), Value("by_reference"),
                              Value(true), Value(-1)});
    Value decision = pair.caller_conn->invoke(
        control, "resolve",
        {Value("Sink"), Value("make_cell"), Value("ret"), Value(-1), Value("Cell"), Value(0)});
    REQUIRE(decision.is_list());
    CHECK(decision.as_list().at(0).as_string() == "by_reference");
    CHECK(decision.as_list().at(2).as_int() == 5);

    // The installed rule has immediate effect on real calls.
    Value got = pair.call_sink("make_cell");
    CHECK(std::dynamic_pointer_cast<Proxy>(got.object()) != nullptr);

    pair.caller_conn->invoke(control, "clear_rules", {});
    CHECK(pair.callee.policy().store().rule_count() == 0);
}

TEST_CASE("dynamic rules flip the wire encoding between calls") {
    SpacePair pair(false);
    auto cell = std::make_shared<Cell>("c");
    pair.call_sink("keep", {Value(EncodablePtr(cell))});
    CHECK_FALSE(pair.call_sink("kept_is_proxy").as_bool());

    pair.caller.policy().store().set_class_policy("Cell", PolicyMechanism::by_reference(), true);
    pair.call_sink("keep", {Value(EncodablePtr(cell))});
    CHECK(pair.call_sink("kept_is_proxy").as_bool());

    pair.caller.policy().store().set_class_policy("Cell", PolicyMechanism::by_value(), true);
    pair.call_sink("keep", {Value(EncodablePtr(cell))});
    CHECK_FALSE(pair.call_sink("kept_is_proxy").as_bool());
}

TEST_CASE("mutation visibility fixtures (in-memory)") {
    auto outcome = run_mutation_fixtures(false);
    CHECK(outcome.by_ref_arg_visible);
    CHECK(outcome.by_val_arg_invisible);
    CHECK(outcome.by_ref_return_visible);
    CHECK(outcome.by_val_return_invisible);
}

TEST_CASE("mutation visibility fixtures (TCP)") {
    auto outcome = run_mutation_fixtures(true);
    CHECK(outcome.all());
}

TEST_CASE("cooperative vs autonomous serializer on the identical fixture") {
    CHECK_FALSE(serializes_by_reference(ManagerMode::Cooperative));  // remote level 4 wins
    CHECK(serializes_by_reference(ManagerMode::Autonomous));         // local level 6 rules alone
}
