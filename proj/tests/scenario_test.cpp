#include <doctest.h>

#include <sstream>

#include "test_support.hpp"

using namespace polyrpc;
using namespace testsup;

TEST_CASE("PDA scenario passes in memory") {
    auto report = demo::run_pda_scenario(demo::TransportMode::InMemory);
    std::ostringstream out;
    report.print(out);
    INFO(out.str());
    CHECK(report.steps.size() >= 6);
    CHECK(report.all_passed());
}

TEST_CASE("PDA scenario outcome is mode-independent when the desktop store is empty") {
    auto autonomous = demo::run_pda_scenario(demo::TransportMode::InMemory,
                                             ManagerMode::Autonomous);
    auto cooperative = demo::run_pda_scenario(demo::TransportMode::InMemory,
                                              ManagerMode::Cooperative);
    REQUIRE(autonomous.steps.size() == cooperative.steps.size());
    for (std::size_t i = 0; i < autonomous.steps.size(); ++i) {
        CHECK(autonomous.steps[i].name == cooperative.steps[i].name);
        CHECK(autonomous.steps[i].passed == cooperative.steps[i].passed);
    }
    CHECK(cooperative.all_passed());
}

TEST_CASE("address book types round trip") {
    TypeRegistry types;
    demo::register_address_book_types(types);
    auto entry = std::make_shared<demo::AddressBookEntry>(
        "carol", "555-0000", std::make_shared<demo::Address>("3 South St", "St Andrews"));
    auto wire = encode(Value(EncodablePtr(entry)), EncodeSite{"AddressBook", "get_entry",
                                                              Role::Return, std::nullopt},
                       all_by_value(), no_exports());
    Value back = decode(wire, no_references(), types);
    auto copy = std::dynamic_pointer_cast<demo::AddressBookEntry>(back.object());
    REQUIRE(copy);
    CHECK(copy->name() == "carol");
    CHECK(copy->phone() == "555-0000");
    auto addr = std::dynamic_pointer_cast<demo::Address>(copy->address());
    REQUIRE(addr);
    CHECK(addr->city() == "St Andrews");
}
