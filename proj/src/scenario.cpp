#include "polyrpc/scenario.hpp"

#include <thread>

namespace polyrpc::demo {

namespace {

Value field_value(const FieldList& fields, const std::string& name) {
    for (const auto& [key, value] : fields) {
        if (key == name) return value;
    }
    return Value();
}

std::string opt_string(const Value& v) { return v.is_string() ? v.as_string() : std::string(); }

}  // namespace

EncodablePtr AddressBook::find(const std::string& name) const {
    for (const auto& entry : entries_) {
        if (auto typed = std::dynamic_pointer_cast<AddressBookEntry>(entry)) {
            if (typed->name() == name) return entry;
        }
    }
    return nullptr;
}

void register_address_book_types(TypeRegistry& types) {
    {
        TypeInfo info;
        info.create = [] { return std::make_shared<Address>(); };
        info.load = [](Encodable& obj, const FieldList& fields) {
            auto& addr = static_cast<Address&>(obj);
            addr.set_street(opt_string(field_value(fields, "street")));
            addr.set_city(opt_string(field_value(fields, "city")));
        };
        info.methods["get_street"] = [](Encodable& self, const std::vector<Value>&) {
            return Value(static_cast<Address&>(self).street());
        };
        info.methods["get_city"] = [](Encodable& self, const std::vector<Value>&) {
            return Value(static_cast<Address&>(self).city());
        };
        info.methods["set_city"] = [](Encodable& self, const std::vector<Value>& args) {
            static_cast<Address&>(self).set_city(args.at(0).as_string());
            return Value();
        };
        types.register_type("Address", std::move(info));
    }
    {
        TypeInfo info;
        info.create = [] { return std::make_shared<AddressBookEntry>(); };
        info.load = [](Encodable& obj, const FieldList& fields) {
            auto& entry = static_cast<AddressBookEntry&>(obj);
            entry.set_name(opt_string(field_value(fields, "name")));
            entry.set_phone(opt_string(field_value(fields, "phone")));
            Value address = field_value(fields, "address");
            entry.set_address(address.is_object() ? address.object() : nullptr);
        };
        info.methods["get_name"] = [](Encodable& self, const std::vector<Value>&) {
            return Value(static_cast<AddressBookEntry&>(self).name());
        };
        info.methods["get_phone"] = [](Encodable& self, const std::vector<Value>&) {
            return Value(static_cast<AddressBookEntry&>(self).phone());
        };
        info.methods["set_phone"] = [](Encodable& self, const std::vector<Value>& args) {
            static_cast<AddressBookEntry&>(self).set_phone(args.at(0).as_string());
            return Value();
        };
        info.methods["get_address"] = [](Encodable& self, const std::vector<Value>&) {
            auto& entry = static_cast<AddressBookEntry&>(self);
            return entry.address() ? Value(entry.address()) : Value();
        };
        info.methods["set_address"] = [](Encodable& self, const std::vector<Value>& args) {
            static_cast<AddressBookEntry&>(self).set_address(args.at(0).object());
            return Value();
        };
        types.register_type("AddressBookEntry", std::move(info));
    }
    {
        TypeInfo info;
        info.create = [] { return std::make_shared<AddressBook>(); };
        info.load = [](Encodable& obj, const FieldList& fields) {
            auto& book = static_cast<AddressBook&>(obj);
            Value entries = field_value(fields, "entries");
            if (entries.is_list()) {
                for (const auto& e : entries.as_list()) {
                    if (e.is_object()) book.add(e.object());
                }
            }
        };
        info.methods["get_entry"] = [](Encodable& self, const std::vector<Value>& args) {
            auto entry = static_cast<AddressBook&>(self).find(args.at(0).as_string());
            return entry ? Value(entry) : Value();
        };
        info.methods["add_entry"] = [](Encodable& self, const std::vector<Value>& args) {
            static_cast<AddressBook&>(self).add(args.at(0).object());
            return Value();
        };
        info.methods["size"] = [](Encodable& self, const std::vector<Value>&) {
            return Value(static_cast<std::int64_t>(static_cast<AddressBook&>(self).size()));
        };
        types.register_type("AddressBook", std::move(info));
    }
}

bool ScenarioReport::all_passed() const {
    for (const auto& step : steps) {
        if (!step.passed) return false;
    }
    return true;
}

void ScenarioReport::print(std::ostream& out) const {
    for (const auto& step : steps) {
        out << (step.passed ? "PASS" : "FAIL") << " " << step.name;
        if (!step.passed && !step.detail.empty()) out << " (" << step.detail << ")";
        out << "\n";
    }
}

ScenarioReport run_pda_scenario(TransportMode mode, ManagerMode pda_mode) {
    ScenarioReport report;
    auto check = [&report](const std::string& name, bool ok, const std::string& detail = "") {
        report.steps.push_back({name, ok, detail});
    };

    Space desktop;
    Space pda;
    register_address_book_types(desktop.types());
    register_address_book_types(pda.types());
    // Returns are serialized by the desktop; it must listen to the PDA's
    // rules for the PDA to steer how it receives entries.
    desktop.policy().set_mode(ManagerMode::Cooperative);
    pda.policy().set_mode(pda_mode);

    auto alice = std::make_shared<AddressBookEntry>(
        "alice", "555-0100", std::make_shared<Address>("1 North St", "St Andrews"));
    auto book = std::make_shared<AddressBook>();
    book->add(alice);
    book->add(std::make_shared<AddressBookEntry>(
        "bob", "555-0199", std::make_shared<Address>("2 Market St", "Dundee")));
    RemoteReference book_ref = desktop.export_object(book);

    std::shared_ptr<Endpoint> desktop_ep;
    std::shared_ptr<Endpoint> pda_ep;
    std::unique_ptr<TcpListener> listener;
    if (mode == TransportMode::Tcp) {
        listener = std::make_unique<TcpListener>("127.0.0.1", 0);
        std::thread acceptor([&] { desktop_ep = listener->accept(); });
        pda_ep = tcp_connect("127.0.0.1", listener->port());
        acceptor.join();
    } else {
        auto [a, b] = in_memory_pair();
        desktop_ep = a;
        pda_ep = b;
    }
    auto desktop_conn = desktop.connect(desktop_ep, false);
    auto pda_conn = pda.connect(pda_ep, true);
    auto book_proxy = pda_conn->proxy_for(book_ref);

    // Phase 1: connected, entries by reference.
    pda.policy().store().set_class_policy("AddressBookEntry", PolicyMechanism::by_reference(),
                                          true);
    Value fetched = book_proxy->call("get_entry", {Value("alice")});
    auto as_proxy = fetched.is_object() ? std::dynamic_pointer_cast<Proxy>(fetched.object())
                                        : nullptr;
    check("phase1-fetch-is-reference", as_proxy != nullptr,
          "expected a proxy to the desktop entry");

    if (as_proxy) {
        as_proxy->call("set_phone", {Value("555-0111")});
        check("phase1-proxy-edit-visible-on-desktop", alice->phone() == "555-0111",
              "desktop phone is '" + alice->phone() + "'");
    } else {
        check("phase1-proxy-edit-visible-on-desktop", false, "no proxy to edit through");
    }

    // Phase 2: flip the rule at runtime and refetch by value.
    pda.policy().store().set_class_policy("AddressBookEntry", PolicyMechanism::by_value(), true);
    Value refetched = book_proxy->call("get_entry", {Value("alice")});
    auto copy = refetched.is_object()
                    ? std::dynamic_pointer_cast<AddressBookEntry>(refetched.object())
                    : nullptr;
    check("phase2-fetch-is-copy", copy != nullptr, "expected a local AddressBookEntry copy");

    if (copy) {
        alice->set_phone("555-0122");
        check("phase2-desktop-edit-invisible-on-pda", copy->phone() == "555-0111",
              "copy phone is '" + copy->phone() + "'");
        copy->set_phone("555-0133");
        check("phase2-pda-edit-invisible-on-desktop", alice->phone() == "555-0122",
              "desktop phone is '" + alice->phone() + "'");
    } else {
        check("phase2-desktop-edit-invisible-on-pda", false, "no copy fetched");
        check("phase2-pda-edit-invisible-on-desktop", false, "no copy fetched");
    }

    // The flipped rule governs new fetches only; the held proxy still
    // tracks the live desktop object.
    bool proxy_live = false;
    std::string detail;
    if (as_proxy) {
        try {
            Value phone = as_proxy->call("get_phone");
            proxy_live = phone.is_string() && phone.as_string() == alice->phone();
            if (!proxy_live) detail = "proxy sees '" + opt_string(phone) + "'";
        } catch (const Error& e) {
            detail = e.what();
        }
    }
    check("phase1-proxy-unaffected-by-rule-flip", proxy_live, detail);

    // Disconnect; by-value copies must remain usable offline.
    pda_conn->close();
    desktop_conn->close();
    if (listener) listener->close();
    check("offline-copy-usable", copy != nullptr && copy->phone() == "555-0133",
          "copy unusable after disconnect");
    bool proxy_fails_offline = false;
    if (as_proxy) {
        try {
            as_proxy->call("get_phone");
        } catch (const Error& e) {
            proxy_fails_offline = e.code() == ErrorCode::Unreachable;
        }
    }
    check("offline-proxy-unreachable", proxy_fails_offline,
          "proxy call should fail once disconnected");

    return report;
}

}  // namespace polyrpc::demo
