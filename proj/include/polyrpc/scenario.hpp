#pragma once

#include <ostream>

#include "polyrpc/control.hpp"

namespace polyrpc::demo {

/// Address-book component model used by the demonstration scenario and the
/// end-to-end fixtures.
class Address final : public Encodable {
public:
    Address() = default;
    Address(std::string street, std::string city)
        : street_(std::move(street)), city_(std::move(city)) {}

    std::string type_name() const override { return "Address"; }
    FieldList fields() const override {
        return {{"street", Value(street_)}, {"city", Value(city_)}};
    }

    const std::string& street() const { return street_; }
    const std::string& city() const { return city_; }
    void set_street(std::string s) { street_ = std::move(s); }
    void set_city(std::string c) { city_ = std::move(c); }

private:
    std::string street_;
    std::string city_;
};

class AddressBookEntry final : public Encodable {
public:
    AddressBookEntry() = default;
    AddressBookEntry(std::string name, std::string phone, EncodablePtr address)
        : name_(std::move(name)), phone_(std::move(phone)), address_(std::move(address)) {}

    std::string type_name() const override { return "AddressBookEntry"; }
    FieldList fields() const override {
        return {{"name", Value(name_)},
                {"phone", Value(phone_)},
                {"address", address_ ? Value(address_) : Value()}};
    }

    const std::string& name() const { return name_; }
    const std::string& phone() const { return phone_; }
    const EncodablePtr& address() const { return address_; }
    void set_name(std::string n) { name_ = std::move(n); }
    void set_phone(std::string p) { phone_ = std::move(p); }
    void set_address(EncodablePtr a) { address_ = std::move(a); }

private:
    std::string name_;
    std::string phone_;
    EncodablePtr address_;  // an Address or a proxy to one
};

class AddressBook final : public Encodable {
public:
    std::string type_name() const override { return "AddressBook"; }
    FieldList fields() const override {
        Value::List entries(entries_.begin(), entries_.end());
        return {{"entries", Value(std::move(entries))}};
    }

    void add(EncodablePtr entry) { entries_.push_back(std::move(entry)); }
    EncodablePtr find(const std::string& name) const;
    std::size_t size() const { return entries_.size(); }

private:
    std::vector<EncodablePtr> entries_;
};

/// Registers Address, AddressBookEntry, and AddressBook with their method
/// tables and instantiators.
void register_address_book_types(TypeRegistry& types);

struct ScenarioReport {
    struct Step {
        std::string name;
        bool passed = false;
        std::string detail;
    };
    std::vector<Step> steps;

    bool all_passed() const;
    void print(std::ostream& out) const;  // one "PASS/FAIL step-name" line each
};

enum class TransportMode { InMemory, Tcp };

/// The connected/disconnected address-book demonstration: a PDA space first
/// fetches entries by reference (edits flow both ways instantly), then
/// flips its rule to by-value at runtime, refetches, and keeps usable
/// copies after the link is torn down.
ScenarioReport run_pda_scenario(TransportMode mode,
                                ManagerMode pda_mode = ManagerMode::Autonomous);

}  // namespace polyrpc::demo
