#include <csignal>
#include <iostream>

#include <CLI11.hpp>

#include "polyrpc/control.hpp"
#include "polyrpc/rules_file.hpp"
#include "polyrpc/scenario.hpp"

namespace {

using namespace polyrpc;

std::pair<std::string, std::uint16_t> split_addr(const std::string& addr) {
    auto colon = addr.rfind(':');
    if (colon == std::string::npos) {
        throw Error(ErrorCode::InvalidSelector, "address must be host:port");
    }
    return {addr.substr(0, colon),
            static_cast<std::uint16_t>(std::stoul(addr.substr(colon + 1)))};
}

/// Control-object reference on the space behind `addr`. Empty space id means
/// "whichever space answers this connection".
RemoteReference control_ref() { return RemoteReference{"", kControlObjectId, kControlTypeName}; }

Value json_to_value(const Json& j) {
    if (j.is_null()) return Value();
    if (j.is_boolean()) return Value(j.get<bool>());
    if (j.is_number_integer()) return Value(j.get<std::int64_t>());
    if (j.is_number()) return Value(j.get<double>());
    if (j.is_string()) return Value(j.get<std::string>());
    if (j.is_array()) {
        Value::List list;
        for (const auto& e : j) list.push_back(json_to_value(e));
        return Value(std::move(list));
    }
    throw Error(ErrorCode::EncodingError, "CLI arguments support primitives, null, and lists");
}

Json value_to_json(const Value& v) {
    if (v.is_null()) return nullptr;
    if (v.is_bool()) return v.as_bool();
    if (v.is_int()) return v.as_int();
    if (v.is_double()) return v.as_double();
    if (v.is_string()) return v.as_string();
    if (v.is_list()) {
        Json arr = Json::array();
        for (const auto& e : v.as_list()) arr.push_back(value_to_json(e));
        return arr;
    }
    const auto& obj = v.object();
    if (auto remote = obj->remote_identity()) return reference_to_json(*remote);
    Json fields = Json::object();
    for (const auto& [name, field] : obj->fields()) fields[name] = value_to_json(field);
    return Json{{"type", obj->type_name()}, {"fields", std::move(fields)}};
}

std::shared_ptr<Connection> connect_to(Space& space, const std::string& addr) {
    auto [host, port] = split_addr(addr);
    return space.connect(tcp_connect(host, port), true);
}

int cmd_serve(const std::string& addr, const std::string& rules_path, bool cooperative,
              const std::string& default_mechanism) {
    Space space;
    demo::register_address_book_types(space.types());
    install_manager_control(space);
    if (cooperative) space.policy().set_mode(ManagerMode::Cooperative);
    if (!default_mechanism.empty()) {
        space.policy().store().set_default_policy(
            PolicyMechanism::register_mechanism(default_mechanism));
    }
    if (!rules_path.empty()) {
        std::size_t n = load_rules_file(rules_path, space.policy().store());
        std::cerr << "loaded " << n << " rule(s) from " << rules_path << "\n";
    }
    auto [host, port] = split_addr(addr);
    TcpListener listener(host, port);
    std::cout << "space " << space.id() << " listening on " << host << ":" << listener.port()
              << " (control object id " << kControlObjectId << ")" << std::endl;

    std::vector<std::shared_ptr<Connection>> connections;
    while (auto endpoint = listener.accept()) {
        connections.push_back(space.connect(endpoint, false));
    }
    for (auto& c : connections) c->close();
    return 0;
}

int cmd_call(const std::string& addr, const std::string& ref_text, const std::string& method,
             const std::string& args_text) {
    Space space;
    demo::register_address_book_types(space.types());
    auto connection = connect_to(space, addr);

    RemoteReference target;
    Json ref_json = Json::parse(ref_text, nullptr, false);
    if (ref_json.is_object()) {
        target = reference_from_json(ref_json);
    } else if (ref_json.is_number_unsigned()) {
        target = RemoteReference{"", ref_json.get<std::uint64_t>(), ""};
    } else {
        std::cerr << "--ref must be a reference JSON object or a bare object id\n";
        return 2;
    }

    Json args_json = Json::parse(args_text, nullptr, false);
    if (!args_json.is_array()) {
        std::cerr << "--args must be a JSON array\n";
        return 2;
    }
    std::vector<Value> args;
    for (const auto& a : args_json) args.push_back(json_to_value(a));

    Value result = connection->invoke(target, method, std::move(args));
    std::cout << value_to_json(result).dump() << std::endl;
    connection->close();
    return 0;
}

int run_control(const std::string& addr, const std::string& method, std::vector<Value> args) {
    Space space;
    auto connection = connect_to(space, addr);
    Value result = connection->invoke(control_ref(), method, std::move(args));
    if (!result.is_null()) std::cout << value_to_json(result).dump() << std::endl;
    connection->close();
    return 0;
}

int cmd_resolve(const std::string& addr, const std::string& site_text) {
    Json site = Json::parse(site_text, nullptr, false);
    if (!site.is_object()) {
        std::cerr << "--site must be a JSON object\n";
        return 2;
    }
    std::vector<Value> args{Value(site.value("class", "")),
                            Value(site.value("method", "")),
                            Value(site.value("role", "arg")),
                            Value(static_cast<std::int64_t>(site.value("param", -1))),
                            Value(site.value("actual", "")),
                            Value(static_cast<std::int64_t>(site.value("depth", 0)))};
    Space space;
    auto connection = connect_to(space, addr);
    Value result = connection->invoke(control_ref(), "resolve", std::move(args));
    const auto& parts = result.as_list();
    std::cout << "mechanism=" << parts.at(0).as_string() << " kind=" << parts.at(1).as_string()
              << " level=" << parts.at(2).as_int()
              << " overridable=" << (parts.at(3).as_bool() ? "true" : "false") << std::endl;
    connection->close();
    return 0;
}

int cmd_scenario(bool tcp) {
    auto report = demo::run_pda_scenario(tcp ? demo::TransportMode::Tcp
                                             : demo::TransportMode::InMemory);
    report.print(std::cout);
    return report.all_passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"transmission-policy middleware"};
    app.require_subcommand(1);

    std::string addr, rules_path, default_mechanism, ref_text, method, args_text = "[]";
    std::string site_text, mechanism, class_name, method_name;
    std::string scenario_name;
    bool cooperative = false, tcp = false, overridable = true;
    int param_index = 0;
    int depth = -1;

    auto* serve = app.add_subcommand("serve", "run an address space");
    serve->add_option("--addr", addr, "host:port to listen on")->required();
    serve->add_option("--rules", rules_path, "JSON rule file to load");
    serve->add_flag("--cooperative", cooperative, "consult the remote policy manager");
    serve->add_option("--default", default_mechanism, "default mechanism name");

    auto* call = app.add_subcommand("call", "invoke a method on a remote object");
    call->add_option("--addr", addr)->required();
    call->add_option("--ref", ref_text, "reference JSON or bare object id")->required();
    call->add_option("--method", method)->required();
    call->add_option("--args", args_text, "JSON array of arguments");

    auto* setp = app.add_subcommand("set-policy", "install a rule on a live space");
    setp->add_option("--addr", addr)->required();
    setp->require_subcommand(1);
    auto add_common = [&](CLI::App* sub, bool with_method, bool with_param) {
        sub->add_option("--class", class_name)->required();
        if (with_method) sub->add_option("--method", method_name)->required();
        if (with_param) sub->add_option("--param", param_index)->required();
        sub->add_option("--mechanism", mechanism)->required();
        sub->add_flag("--overridable,!--no-overridable", overridable);
        if (with_method) sub->add_option("--depth", depth, "depth bound (-1 = unbounded)");
    };
    add_common(setp->add_subcommand("class"), false, false);
    add_common(setp->add_subcommand("method"), true, false);
    add_common(setp->add_subcommand("param"), true, true);
    auto* set_default = setp->add_subcommand("default");
    set_default->add_option("--mechanism", mechanism)->required();

    auto* resolve_cmd = app.add_subcommand("resolve", "print a space's transmission decision");
    resolve_cmd->add_option("--addr", addr)->required();
    resolve_cmd->add_option("--site", site_text, "JSON call site")->required();

    auto* scenario = app.add_subcommand("scenario", "run a demonstration");
    scenario->add_option("name", scenario_name, "scenario name (pda)")->required();
    scenario->add_flag("--tcp", tcp, "run over TCP loopback instead of in-memory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (serve->parsed()) return cmd_serve(addr, rules_path, cooperative, default_mechanism);
        if (call->parsed()) return cmd_call(addr, ref_text, method, args_text);
        if (setp->parsed()) {
            PolicyMechanism::register_mechanism(mechanism);
            if (setp->get_subcommand("class")->parsed()) {
                return run_control(addr, "set_class_policy",
                                   {Value(class_name), Value(mechanism), Value(overridable)});
            }
            if (setp->get_subcommand("method")->parsed()) {
                return run_control(addr, "set_method_policy",
                                   {Value(class_name), Value(method_name), Value(mechanism),
                                    Value(overridable), Value(depth)});
            }
            if (setp->get_subcommand("param")->parsed()) {
                return run_control(addr, "set_param_policy",
                                   {Value(class_name), Value(method_name), Value(param_index),
                                    Value(mechanism), Value(overridable), Value(depth)});
            }
            return run_control(addr, "set_default_policy", {Value(mechanism)});
        }
        if (resolve_cmd->parsed()) return cmd_resolve(addr, site_text);
        if (scenario->parsed()) {
            if (scenario_name != "pda") {
                std::cerr << "unknown scenario '" << scenario_name << "'\n";
                return 2;
            }
            return cmd_scenario(tcp);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
