#include "polyrpc/control.hpp"

namespace polyrpc {

namespace {

class ManagerControl final : public Encodable {
public:
    explicit ManagerControl(Space& space) : space_(space) {}

    std::string type_name() const override { return kControlTypeName; }
    FieldList fields() const override { return {}; }

    Space& space() { return space_; }

private:
    Space& space_;
};

Space& space_of(Encodable& self) { return static_cast<ManagerControl&>(self).space(); }

const std::string& arg_str(const std::vector<Value>& args, std::size_t i) {
    if (i >= args.size() || !args[i].is_string()) {
        throw Error(ErrorCode::InvalidSelector, "expected string argument " + std::to_string(i));
    }
    return args[i].as_string();
}

std::int64_t arg_int(const std::vector<Value>& args, std::size_t i) {
    if (i >= args.size() || !args[i].is_int()) {
        throw Error(ErrorCode::InvalidSelector, "expected integer argument " + std::to_string(i));
    }
    return args[i].as_int();
}

bool arg_bool(const std::vector<Value>& args, std::size_t i) {
    if (i >= args.size() || !args[i].is_bool()) {
        throw Error(ErrorCode::InvalidSelector, "expected boolean argument " + std::to_string(i));
    }
    return args[i].as_bool();
}

DepthLimit depth_arg(const std::vector<Value>& args, std::size_t i) {
    std::int64_t d = arg_int(args, i);
    if (d < 0) return kUnboundedDepth;
    return static_cast<int>(d);
}

MethodTable control_methods() {
    MethodTable methods;
    methods["space_id"] = [](Encodable& self, const std::vector<Value>&) {
        return Value(space_of(self).id());
    };
    methods["set_class_policy"] = [](Encodable& self, const std::vector<Value>& args) {
        space_of(self).policy().store().set_class_policy(arg_str(args, 0), arg_str(args, 1),
                                                         arg_bool(args, 2));
        return Value();
    };
    methods["set_method_policy"] = [](Encodable& self, const std::vector<Value>& args) {
        space_of(self).policy().store().set_method_policy(
            arg_str(args, 0), arg_str(args, 1), arg_str(args, 2), arg_bool(args, 3),
            depth_arg(args, 4));
        return Value();
    };
    methods["set_param_policy"] = [](Encodable& self, const std::vector<Value>& args) {
        space_of(self).policy().store().set_param_policy(
            arg_str(args, 0), arg_str(args, 1), static_cast<int>(arg_int(args, 2)),
            arg_str(args, 3), arg_bool(args, 4), depth_arg(args, 5));
        return Value();
    };
    methods["set_default_policy"] = [](Encodable& self, const std::vector<Value>& args) {
        space_of(self).policy().store().set_default_policy(arg_str(args, 0));
        return Value();
    };
    methods["clear_rules"] = [](Encodable& self, const std::vector<Value>&) {
        space_of(self).policy().store().clear_rules();
        return Value();
    };
    methods["remove_rule"] = [](Encodable& self, const std::vector<Value>& args) {
        auto kind = rule_kind_from_string(arg_str(args, 0));
        if (!kind || *kind == RuleKind::Default) {
            throw Error(ErrorCode::InvalidSelector, "bad rule kind '" + arg_str(args, 0) + "'");
        }
        RuleSelector selector{*kind, arg_str(args, 1), arg_str(args, 2), std::nullopt};
        std::int64_t param = arg_int(args, 3);
        if (param >= 0) selector.param_index = static_cast<int>(param);
        return Value(space_of(self).policy().store().remove_rule(selector));
    };
    methods["set_mode"] = [](Encodable& self, const std::vector<Value>& args) {
        const std::string& mode = arg_str(args, 0);
        if (mode == "cooperative") space_of(self).policy().set_mode(ManagerMode::Cooperative);
        else if (mode == "autonomous") space_of(self).policy().set_mode(ManagerMode::Autonomous);
        else throw Error(ErrorCode::InvalidSelector, "bad mode '" + mode + "'");
        return Value();
    };
    methods["resolve"] = [](Encodable& self, const std::vector<Value>& args) {
        CallSite site;
        site.call_class = arg_str(args, 0);
        site.method = arg_str(args, 1);
        site.role = arg_str(args, 2) == "ret" ? Role::Return : Role::Argument;
        std::int64_t param = arg_int(args, 3);
        if (site.role == Role::Argument && param >= 0) site.param_index = static_cast<int>(param);
        site.actual_class = arg_str(args, 4);
        site.depth = static_cast<int>(arg_int(args, 5));
        TransmissionDecision d = space_of(self).policy().resolve(site);
        return Value(Value::List{Value(d.mechanism.name()), Value(to_string(d.dominant_kind)),
                                 Value(d.dominant_level), Value(d.overridable)});
    };
    return methods;
}

}  // namespace

RemoteReference install_manager_control(Space& space) {
    space.types().register_type(kControlTypeName,
                                TypeInfo{nullptr, nullptr, control_methods()});
    return space.export_object_at(kControlObjectId, std::make_shared<ManagerControl>(space));
}

}  // namespace polyrpc
