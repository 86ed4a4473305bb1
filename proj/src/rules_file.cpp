#include "polyrpc/rules_file.hpp"

#include <fstream>

namespace polyrpc {

namespace {

DepthLimit depth_of(const Json& entry) {
    if (!entry.contains("depth") || entry["depth"].is_null()) return kUnboundedDepth;
    if (entry["depth"].is_string()) {
        if (entry["depth"].get<std::string>() == "unbounded") return kUnboundedDepth;
        throw Error(ErrorCode::InvalidSelector, "bad depth value in rules file");
    }
    return entry["depth"].get<int>();
}

}  // namespace

std::size_t load_rules(const Json& doc, PolicyStore& store) {
    if (!doc.is_array()) {
        throw Error(ErrorCode::InvalidSelector, "rules document must be a JSON array");
    }
    std::size_t applied = 0;
    for (const auto& entry : doc) {
        const std::string kind = entry.at("kind").get<std::string>();
        PolicyMechanism mechanism =
            PolicyMechanism::register_mechanism(entry.at("mechanism").get<std::string>());
        if (kind == "default") {
            store.set_default_policy(mechanism);
        } else if (kind == "class") {
            store.set_class_policy(entry.at("class").get<std::string>(), mechanism,
                                   entry.value("overridable", true));
        } else if (kind == "method") {
            store.set_method_policy(entry.at("class").get<std::string>(),
                                    entry.at("method").get<std::string>(), mechanism,
                                    entry.value("overridable", true), depth_of(entry));
        } else if (kind == "param" || kind == "parameter") {
            store.set_param_policy(entry.at("class").get<std::string>(),
                                   entry.at("method").get<std::string>(),
                                   entry.at("param").get<int>(), mechanism,
                                   entry.value("overridable", true), depth_of(entry));
        } else {
            throw Error(ErrorCode::InvalidSelector, "unknown rule kind '" + kind + "'");
        }
        ++applied;
    }
    return applied;
}

std::size_t load_rules_file(const std::string& path, PolicyStore& store) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::InvalidSelector, "cannot open rules file '" + path + "'");
    Json doc = Json::parse(in, nullptr, false);
    if (doc.is_discarded()) {
        throw Error(ErrorCode::InvalidSelector, "rules file '" + path + "' is not valid JSON");
    }
    return load_rules(doc, store);
}

}  // namespace polyrpc
