#include "polyrpc/rpc.hpp"

#include <random>
#include <sstream>

namespace polyrpc {

namespace {

constexpr std::chrono::milliseconds kInvokeTimeout{30000};

std::string random_space_id() {
    std::random_device rd;
    std::mt19937_64 gen(static_cast<std::uint64_t>(rd()) << 32 ^ rd());
    std::ostringstream out;
    out << std::hex;
    for (int i = 0; i < 2; ++i) {
        out.width(16);
        out.fill('0');
        out << gen();
    }
    return out.str();
}

const char* role_tag(Role role) { return role == Role::Argument ? "arg" : "ret"; }

Json query_to_json(const PolicyQuery& q) {
    Json j{{"class", q.call_class}, {"method", q.method}, {"role", role_tag(q.role)},
           {"actual", q.actual_class}, {"depth", q.depth}};
    if (q.param_index) j["param"] = *q.param_index;
    return j;
}

PolicyQuery query_from_json(const Json& j) {
    PolicyQuery q;
    q.call_class = j.at("class").get<std::string>();
    q.method = j.at("method").get<std::string>();
    q.role = j.at("role").get<std::string>() == "ret" ? Role::Return : Role::Argument;
    if (j.contains("param") && !j["param"].is_null()) q.param_index = j["param"].get<int>();
    q.actual_class = j.at("actual").get<std::string>();
    q.depth = j.at("depth").get<int>();
    return q;
}

Json answer_to_json(const PolicyAnswer& a) {
    return Json{{"mechanism", a.mechanism.name()},
                {"kind", to_string(a.dominant_kind)},
                {"level", a.dominant_level},
                {"overridable", a.overridable}};
}

PolicyAnswer answer_from_json(const Json& j) {
    PolicyAnswer a;
    // Mechanism names from the peer are interned locally on receipt.
    a.mechanism = PolicyMechanism::register_mechanism(j.at("mechanism").get<std::string>());
    a.dominant_kind =
        rule_kind_from_string(j.at("kind").get<std::string>()).value_or(RuleKind::Default);
    a.dominant_level = j.at("level").get<int>();
    a.overridable = j.at("overridable").get<bool>();
    return a;
}

/// Peer adapter caching answers per site key for the duration of one call.
class CachedPeer final : public PolicyPeer {
public:
    explicit CachedPeer(Connection& connection) : connection_(connection) {}

    std::optional<PolicyAnswer> query(const PolicyQuery& q) override {
        std::string key = q.call_class + "#" + q.method + "#" + role_tag(q.role) + "#" +
                          std::to_string(q.param_index.value_or(-1)) + "#" + q.actual_class +
                          "#" + std::to_string(q.depth);
        if (auto it = cache_.find(key); it != cache_.end()) return it->second;
        auto answer = connection_.query_policy(q);
        cache_.emplace(std::move(key), answer);
        return answer;
    }

private:
    Connection& connection_;
    std::map<std::string, std::optional<PolicyAnswer>> cache_;
};

}  // namespace

// ----------------------------------------------------------------- Envelope

const char* to_string(Envelope::Kind kind) noexcept {
    switch (kind) {
        case Envelope::Kind::Call: return "CALL";
        case Envelope::Kind::Result: return "RESULT";
        case Envelope::Kind::Error: return "ERROR";
        case Envelope::Kind::PolicyQuery: return "POLICY_QUERY";
        case Envelope::Kind::PolicyAnswer: return "POLICY_ANSWER";
    }
    return "ERROR";
}

Json Envelope::to_json() const {
    return Json{{"kind", to_string(kind)}, {"call_id", call_id}, {"payload", payload}};
}

std::string Envelope::to_frame() const { return to_json().dump(); }

Envelope Envelope::from_frame(const std::string& frame) {
    Json j = Json::parse(frame, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw Error(ErrorCode::ProtocolError, "frame is not a JSON object");
    }
    Envelope env;
    std::string kind;
    try {
        kind = j.at("kind").get<std::string>();
        env.call_id = j.at("call_id").get<std::uint64_t>();
        env.payload = j.at("payload");
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::ProtocolError, e.what());
    }
    if (kind == "CALL") env.kind = Kind::Call;
    else if (kind == "RESULT") env.kind = Kind::Result;
    else if (kind == "ERROR") env.kind = Kind::Error;
    else if (kind == "POLICY_QUERY") env.kind = Kind::PolicyQuery;
    else if (kind == "POLICY_ANSWER") env.kind = Kind::PolicyAnswer;
    else throw Error(ErrorCode::ProtocolError, "unknown envelope kind '" + kind + "'");
    return env;
}

// -------------------------------------------------------------------- Proxy

Value Proxy::call(const std::string& method, std::vector<Value> args) {
    if (!connection_ || !connection_->alive()) {
        throw Error(ErrorCode::Unreachable, "proxy for " + ref_.type_name + " has no live channel");
    }
    return connection_->invoke(ref_, method, std::move(args));
}

// -------------------------------------------------------------------- Space

Space::Space() : id_(random_space_id()) {}

RemoteReference Space::do_export(std::optional<std::uint64_t> fixed_id, const EncodablePtr& obj) {
    if (!obj) throw Error(ErrorCode::ExportError, "cannot export a null object");
    const std::string type = obj->type_name();
    if (!types_.is_dispatchable(type)) {
        throw Error(ErrorCode::NotDispatchable, "type '" + type + "' has no method table");
    }
    std::lock_guard lock(exports_mutex_);
    if (auto it = export_ids_.find(obj.get()); it != export_ids_.end()) {
        return RemoteReference{id_, it->second, type};
    }
    std::uint64_t object_id = fixed_id ? *fixed_id : next_object_id_++;
    exports_.emplace(object_id, obj);
    export_ids_.emplace(obj.get(), object_id);
    return RemoteReference{id_, object_id, type};
}

RemoteReference Space::export_object(const EncodablePtr& obj) { return do_export(std::nullopt, obj); }

RemoteReference Space::export_object_at(std::uint64_t object_id, const EncodablePtr& obj) {
    return do_export(object_id, obj);
}

bool Space::unexport(const RemoteReference& ref) {
    std::lock_guard lock(exports_mutex_);
    auto it = exports_.find(ref.object_id);
    if (it == exports_.end()) return false;
    export_ids_.erase(it->second.get());
    exports_.erase(it);
    return true;
}

EncodablePtr Space::find_exported(std::uint64_t object_id) const {
    std::lock_guard lock(exports_mutex_);
    auto it = exports_.find(object_id);
    return it == exports_.end() ? nullptr : it->second;
}

std::size_t Space::export_count() const {
    std::lock_guard lock(exports_mutex_);
    return exports_.size();
}

std::shared_ptr<Connection> Space::connect(std::shared_ptr<Endpoint> endpoint, bool initiator) {
    auto connection = std::make_shared<Connection>(*this, std::move(endpoint), initiator);
    connection->start();
    return connection;
}

// --------------------------------------------------------------- Connection

Connection::Connection(Space& space, std::shared_ptr<Endpoint> endpoint, bool initiator)
    : space_(space), endpoint_(std::move(endpoint)), next_call_id_(initiator ? 1 : 2) {}

Connection::~Connection() { close(); }

void Connection::start() {
    if (!reader_.joinable()) {
        reader_ = std::thread([self = shared_from_this()] { self->reader_loop(); });
    }
}

void Connection::close() {
    bool expected = false;
    if (closing_.compare_exchange_strong(expected, true)) {
        endpoint_->close();
    }
    if (reader_.joinable() && reader_.get_id() != std::this_thread::get_id()) reader_.join();
    std::vector<std::thread> workers;
    {
        std::lock_guard lock(workers_mutex_);
        workers.swap(workers_);
    }
    for (auto& w : workers) {
        if (w.get_id() != std::this_thread::get_id() && w.joinable()) w.join();
    }
    fail_pending();
}

bool Connection::alive() const { return !closing_.load() && !endpoint_->closed(); }

void Connection::send_envelope(const Envelope& env) {
    std::string frame = env.to_frame();
    if (frame.size() > kMaxFrameBytes) {
        throw Error(ErrorCode::FrameTooLarge,
                    "frame of " + std::to_string(frame.size()) + " bytes exceeds limit");
    }
    if (!endpoint_->send(frame)) {
        throw Error(ErrorCode::Unreachable, "channel is closed");
    }
}

Envelope Connection::request(Envelope env, std::optional<std::chrono::milliseconds> timeout) {
    env.call_id = next_call_id_.fetch_add(2);
    auto promise = std::make_shared<std::promise<Envelope>>();
    auto future = promise->get_future();
    {
        std::lock_guard lock(pending_mutex_);
        pending_.emplace(env.call_id, promise);
    }
    try {
        send_envelope(env);
    } catch (...) {
        std::lock_guard lock(pending_mutex_);
        pending_.erase(env.call_id);
        throw;
    }
    if (timeout && future.wait_for(*timeout) != std::future_status::ready) {
        std::lock_guard lock(pending_mutex_);
        pending_.erase(env.call_id);
        throw Error(ErrorCode::Unreachable, "request " + std::to_string(env.call_id) + " timed out");
    }
    return future.get();
}

void Connection::settle(Envelope env) {
    std::shared_ptr<std::promise<Envelope>> promise;
    {
        std::lock_guard lock(pending_mutex_);
        auto it = pending_.find(env.call_id);
        if (it == pending_.end()) return;  // late or duplicate response: dropped
        promise = it->second;
        pending_.erase(it);
    }
    promise->set_value(std::move(env));
}

void Connection::fail_pending() {
    std::map<std::uint64_t, std::shared_ptr<std::promise<Envelope>>> orphaned;
    {
        std::lock_guard lock(pending_mutex_);
        orphaned.swap(pending_);
    }
    for (auto& [id, promise] : orphaned) {
        promise->set_value(Envelope{Envelope::Kind::Error, id,
                                    Json{{"code", "Unreachable"}, {"message", "channel closed"}}});
    }
}

void Connection::reader_loop() {
    while (true) {
        auto frame = endpoint_->recv();
        if (!frame) break;
        Envelope env;
        try {
            env = Envelope::from_frame(*frame);
        } catch (const Error&) {
            continue;  // unparseable frame: nothing to correlate it with
        }
        switch (env.kind) {
            case Envelope::Kind::Call: {
                if (closing_.load()) break;
                std::lock_guard lock(workers_mutex_);
                workers_.emplace_back(
                    [self = shared_from_this(), e = std::move(env)]() mutable {
                        self->handle_call(std::move(e));
                    });
                break;
            }
            case Envelope::Kind::PolicyQuery:
                handle_policy_query(env);
                break;
            default:
                settle(std::move(env));
                break;
        }
    }
    fail_pending();
}

Value Connection::decode_wire(const WireNode& node) {
    RefResolver resolver = [this](const RemoteReference& ref) -> Value {
        if (ref.space_id == space_.id()) {
            // A reference coming home resolves to the object itself.
            auto local = space_.find_exported(ref.object_id);
            if (!local) {
                throw Error(ErrorCode::StaleReference,
                            "reference to unexported local object " +
                                std::to_string(ref.object_id));
            }
            return Value(local);
        }
        return Value(EncodablePtr(proxy_for(ref)));
    };
    return decode(node, resolver, space_.types());
}

WireNode Connection::encode_for_call(const Value& value, const EncodeSite& site) {
    CachedPeer peer(*this);
    PolicyFn decide = [this, &peer](const CallSite& call_site) {
        return space_.policy().evaluate_for_transmission(call_site, &peer);
    };
    ExportFn exporter = [this](const EncodablePtr& obj) { return space_.export_object(obj); };
    return encode(value, site, decide, exporter);
}

Value Connection::invoke(const RemoteReference& target, const std::string& method,
                         std::vector<Value> args) {
    Json wire_args = Json::array();
    for (std::size_t i = 0; i < args.size(); ++i) {
        EncodeSite site{target.type_name, method, Role::Argument, static_cast<int>(i)};
        wire_args.push_back(encode_for_call(args[i], site).to_json());
    }
    Envelope call{Envelope::Kind::Call, 0,
                  Json{{"target", reference_to_json(target)},
                       {"method", method},
                       {"args", std::move(wire_args)}}};
    Envelope reply = request(std::move(call), kInvokeTimeout);
    if (reply.kind == Envelope::Kind::Error) {
        throw Error(error_code_from_string(reply.payload.value("code", "RemoteError")),
                    reply.payload.value("message", "remote call failed"));
    }
    if (reply.kind != Envelope::Kind::Result) {
        throw Error(ErrorCode::ProtocolError, "unexpected reply kind");
    }
    try {
        return decode_wire(WireNode::from_json(reply.payload.at("value")));
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::MalformedWireTree, e.what());
    }
}

std::optional<PolicyAnswer> Connection::query_policy(const PolicyQuery& query) {
    if (!alive()) return std::nullopt;
    try {
        Envelope reply = request(Envelope{Envelope::Kind::PolicyQuery, 0, query_to_json(query)},
                                 kPolicyQueryTimeout);
        if (reply.kind != Envelope::Kind::PolicyAnswer) return std::nullopt;
        return answer_from_json(reply.payload);
    } catch (const Error&) {
        return std::nullopt;
    } catch (const Json::exception&) {
        return std::nullopt;
    }
}

std::shared_ptr<Proxy> Connection::proxy_for(const RemoteReference& ref) {
    return std::make_shared<Proxy>(ref, shared_from_this());
}

void Connection::handle_policy_query(const Envelope& env) {
    Envelope reply;
    reply.call_id = env.call_id;
    try {
        PolicyQuery query = query_from_json(env.payload);
        reply.kind = Envelope::Kind::PolicyAnswer;
        reply.payload = answer_to_json(space_.policy().answer_query(query));
    } catch (const std::exception& e) {
        reply.kind = Envelope::Kind::Error;
        reply.payload = Json{{"code", "ProtocolError"}, {"message", e.what()}};
    }
    try {
        send_envelope(reply);
    } catch (const Error&) {
        // Channel died underneath us; the peer will fall back locally.
    }
}

void Connection::handle_call(Envelope env) {
    Envelope reply;
    reply.call_id = env.call_id;
    try {
        RemoteReference target = reference_from_json(env.payload.at("target"));
        if (!target.space_id.empty() && target.space_id != space_.id()) {
            throw Error(ErrorCode::StaleReference,
                        "call addressed to space " + target.space_id);
        }
        EncodablePtr obj = space_.find_exported(target.object_id);
        if (!obj) {
            throw Error(ErrorCode::StaleReference,
                        "object " + std::to_string(target.object_id) + " is not exported");
        }
        const std::string method = env.payload.at("method").get<std::string>();
        const TypeInfo* info = space_.types().find(obj->type_name());
        if (!info) throw Error(ErrorCode::UnknownType, obj->type_name());
        auto fn = info->methods.find(method);
        if (fn == info->methods.end()) {
            throw Error(ErrorCode::NoSuchMethod, obj->type_name() + "." + method);
        }
        std::vector<Value> args;
        for (const auto& arg_json : env.payload.at("args")) {
            args.push_back(decode_wire(WireNode::from_json(arg_json)));
        }
        Value result;
        try {
            result = fn->second(*obj, args);
        } catch (const Error&) {
            throw;
        } catch (const std::exception& e) {
            throw Error(ErrorCode::RemoteError, e.what());
        }
        EncodeSite site{obj->type_name(), method, Role::Return, std::nullopt};
        reply.kind = Envelope::Kind::Result;
        reply.payload = Json{{"value", encode_for_call(result, site).to_json()}};
    } catch (const Error& e) {
        reply.kind = Envelope::Kind::Error;
        reply.payload = Json{{"code", to_string(e.code())}, {"message", e.what()}};
    } catch (const std::exception& e) {
        reply.kind = Envelope::Kind::Error;
        reply.payload = Json{{"code", "RemoteError"}, {"message", e.what()}};
    }
    try {
        send_envelope(reply);
    } catch (const Error&) {
        // Caller is gone; nothing useful to do with the reply.
    }
}

}  // namespace polyrpc
