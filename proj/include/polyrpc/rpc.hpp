#pragma once

#include <atomic>
#include <future>
#include <map>
#include <mutex>
#include <thread>
#include <unordered_map>
#include <vector>

#include "polyrpc/codec.hpp"
#include "polyrpc/negotiation.hpp"
#include "polyrpc/transport.hpp"

namespace polyrpc {

/// Framed message exchanged between spaces. Responses echo the call_id of
/// their request.
struct Envelope {
    enum class Kind { Call, Result, Error, PolicyQuery, PolicyAnswer };

    Kind kind = Kind::Call;
    std::uint64_t call_id = 0;
    Json payload;

    Json to_json() const;
    std::string to_frame() const;
    static Envelope from_frame(const std::string& frame);  // throws ProtocolError
};

const char* to_string(Envelope::Kind kind) noexcept;

class Connection;
class Space;

/// Local stand-in for an object exported by another space. Method calls
/// dispatch over the connection; a proxy with no live connection throws
/// Unreachable at call time.
class Proxy final : public Encodable {
public:
    Proxy(RemoteReference ref, std::shared_ptr<Connection> connection)
        : ref_(std::move(ref)), connection_(std::move(connection)) {}

    std::string type_name() const override { return ref_.type_name; }
    FieldList fields() const override { return {}; }
    std::optional<RemoteReference> remote_identity() const override { return ref_; }

    const RemoteReference& ref() const { return ref_; }

    Value call(const std::string& method, std::vector<Value> args = {});

private:
    RemoteReference ref_;
    std::shared_ptr<Connection> connection_;
};

/// One address space: a policy manager, a type registry, and the export
/// registry that backs remote references. Exports are idempotent per object
/// identity and live until unexported.
class Space {
public:
    Space();

    const std::string& id() const { return id_; }
    PolicyManager& policy() { return policy_; }
    const PolicyManager& policy() const { return policy_; }
    TypeRegistry& types() { return types_; }
    const TypeRegistry& types() const { return types_; }

    RemoteReference export_object(const EncodablePtr& obj);  // throws NotDispatchable
    /// Reserved-id export (id 0 is the conventional manager-control slot).
    RemoteReference export_object_at(std::uint64_t object_id, const EncodablePtr& obj);
    bool unexport(const RemoteReference& ref);
    EncodablePtr find_exported(std::uint64_t object_id) const;
    std::size_t export_count() const;

    /// Wraps an endpoint and starts its reader. `initiator` disambiguates
    /// call_id parity so both directions can issue requests concurrently.
    std::shared_ptr<Connection> connect(std::shared_ptr<Endpoint> endpoint, bool initiator);

private:
    RemoteReference do_export(std::optional<std::uint64_t> fixed_id, const EncodablePtr& obj);

    std::string id_;
    PolicyManager policy_;
    TypeRegistry types_;

    mutable std::mutex exports_mutex_;
    std::unordered_map<std::uint64_t, EncodablePtr> exports_;
    std::unordered_map<const Encodable*, std::uint64_t> export_ids_;
    std::uint64_t next_object_id_ = 1;
};

/// A live channel between two spaces carrying calls, results, and policy
/// negotiation. One reader thread routes frames; inbound calls run on
/// worker threads so re-entrant traffic (callbacks, policy queries) cannot
/// deadlock the channel.
class Connection : public std::enable_shared_from_this<Connection> {
public:
    static constexpr std::chrono::milliseconds kPolicyQueryTimeout{2000};

    Connection(Space& space, std::shared_ptr<Endpoint> endpoint, bool initiator);
    ~Connection();

    Connection(const Connection&) = delete;
    Connection& operator=(const Connection&) = delete;

    void start();
    void close();
    bool alive() const;

    /// Caller-side remote invocation: encodes arguments under ARGUMENT
    /// policy, awaits the matching RESULT/ERROR, decodes the return.
    Value invoke(const RemoteReference& target, const std::string& method,
                 std::vector<Value> args);

    /// Asks the peer's policy manager for its dominant rule; nullopt on
    /// timeout or closed channel.
    std::optional<PolicyAnswer> query_policy(const PolicyQuery& query);

    std::shared_ptr<Proxy> proxy_for(const RemoteReference& ref);

    Space& space() { return space_; }

private:
    friend class Space;

    Envelope request(Envelope env, std::optional<std::chrono::milliseconds> timeout);
    void send_envelope(const Envelope& env);
    void reader_loop();
    void handle_call(Envelope env);
    void handle_policy_query(const Envelope& env);
    void settle(Envelope env);
    void fail_pending();

    Value decode_wire(const WireNode& node);
    WireNode encode_for_call(const Value& value, const EncodeSite& site);

    Space& space_;
    std::shared_ptr<Endpoint> endpoint_;
    std::atomic<std::uint64_t> next_call_id_;

    std::mutex pending_mutex_;
    std::map<std::uint64_t, std::shared_ptr<std::promise<Envelope>>> pending_;

    std::thread reader_;
    std::mutex workers_mutex_;
    std::vector<std::thread> workers_;
    std::atomic<bool> closing_{false};
};

}  // namespace polyrpc
