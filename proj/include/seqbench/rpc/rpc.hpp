#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <mutex>
#include <thread>

#include "seqbench/rpc/wire.hpp"

namespace seqbench::rpc {

class RpcServer;

using MethodFn = std::function<WireValue(const std::vector<WireValue>&, RpcServer&)>;

struct MethodDesc {
  std::vector<WireSchema> params;
  WireSchema result;
  MethodFn invoke;
};

struct FieldDesc {
  WireSchema schema;
  std::function<WireValue()> get;
  std::function<void(const WireValue&)> set;  // null for read-only fields
};

// Method and field table for one remotable type; arguments are validated
// against the parameter schemas before the target is invoked.
class RemotableDescriptor {
 public:
  explicit RemotableDescriptor(std::string type_name) : type_name_(std::move(type_name)) {}

  RemotableDescriptor& method(const std::string& name, std::vector<WireSchema> params,
                              WireSchema result, MethodFn invoke);
  RemotableDescriptor& field(const std::string& name, WireSchema schema,
                             std::function<WireValue()> get,
                             std::function<void(const WireValue&)> set = nullptr);

  const std::string& type_name() const { return type_name_; }
  const std::map<std::string, MethodDesc>& methods() const { return methods_; }
  const std::map<std::string, FieldDesc>& fields() const { return fields_; }

 private:
  std::string type_name_;
  std::map<std::string, MethodDesc> methods_;
  std::map<std::string, FieldDesc> fields_;
};

// Wraps target objects and serves them over HTTP: one POST endpoint, body
// {op, target_id, method|field, args}, response {ok, value | error}.
// Invocations on the same instance are serialized; different instances may
// run concurrently.
class RpcServer {
 public:
  // port 0 binds an ephemeral port. A non-empty auth token is required of
  // every request via the X-Auth-Token header.
  RpcServer(std::string host, int port, std::string auth_token = "");
  ~RpcServer();

  RpcServer(const RpcServer&) = delete;
  RpcServer& operator=(const RpcServer&) = delete;

  // The target object must outlive the server; keep_alive holds it.
  std::int64_t register_target(RemotableDescriptor descriptor,
                               std::shared_ptr<void> keep_alive = nullptr);

  void start();
  void stop();
  bool running() const { return running_; }

  int port() const { return port_; }
  std::string address() const { return host_ + ":" + std::to_string(port_); }

  WireValue handle_for(std::int64_t instance_id) const;

 private:
  struct TargetEntry {
    RemotableDescriptor descriptor;
    std::shared_ptr<void> keep_alive;
    std::unique_ptr<std::mutex> invoke_mutex;
  };

  Json dispatch(const Json& request);

  std::string host_;
  int port_;
  std::string auth_token_;
  std::atomic<bool> running_{false};
  std::unique_ptr<class ServerImpl> impl_;
  std::thread listen_thread_;
  mutable std::mutex registry_mutex_;
  std::map<std::int64_t, TargetEntry> targets_;
  std::int64_t next_id_ = 1;
};

struct TransportError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The remote target raised or rejected the call; carries the remote
// diagnostic.
struct RemoteError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thin caller side: serializes arguments, posts them to the owning server and
// decodes the result. Safe to share across threads.
class RpcClient {
 public:
  explicit RpcClient(std::string address, std::string auth_token = "");

  WireValue call(std::int64_t target_id, const std::string& method,
                 const std::vector<WireValue>& args) const;
  WireValue get_field(std::int64_t target_id, const std::string& field) const;
  void set_field(std::int64_t target_id, const std::string& field, const WireValue& value) const;

  const std::string& address() const { return address_; }
  const std::string& auth_token() const { return auth_token_; }

 private:
  Json roundtrip(const Json& request) const;

  std::string address_;
  std::string auth_token_;
};

}  // namespace seqbench::rpc
