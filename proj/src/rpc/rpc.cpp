#include "seqbench/rpc/rpc.hpp"

#include <httplib.h>

namespace seqbench::rpc {

RemotableDescriptor& RemotableDescriptor::method(const std::string& name,
                                                 std::vector<WireSchema> params, WireSchema result,
                                                 MethodFn invoke) {
  methods_[name] = MethodDesc{std::move(params), std::move(result), std::move(invoke)};
  return *this;
}

RemotableDescriptor& RemotableDescriptor::field(const std::string& name, WireSchema schema,
                                                std::function<WireValue()> get,
                                                std::function<void(const WireValue&)> set) {
  fields_[name] = FieldDesc{std::move(schema), std::move(get), std::move(set)};
  return *this;
}

class ServerImpl {
 public:
  httplib::Server server;
};

RpcServer::RpcServer(std::string host, int port, std::string auth_token)
    : host_(std::move(host)), port_(port), auth_token_(std::move(auth_token)),
      impl_(std::make_unique<ServerImpl>()) {}

RpcServer::~RpcServer() { stop(); }

std::int64_t RpcServer::register_target(RemotableDescriptor descriptor,
                                        std::shared_ptr<void> keep_alive) {
  std::lock_guard lock(registry_mutex_);
  std::int64_t id = next_id_++;
  targets_.emplace(id, TargetEntry{std::move(descriptor), std::move(keep_alive),
                                   std::make_unique<std::mutex>()});
  return id;
}

WireValue RpcServer::handle_for(std::int64_t instance_id) const {
  std::lock_guard lock(registry_mutex_);
  auto it = targets_.find(instance_id);
  if (it == targets_.end()) {
    throw std::invalid_argument("no registered target with id " + std::to_string(instance_id));
  }
  return WireValue::handle({it->second.descriptor.type_name(), instance_id, address()});
}

Json RpcServer::dispatch(const Json& request) {
  auto fail = [](const std::string& message) {
    return Json{{"ok", false}, {"error", message}};
  };

  std::string op;
  std::int64_t target_id = 0;
  try {
    op = request.at("op").get<std::string>();
    target_id = request.at("target_id").get<std::int64_t>();
  } catch (const std::exception& e) {
    return fail(std::string("malformed request envelope: ") + e.what());
  }

  TargetEntry* entry = nullptr;
  {
    std::lock_guard lock(registry_mutex_);
    auto it = targets_.find(target_id);
    if (it == targets_.end()) {
      return fail("unknown target instance " + std::to_string(target_id));
    }
    entry = &it->second;
  }

  if (op == "call") {
    std::string method_name;
    std::vector<WireValue> args;
    try {
      method_name = request.at("method").get<std::string>();
      for (const auto& arg : request.at("args")) args.push_back(WireValue::from_json(arg));
    } catch (const std::exception& e) {
      return fail(std::string("malformed call request: ") + e.what());
    }
    auto it = entry->descriptor.methods().find(method_name);
    if (it == entry->descriptor.methods().end()) {
      return fail("unknown method '" + method_name + "' on " + entry->descriptor.type_name());
    }
    const MethodDesc& method = it->second;
    if (args.size() != method.params.size()) {
      return fail("method '" + method_name + "' expects " +
                  std::to_string(method.params.size()) + " arguments, got " +
                  std::to_string(args.size()));
    }
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (auto err = validate_value(args[i], method.params[i])) {
        return fail("argument " + std::to_string(i) + " of '" + method_name + "': " + *err);
      }
    }
    try {
      std::lock_guard invoke_lock(*entry->invoke_mutex);
      WireValue result = method.invoke(args, *this);
      if (auto err = validate_value(result, method.result)) {
        return fail("result of '" + method_name + "' violates its schema: " + *err);
      }
      return Json{{"ok", true}, {"value", result.to_json()}};
    } catch (const std::exception& e) {
      return fail("remote invocation failed: " + std::string(e.what()));
    }
  }

  if (op == "get" || op == "set") {
    std::string field_name;
    try {
      field_name = request.at("field").get<std::string>();
    } catch (const std::exception& e) {
      return fail(std::string("malformed field request: ") + e.what());
    }
    auto it = entry->descriptor.fields().find(field_name);
    if (it == entry->descriptor.fields().end()) {
      return fail("unknown field '" + field_name + "' on " + entry->descriptor.type_name());
    }
    const FieldDesc& field = it->second;
    try {
      std::lock_guard invoke_lock(*entry->invoke_mutex);
      if (op == "get") {
        return Json{{"ok", true}, {"value", field.get().to_json()}};
      }
      if (!field.set) return fail("field '" + field_name + "' is read-only");
      WireValue value = WireValue::from_json(request.at("value"));
      if (auto err = validate_value(value, field.schema)) {
        return fail("value for field '" + field_name + "': " + *err);
      }
      field.set(value);
      return Json{{"ok", true}, {"value", WireValue::null().to_json()}};
    } catch (const std::exception& e) {
      return fail("remote field access failed: " + std::string(e.what()));
    }
  }

  return fail("unsupported op '" + op + "'");
}

void RpcServer::start() {
  if (running_) return;
  impl_->server.Post("/rpc", [this](const httplib::Request& req, httplib::Response& res) {
    if (!auth_token_.empty() && req.get_header_value("X-Auth-Token") != auth_token_) {
      res.status = 401;
      res.set_content(Json{{"ok", false}, {"error", "invalid auth token"}}.dump(),
                      "application/json");
      return;
    }
    Json reply;
    try {
      reply = dispatch(Json::parse(req.body));
    } catch (const std::exception& e) {
      reply = Json{{"ok", false}, {"error", std::string("malformed request body: ") + e.what()}};
    }
    res.set_content(reply.dump(), "application/json");
  });

  if (port_ == 0) {
    port_ = impl_->server.bind_to_any_port(host_);
    if (port_ <= 0) throw std::runtime_error("cannot bind rpc server on " + host_);
  } else {
    if (!impl_->server.bind_to_port(host_, port_)) {
      throw std::runtime_error("cannot bind rpc server on " + address());
    }
  }
  running_ = true;
  listen_thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void RpcServer::stop() {
  if (!running_) return;
  running_ = false;
  impl_->server.stop();
  if (listen_thread_.joinable()) listen_thread_.join();
}

RpcClient::RpcClient(std::string address, std::string auth_token)
    : address_(std::move(address)), auth_token_(std::move(auth_token)) {}

Json RpcClient::roundtrip(const Json& request) const {
  httplib::Client client("http://" + address_);
  client.set_connection_timeout(10, 0);
  client.set_read_timeout(120, 0);
  httplib::Headers headers;
  if (!auth_token_.empty()) headers.emplace("X-Auth-Token", auth_token_);
  auto res = client.Post("/rpc", headers, request.dump(), "application/json");
  if (!res) {
    throw TransportError("cannot reach rpc server at " + address_ + ": " +
                         httplib::to_string(res.error()));
  }
  Json reply;
  try {
    reply = Json::parse(res->body);
  } catch (const std::exception& e) {
    throw TransportError("malformed rpc response from " + address_ + ": " + e.what());
  }
  if (!reply.value("ok", false)) {
    throw RemoteError(reply.value("error", std::string("unknown remote error")));
  }
  return reply;
}

WireValue RpcClient::call(std::int64_t target_id, const std::string& method,
                          const std::vector<WireValue>& args) const {
  Json encoded_args = Json::array();
  for (const auto& arg : args) encoded_args.push_back(arg.to_json());
  Json reply = roundtrip(
      {{"op", "call"}, {"target_id", target_id}, {"method", method}, {"args", encoded_args}});
  return WireValue::from_json(reply.at("value"));
}

WireValue RpcClient::get_field(std::int64_t target_id, const std::string& field) const {
  Json reply = roundtrip({{"op", "get"}, {"target_id", target_id}, {"field", field}});
  return WireValue::from_json(reply.at("value"));
}

void RpcClient::set_field(std::int64_t target_id, const std::string& field,
                          const WireValue& value) const {
  roundtrip({{"op", "set"}, {"target_id", target_id}, {"field", field},
             {"value", value.to_json()}});
}

}  // namespace seqbench::rpc
