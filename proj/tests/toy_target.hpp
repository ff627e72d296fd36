#pragma once

// Toy stateful remotable used by the transparency tests: arithmetic, a
// mutable label field, and child objects reachable only through chained
// calls. Shared by the rpc unit tests and the acceptance suite.

#include <memory>
#include <string>
#include <vector>

#include "seqbench/rpc/rpc.hpp"

namespace toy {

using seqbench::rpc::RemotableDescriptor;
using seqbench::rpc::RpcClient;
using seqbench::rpc::RpcServer;
using seqbench::rpc::WireHandle;
using seqbench::rpc::WireSchema;
using seqbench::rpc::WireValue;

struct Accumulator {
  std::int64_t value = 0;
  std::string label = "root";
  std::vector<std::shared_ptr<Accumulator>> children;

  std::int64_t add(std::int64_t x) { return value += x; }
  std::int64_t mul(std::int64_t x) { return value *= x; }
  std::shared_ptr<Accumulator> make_child(const std::string& child_label) {
    auto child = std::make_shared<Accumulator>();
    child->label = child_label;
    child->value = value;
    children.push_back(child);
    return child;
  }
};

inline std::int64_t register_accumulator(RpcServer& server, std::shared_ptr<Accumulator> acc) {
  RemotableDescriptor desc("Accumulator");
  Accumulator* target = acc.get();
  desc.method("add", {WireSchema::integer()}, WireSchema::integer(),
              [target](const std::vector<WireValue>& args, RpcServer&) {
                return WireValue::integer(target->add(args[0].as_int()));
              });
  desc.method("mul", {WireSchema::integer()}, WireSchema::integer(),
              [target](const std::vector<WireValue>& args, RpcServer&) {
                return WireValue::integer(target->mul(args[0].as_int()));
              });
  desc.method("make_child", {WireSchema::text()}, WireSchema::handle_to("Accumulator"),
              [target](const std::vector<WireValue>& args, RpcServer& server) {
                auto child = target->make_child(args[0].as_text());
                std::int64_t id = register_accumulator(server, child);
                return server.handle_for(id);
              });
  desc.field(
      "label", WireSchema::text(), [target] { return WireValue::text(target->label); },
      [target](const WireValue& v) { target->label = v.as_text(); });
  desc.field("value", WireSchema::integer(),
             [target] { return WireValue::integer(target->value); });
  return server.register_target(std::move(desc), acc);
}

// Caller-side mirror; chained handles materialize as new mirrors without any
// explicit construction at the call site.
class AccumulatorClient {
 public:
  AccumulatorClient(const WireHandle& handle, std::string token = "")
      : client_(handle.address, std::move(token)), id_(handle.instance_id) {}

  std::int64_t add(std::int64_t x) {
    return client_.call(id_, "add", {WireValue::integer(x)}).as_int();
  }
  std::int64_t mul(std::int64_t x) {
    return client_.call(id_, "mul", {WireValue::integer(x)}).as_int();
  }
  AccumulatorClient make_child(const std::string& label) {
    WireValue handle = client_.call(id_, "make_child", {WireValue::text(label)});
    return AccumulatorClient(handle.as_handle(), client_.auth_token());
  }
  std::string label() { return client_.get_field(id_, "label").as_text(); }
  void set_label(const std::string& v) { client_.set_field(id_, "label", WireValue::text(v)); }
  std::int64_t value() { return client_.get_field(id_, "value").as_int(); }

  RpcClient& raw() { return client_; }
  std::int64_t id() const { return id_; }

 private:
  RpcClient client_;
  std::int64_t id_;
};

}  // namespace toy
