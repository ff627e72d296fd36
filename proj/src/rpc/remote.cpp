#include "seqbench/rpc/remote.hpp"

#include "seqbench/serialize.hpp"

namespace seqbench::rpc {

namespace {

using seqbench::Json;

// Backend failures travel inside the result map so mirrors can rethrow them
// with the right type; everything else surfaces as RemoteError.
WireValue pack_backend_error(const std::string& message) {
  return WireValue::map({{"backend_error", WireValue::text(message)}});
}

void rethrow_backend_error(const std::map<std::string, WireValue>& result) {
  auto it = result.find("backend_error");
  if (it != result.end()) throw EnvironmentBackendError(it->second.as_text());
}

}  // namespace

std::int64_t register_environment(RpcServer& server, std::shared_ptr<Environment> environment,
                                  std::optional<WireHandle> factory_handle) {
  RemotableDescriptor desc("Environment");
  Environment* env = environment.get();

  desc.method("kind", {}, WireSchema::text(), [env](const auto&, RpcServer&) {
    return WireValue::text(to_string(env->kind()));
  });

  desc.method("reset", {WireSchema::text()}, WireSchema::map_of(WireSchema::text()),
              [env](const std::vector<WireValue>& args, RpcServer&) {
                TaskInstance task = task_from_json(Json::parse(args[0].as_text()));
                try {
                  ChatHistory history = env->reset(task);
                  return WireValue::map(
                      {{"history", WireValue::text(history_to_json(history).dump())}});
                } catch (const EnvironmentBackendError& e) {
                  return pack_backend_error(e.what());
                }
              });

  desc.method("interact", {WireSchema::text()}, WireSchema::map_of(WireSchema::any_value()),
              [env](const std::vector<WireValue>& args, RpcServer&) {
                ParsedAction action = action_from_json(Json::parse(args[0].as_text()));
                try {
                  InteractResult result = env->interact(action);
                  std::map<std::string, WireValue> out;
                  out["terminal"] = WireValue::boolean(result.terminal);
                  if (result.observation) {
                    out["observation"] = WireValue::text(*result.observation);
                  }
                  return WireValue::map(std::move(out));
                } catch (const EnvironmentBackendError& e) {
                  return pack_backend_error(e.what());
                }
              });

  desc.method("complete", {}, WireSchema::map_of(WireSchema::any_value()),
              [env](const auto&, RpcServer&) {
                try {
                  return WireValue::map({{"reward", WireValue::integer(env->complete())}});
                } catch (const EnvironmentBackendError& e) {
                  return pack_backend_error(e.what());
                }
              });

  desc.method("calculate_metric", {WireSchema::text(), WireSchema::text()}, WireSchema::text(),
              [env](const std::vector<WireValue>& args, RpcServer&) {
                std::vector<Session> sessions;
                for (const auto& item : Json::parse(args[0].as_text())) {
                  sessions.push_back(session_from_json(item));
                }
                std::vector<TaskInstance> tasks;
                for (const auto& item : Json::parse(args[1].as_text())) {
                  tasks.push_back(task_from_json(item));
                }
                MetricsReport report = env->calculate_metric(sessions, tasks);
                return WireValue::text(metrics_to_json(report).dump());
              });

  desc.method("release", {}, WireSchema::null_value(), [env](const auto&, RpcServer&) {
    env->release();
    return WireValue::null();
  });

  if (factory_handle) {
    WireHandle handle = *factory_handle;
    desc.method("history_factory", {}, WireSchema::handle_to("HistoryItemFactory"),
                [handle](const auto&, RpcServer&) { return WireValue::handle(handle); });
  }

  return server.register_target(std::move(desc), environment);
}

std::int64_t register_history_factory(RpcServer& server,
                                      std::shared_ptr<HistoryItemFactory> factory) {
  RemotableDescriptor desc("HistoryItemFactory");
  HistoryItemFactory* target = factory.get();

  desc.method("construct", {WireSchema::text(), WireSchema::text()}, WireSchema::text(),
              [target](const std::vector<WireValue>& args, RpcServer&) {
                ChatHistory history = target->construct(env_kind_from_string(args[0].as_text()),
                                                        args[1].as_text());
                return WireValue::text(history_to_json(history).dump());
              });

  desc.field(
      "preamble_suffix", WireSchema::text(),
      [target] { return WireValue::text(target->preamble_suffix()); },
      [target](const WireValue& value) { target->set_preamble_suffix(value.as_text()); });

  return server.register_target(std::move(desc), factory);
}

std::int64_t register_sql_backend(RpcServer& server, std::shared_ptr<SqlBackend> backend) {
  RemotableDescriptor desc("SqlBackend");
  SqlBackend* target = backend.get();

  desc.method("dialect", {}, WireSchema::text(), [target](const auto&, RpcServer&) {
    return WireValue::text(target->dialect());
  });
  desc.method("execute", {WireSchema::text()}, WireSchema::map_of(WireSchema::any_value()),
              [target](const std::vector<WireValue>& args, RpcServer&) {
                SqlResult result = target->execute(args[0].as_text());
                return WireValue::map(
                    {{"ok", WireValue::boolean(result.ok)},
                     {"is_read", WireValue::boolean(result.is_read)},
                     {"rows", WireValue::text(db_rows_to_json(result.rows).dump())},
                     {"error", WireValue::text(result.error)}});
              });

  return server.register_target(std::move(desc), backend);
}

std::int64_t register_exec_backend(RpcServer& server, std::shared_ptr<ExecBackend> backend) {
  RemotableDescriptor desc("ExecBackend");
  ExecBackend* target = backend.get();

  desc.method("fresh", {}, WireSchema::null_value(), [target](const auto&, RpcServer&) {
    target->fresh();
    return WireValue::null();
  });
  desc.method("run", {WireSchema::text()}, WireSchema::map_of(WireSchema::any_value()),
              [target](const std::vector<WireValue>& args, RpcServer&) {
                ExecResult result = target->run(args[0].as_text());
                return WireValue::map({{"stdout", WireValue::text(result.stdout_text)},
                                       {"exit_code", WireValue::integer(result.exit_code)}});
              });
  desc.method("destroy", {}, WireSchema::null_value(), [target](const auto&, RpcServer&) {
    target->destroy();
    return WireValue::null();
  });

  return server.register_target(std::move(desc), backend);
}

RemoteHistoryFactory::RemoteHistoryFactory(const WireHandle& handle, std::string auth_token)
    : client_(handle.address, std::move(auth_token)), id_(handle.instance_id) {}

ChatHistory RemoteHistoryFactory::construct(EnvKind env_kind, const std::string& instruction) {
  try {
    WireValue result = client_.call(
        id_, "construct", {WireValue::text(to_string(env_kind)), WireValue::text(instruction)});
    return history_from_json(Json::parse(result.as_text()));
  } catch (const TransportError& e) {
    // construct() runs inside environment resets; an unreachable factory is
    // task-side infrastructure trouble.
    throw EnvironmentBackendError(e.what());
  }
}

std::string RemoteHistoryFactory::preamble_suffix() const {
  return client_.get_field(id_, "preamble_suffix").as_text();
}

void RemoteHistoryFactory::set_preamble_suffix(const std::string& suffix) {
  client_.set_field(id_, "preamble_suffix", WireValue::text(suffix));
}

RemoteEnvironment::RemoteEnvironment(const WireHandle& handle, std::string auth_token)
    : client_(handle.address, std::move(auth_token)), id_(handle.instance_id) {}

RemoteEnvironment::RemoteEnvironment(const std::string& address, std::int64_t instance_id,
                                     std::string auth_token)
    : client_(address, std::move(auth_token)), id_(instance_id) {}

EnvKind RemoteEnvironment::kind() const {
  if (!cached_kind_) {
    try {
      cached_kind_ = env_kind_from_string(client_.call(id_, "kind", {}).as_text());
    } catch (const TransportError& e) {
      throw EnvironmentBackendError(e.what());
    }
  }
  return *cached_kind_;
}

ChatHistory RemoteEnvironment::reset(const TaskInstance& task) {
  try {
    WireValue result =
        client_.call(id_, "reset", {WireValue::text(task_to_json(task).dump())});
    rethrow_backend_error(result.as_map());
    return history_from_json(Json::parse(result.as_map().at("history").as_text()));
  } catch (const TransportError& e) {
    throw EnvironmentBackendError(e.what());
  }
}

InteractResult RemoteEnvironment::interact(const ParsedAction& action) {
  try {
    WireValue result =
        client_.call(id_, "interact", {WireValue::text(action_to_json(action).dump())});
    const auto& fields = result.as_map();
    rethrow_backend_error(fields);
    InteractResult out;
    out.terminal = fields.at("terminal").as_bool();
    auto obs = fields.find("observation");
    if (obs != fields.end()) out.observation = obs->second.as_text();
    return out;
  } catch (const TransportError& e) {
    throw EnvironmentBackendError(e.what());
  }
}

int RemoteEnvironment::complete() {
  try {
    WireValue result = client_.call(id_, "complete", {});
    rethrow_backend_error(result.as_map());
    return static_cast<int>(result.as_map().at("reward").as_int());
  } catch (const TransportError& e) {
    throw EnvironmentBackendError(e.what());
  }
}

MetricsReport RemoteEnvironment::calculate_metric(std::span<const Session> sessions,
                                                  std::span<const TaskInstance> tasks) {
  Json sessions_json = Json::array();
  for (const auto& s : sessions) sessions_json.push_back(session_to_json(s));
  Json tasks_json = Json::array();
  for (const auto& t : tasks) tasks_json.push_back(task_to_json(t));
  try {
    WireValue result = client_.call(id_, "calculate_metric",
                                    {WireValue::text(sessions_json.dump()),
                                     WireValue::text(tasks_json.dump())});
    return metrics_from_json(Json::parse(result.as_text()));
  } catch (const TransportError& e) {
    throw EnvironmentBackendError(e.what());
  }
}

void RemoteEnvironment::release() {
  try {
    client_.call(id_, "release", {});
  } catch (const TransportError&) {
    // Releasing against an already-gone server is not an error.
  }
}

std::shared_ptr<HistoryItemFactory> RemoteEnvironment::history_factory() {
  WireValue handle = client_.call(id_, "history_factory", {});
  return std::make_shared<RemoteHistoryFactory>(handle.as_handle(), client_.auth_token());
}

RemoteSqlBackend::RemoteSqlBackend(const WireHandle& handle, std::string auth_token)
    : client_(handle.address, std::move(auth_token)), id_(handle.instance_id) {}

std::string RemoteSqlBackend::dialect() const {
  return client_.call(id_, "dialect", {}).as_text();
}

SqlResult RemoteSqlBackend::execute(const std::string& statement) {
  WireValue result = client_.call(id_, "execute", {WireValue::text(statement)});
  const auto& fields = result.as_map();
  SqlResult out;
  out.ok = fields.at("ok").as_bool();
  out.is_read = fields.at("is_read").as_bool();
  out.rows = db_rows_from_json(Json::parse(fields.at("rows").as_text()));
  out.error = fields.at("error").as_text();
  return out;
}

RemoteExecBackend::RemoteExecBackend(const WireHandle& handle, std::string auth_token)
    : client_(handle.address, std::move(auth_token)), id_(handle.instance_id) {}

void RemoteExecBackend::fresh() { client_.call(id_, "fresh", {}); }

ExecResult RemoteExecBackend::run(const std::string& script) {
  WireValue result = client_.call(id_, "run", {WireValue::text(script)});
  const auto& fields = result.as_map();
  return {fields.at("stdout").as_text(), static_cast<int>(fields.at("exit_code").as_int())};
}

void RemoteExecBackend::destroy() { client_.call(id_, "destroy", {}); }

}  // namespace seqbench::rpc
