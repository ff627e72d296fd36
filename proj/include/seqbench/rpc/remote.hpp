#pragma once

#include <memory>

#include "seqbench/environment.hpp"
#include "seqbench/exec_backend.hpp"
#include "seqbench/history_factory.hpp"
#include "seqbench/rpc/rpc.hpp"
#include "seqbench/sql_backend.hpp"

namespace seqbench::rpc {

// Server-side registration of the framework components. Each returns the new
// instance id; the first target registered on a component server gets id 1,
// which is the convention clients use to find a server's primary target.
//
// `factory_handle`, when given, is what the environment's history_factory()
// method hands back to callers: a handle that may point at another server,
// which is how chained calls cross processes.
std::int64_t register_environment(RpcServer& server, std::shared_ptr<Environment> environment,
                                  std::optional<WireHandle> factory_handle = std::nullopt);
std::int64_t register_history_factory(RpcServer& server,
                                      std::shared_ptr<HistoryItemFactory> factory);
std::int64_t register_sql_backend(RpcServer& server, std::shared_ptr<SqlBackend> backend);
std::int64_t register_exec_backend(RpcServer& server, std::shared_ptr<ExecBackend> backend);

// Mirror clients. Call sites are indistinguishable from local use: they
// implement the same interfaces and re-raise remote backend failures as
// EnvironmentBackendError so the controller's handling is identical.

class RemoteHistoryFactory : public HistoryItemFactory {
 public:
  RemoteHistoryFactory(const WireHandle& handle, std::string auth_token = "");

  ChatHistory construct(EnvKind env_kind, const std::string& instruction) override;
  std::string preamble_suffix() const override;
  void set_preamble_suffix(const std::string& suffix) override;

 private:
  RpcClient client_;
  std::int64_t id_;
};

class RemoteEnvironment : public Environment {
 public:
  RemoteEnvironment(const WireHandle& handle, std::string auth_token = "");
  RemoteEnvironment(const std::string& address, std::int64_t instance_id,
                    std::string auth_token = "");

  EnvKind kind() const override;
  ChatHistory reset(const TaskInstance& task) override;
  InteractResult interact(const ParsedAction& action) override;
  int complete() override;
  MetricsReport calculate_metric(std::span<const Session> sessions,
                                 std::span<const TaskInstance> tasks) override;
  void release() override;

  // Chained call: the server answers with a handle and the client object
  // materializes here without the caller constructing anything.
  std::shared_ptr<HistoryItemFactory> history_factory();

 private:
  RpcClient client_;
  std::int64_t id_;
  mutable std::optional<EnvKind> cached_kind_;
};

class RemoteSqlBackend : public SqlBackend {
 public:
  RemoteSqlBackend(const WireHandle& handle, std::string auth_token = "");

  std::string dialect() const override;
  SqlResult execute(const std::string& statement) override;

 private:
  RpcClient client_;
  std::int64_t id_;
};

class RemoteExecBackend : public ExecBackend {
 public:
  RemoteExecBackend(const WireHandle& handle, std::string auth_token = "");

  void fresh() override;
  ExecResult run(const std::string& script) override;
  void destroy() override;

 private:
  RpcClient client_;
  std::int64_t id_;
};

}  // namespace seqbench::rpc
