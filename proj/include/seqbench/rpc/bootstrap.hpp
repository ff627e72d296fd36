#pragma once

#include <sys/types.h>

#include <memory>
#include <string>

#include "seqbench/rpc/rpc.hpp"

namespace seqbench::rpc {

struct ComponentAddresses {
  std::string environment;      // host:port
  std::string history_factory;  // host:port
};

// The persistent server-side controller. It keeps listening across
// experiments: each start launches a fresh environment server and history
// factory server as separate processes and reports their addresses; stop
// terminates them and is idempotent. The controller itself outlives stop.
class ServerController {
 public:
  // exe_path: binary providing the serve-env / serve-factory subcommands
  // (defaults to the running executable).
  explicit ServerController(std::string host = "127.0.0.1", std::string exe_path = "");
  ~ServerController();

  ComponentAddresses start_components(const std::string& config_json);
  void stop_components();
  bool components_running() const { return env_pid_ > 0 || factory_pid_ > 0; }

 private:
  struct Spawned {
    pid_t pid = -1;
    std::string address;
  };
  Spawned spawn(const std::string& component, const std::vector<std::string>& args);

  std::string host_;
  std::string exe_path_;
  pid_t env_pid_ = -1;
  pid_t factory_pid_ = -1;
  ComponentAddresses addresses_;
  std::string config_path_;
};

std::int64_t register_server_controller(RpcServer& server,
                                        std::shared_ptr<ServerController> controller);

// Client-side bootstrap protocol against a running server-side controller
// (its primary target id is 1).
ComponentAddresses bootstrap_start(const std::string& controller_address,
                                   const std::string& config_json,
                                   const std::string& auth_token = "");
void bootstrap_stop(const std::string& controller_address, const std::string& auth_token = "");

}  // namespace seqbench::rpc
