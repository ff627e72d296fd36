#include "seqbench/rpc/bootstrap.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace seqbench::rpc {

namespace {

std::string self_exe_path() {
  char buf[4096];
  ssize_t n = readlink("/proc/self/exe", buf, sizeof(buf) - 1);
  if (n <= 0) throw std::runtime_error("cannot resolve own executable path");
  buf[n] = '\0';
  return buf;
}

void terminate_process(pid_t& pid) {
  if (pid <= 0) return;
  kill(pid, SIGTERM);
  int status = 0;
  for (int i = 0; i < 50; ++i) {
    pid_t r = waitpid(pid, &status, WNOHANG);
    if (r == pid) {
      pid = -1;
      return;
    }
    usleep(100 * 1000);
  }
  kill(pid, SIGKILL);
  waitpid(pid, &status, 0);
  pid = -1;
}

}  // namespace

ServerController::ServerController(std::string host, std::string exe_path)
    : host_(std::move(host)), exe_path_(std::move(exe_path)) {
  if (exe_path_.empty()) exe_path_ = self_exe_path();
}

ServerController::~ServerController() {
  stop_components();
  if (!config_path_.empty()) std::remove(config_path_.c_str());
}

ServerController::Spawned ServerController::spawn(const std::string& component,
                                                  const std::vector<std::string>& args) {
  int fds[2];
  if (pipe(fds) != 0) throw std::runtime_error("pipe failed while launching " + component);

  pid_t pid = fork();
  if (pid < 0) {
    close(fds[0]);
    close(fds[1]);
    throw std::runtime_error("fork failed while launching " + component);
  }
  if (pid == 0) {
    dup2(fds[1], STDOUT_FILENO);
    close(fds[0]);
    close(fds[1]);
    std::vector<char*> argv;
    argv.push_back(const_cast<char*>(exe_path_.c_str()));
    for (const auto& arg : args) argv.push_back(const_cast<char*>(arg.c_str()));
    argv.push_back(nullptr);
    execv(exe_path_.c_str(), argv.data());
    fprintf(stderr, "exec failed: %s\n", strerror(errno));
    _exit(127);
  }

  close(fds[1]);
  FILE* out = fdopen(fds[0], "r");
  Spawned spawned;
  spawned.pid = pid;
  char line[512];
  while (fgets(line, sizeof(line), out)) {
    std::string text(line);
    auto pos = text.find("SEQBENCH_LISTENING ");
    if (pos != std::string::npos) {
      std::string addr = text.substr(pos + strlen("SEQBENCH_LISTENING "));
      while (!addr.empty() && (addr.back() == '\n' || addr.back() == '\r')) addr.pop_back();
      spawned.address = addr;
      break;
    }
  }
  fclose(out);
  if (spawned.address.empty()) {
    terminate_process(spawned.pid);
    throw std::runtime_error("failed to launch component '" + component +
                             "': it never reported a listening address");
  }
  return spawned;
}

ComponentAddresses ServerController::start_components(const std::string& config_json) {
  stop_components();

  if (config_path_.empty()) {
    char templ[] = "/tmp/seqbench-config-XXXXXX";
    int fd = mkstemp(templ);
    if (fd < 0) throw std::runtime_error("cannot create component config file");
    close(fd);
    config_path_ = templ;
  }
  {
    std::ofstream out(config_path_, std::ios::trunc);
    out << config_json;
  }

  Spawned factory = spawn("history_factory", {"serve-factory", "--host", host_, "--port", "0"});
  factory_pid_ = factory.pid;

  Spawned env;
  try {
    env = spawn("environment", {"serve-env", "--config", config_path_, "--factory",
                                factory.address, "--host", host_, "--port", "0"});
  } catch (...) {
    terminate_process(factory_pid_);
    throw;
  }
  env_pid_ = env.pid;

  addresses_ = {env.address, factory.address};
  return addresses_;
}

void ServerController::stop_components() {
  terminate_process(env_pid_);
  terminate_process(factory_pid_);
  addresses_ = {};
}

std::int64_t register_server_controller(RpcServer& server,
                                        std::shared_ptr<ServerController> controller) {
  RemotableDescriptor desc("ServerController");
  ServerController* target = controller.get();

  desc.method("start_components", {WireSchema::text()}, WireSchema::map_of(WireSchema::text()),
              [target](const std::vector<WireValue>& args, RpcServer&) {
                ComponentAddresses addresses = target->start_components(args[0].as_text());
                return WireValue::map(
                    {{"environment", WireValue::text(addresses.environment)},
                     {"history_factory", WireValue::text(addresses.history_factory)}});
              });
  desc.method("stop_components", {}, WireSchema::null_value(),
              [target](const auto&, RpcServer&) {
                target->stop_components();
                return WireValue::null();
              });
  desc.method("ping", {}, WireSchema::text(),
              [](const auto&, RpcServer&) { return WireValue::text("ok"); });

  return server.register_target(std::move(desc), controller);
}

ComponentAddresses bootstrap_start(const std::string& controller_address,
                                   const std::string& config_json,
                                   const std::string& auth_token) {
  RpcClient client(controller_address, auth_token);
  WireValue result = client.call(1, "start_components", {WireValue::text(config_json)});
  const auto& fields = result.as_map();
  return {fields.at("environment").as_text(), fields.at("history_factory").as_text()};
}

void bootstrap_stop(const std::string& controller_address, const std::string& auth_token) {
  RpcClient client(controller_address, auth_token);
  client.call(1, "stop_components", {});
}

}  // namespace seqbench::rpc
