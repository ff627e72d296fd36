#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace seqbench {

struct ExecResult {
  std::string stdout_text;
  int exit_code = 0;
};

// Command execution behind the OS environment. fresh() discards the current
// instance and starts an isolated one; destroy() is idempotent. Faithful
// shell semantics live behind this seam (a container-backed implementation
// would run each script inside a disposable image); the harness ships a
// declarative mock and a plain subprocess runner.
class ExecBackend {
 public:
  virtual ~ExecBackend() = default;
  virtual void fresh() = 0;
  virtual ExecResult run(const std::string& script) = 0;
  virtual void destroy() = 0;
};

// Canned behavior for scripts the mock's tiny command model does not cover.
struct MockRule {
  std::string contains;  // substring of the script
  ExecResult result;
  std::map<std::string, std::string> set_files;  // path -> content effects
  std::vector<std::string> remove_files;
};

// Recording executor with a small declarative effect model. It tracks a
// simulated file tree and understands just enough command forms (mkdir,
// touch, echo redirects, rm, cp, mv, cat, test, grep -q, wc, chmod/chown
// bookkeeping, useradd/groupadd bookkeeping) for setup and evaluation
// scripts to run; anything else must match a rule or fails with exit 127.
// Commands chain with AND semantics across newlines, ';' and '&&'.
class MockExecBackend : public ExecBackend {
 public:
  void fresh() override;
  ExecResult run(const std::string& script) override;
  void destroy() override;

  void add_rule(MockRule rule) { rules_.push_back(std::move(rule)); }

  bool file_exists(const std::string& path) const;
  std::optional<std::string> file_content(const std::string& path) const;
  const std::vector<std::string>& script_history() const { return history_; }
  bool alive() const { return alive_; }
  int fresh_count() const { return fresh_count_; }

 private:
  ExecResult run_command(const std::string& command);

  bool alive_ = false;
  int fresh_count_ = 0;
  std::map<std::string, std::string> files_;
  std::set<std::string> dirs_;
  std::map<std::string, std::string> modes_;
  std::map<std::string, std::string> owners_;
  std::set<std::string> users_;
  std::set<std::string> groups_;
  std::vector<std::string> history_;
  std::vector<MockRule> rules_;
};

// Runs scripts with /bin/bash in a scratch directory per instance. No
// container isolation; intended for development on trusted task sets.
class LocalShellExecBackend : public ExecBackend {
 public:
  explicit LocalShellExecBackend(std::string scratch_root = "");
  ~LocalShellExecBackend() override;

  void fresh() override;
  ExecResult run(const std::string& script) override;
  void destroy() override;

  const std::string& instance_dir() const { return instance_dir_; }

 private:
  std::string scratch_root_;
  std::string instance_dir_;
};

}  // namespace seqbench
