#pragma once

#include <memory>

#include "seqbench/environment.hpp"
#include "seqbench/exec_backend.hpp"
#include "seqbench/history_factory.hpp"

namespace seqbench {

// Middle-elision once text exceeds `limit` characters; the marker reports how
// much was dropped.
std::string truncate_observation(const std::string& text, std::size_t limit);

struct OsEnvironmentOptions {
  std::size_t observation_limit = 8192;
};

// Reward comes from the task's evaluation script alone: it runs on the same
// instance the agent worked in and exit code 0 means success.
class OsEnvironment : public Environment {
 public:
  OsEnvironment(std::shared_ptr<ExecBackend> backend,
                std::shared_ptr<HistoryItemFactory> factory,
                OsEnvironmentOptions options = {});

  EnvKind kind() const override { return EnvKind::os; }
  ChatHistory reset(const TaskInstance& task) override;
  InteractResult interact(const ParsedAction& action) override;
  int complete() override;
  MetricsReport calculate_metric(std::span<const Session> sessions,
                                 std::span<const TaskInstance> tasks) override;
  void release() override;

  ExecBackend& backend() { return *backend_; }

 private:
  std::shared_ptr<ExecBackend> backend_;
  std::shared_ptr<HistoryItemFactory> factory_;
  OsEnvironmentOptions options_;
  LifecycleGuard guard_;
  TaskInstance current_task_;
};

}  // namespace seqbench
