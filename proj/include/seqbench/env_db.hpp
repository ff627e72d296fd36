#pragma once

#include <memory>
#include <optional>
#include <string>

#include "seqbench/environment.hpp"
#include "seqbench/history_factory.hpp"
#include "seqbench/sql_backend.hpp"

namespace seqbench {

// MD5 hex digest over the table contents, independent of insertion order:
// every cell goes through the canonical primitive formatter, cells join on
// 0x1f, rows sort lexicographically by their full rendering and join on 0x1e.
std::string db_state_digest(SqlBackend& backend, const std::string& table_name);

std::string digest_cell_format(const DbValue& v);

// Creates (or replaces) the task table and loads its rows.
void create_task_table(SqlBackend& backend, const DbSetup& setup);
void drop_task_table(SqlBackend& backend, const std::string& table_name);

class DatabaseEnvironment : public Environment {
 public:
  DatabaseEnvironment(std::shared_ptr<SqlBackend> backend,
                      std::shared_ptr<HistoryItemFactory> factory);

  EnvKind kind() const override { return EnvKind::db; }
  ChatHistory reset(const TaskInstance& task) override;
  InteractResult interact(const ParsedAction& action) override;
  int complete() override;
  MetricsReport calculate_metric(std::span<const Session> sessions,
                                 std::span<const TaskInstance> tasks) override;
  void release() override;

  SqlBackend& backend() { return *backend_; }

 private:
  std::shared_ptr<SqlBackend> backend_;
  std::shared_ptr<HistoryItemFactory> factory_;
  LifecycleGuard guard_;
  TaskInstance current_task_;
  std::optional<std::string> submitted_answer_;
};

}  // namespace seqbench
