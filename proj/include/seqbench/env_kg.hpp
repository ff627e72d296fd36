#pragma once

#include <memory>
#include <optional>

#include "seqbench/environment.hpp"
#include "seqbench/history_factory.hpp"
#include "seqbench/triple_store.hpp"

namespace seqbench {

// Sorted, comma-joined entity set; the canonical form answers are compared
// and voted on.
std::string canonical_entity_set(const std::set<std::string>& entities);

class KgEnvironment : public Environment {
 public:
  KgEnvironment(std::shared_ptr<TripleStore> store,
                std::shared_ptr<HistoryItemFactory> factory);

  EnvKind kind() const override { return EnvKind::kg; }
  ChatHistory reset(const TaskInstance& task) override;
  InteractResult interact(const ParsedAction& action) override;
  int complete() override;
  MetricsReport calculate_metric(std::span<const Session> sessions,
                                 std::span<const TaskInstance> tasks) override;
  void release() override;

  const std::vector<KgVariable>& variables() const { return vars_; }
  const TripleStore& store() const { return *store_; }

  // Resolves a committed answer payload ("#k", an integer, or a comma list of
  // entity ids) against the current variable table.
  std::optional<std::set<std::string>> resolve_answer_entities(const std::string& payload) const;

 private:
  std::shared_ptr<TripleStore> store_;
  std::shared_ptr<HistoryItemFactory> factory_;
  LifecycleGuard guard_;
  TaskInstance current_task_;
  std::vector<KgVariable> vars_;
  std::optional<std::string> submitted_answer_;
};

}  // namespace seqbench
