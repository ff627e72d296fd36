#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "seqbench/values.hpp"

namespace seqbench {

enum class EnvKind { db, os, kg };

std::string to_string(EnvKind kind);
EnvKind env_kind_from_string(const std::string& s);

// Atomic competency tags. Task skills must come from the fixed per-environment
// sets below; everything that samples, balances or buckets by skill keys on
// these names.
using Skill = std::string;

const std::vector<Skill>& db_skill_set();   // 22 SQL skills
const std::vector<Skill>& os_skill_set();   // 29 bash command skills
const std::vector<Skill>& kg_skill_set();   // the 7 graph actions
const std::vector<Skill>& skill_set_for(EnvKind kind);
bool is_valid_skill(EnvKind kind, const Skill& name);

enum class DifficultyLevel { easy, medium, hard };

std::string to_string(DifficultyLevel level);
DifficultyLevel difficulty_level_from_string(const std::string& s);

// Either a coarse level (DB) or a ground-truth action-sequence length (KG).
using Difficulty = std::variant<DifficultyLevel, int>;

std::string difficulty_bucket_name(const Difficulty& d);

struct DbSetup {
  std::string table_name;
  std::vector<std::string> headers;
  std::vector<DbRow> rows;
};

struct OsSetup {
  std::string init_script;
};

struct KgEntityRef {
  std::string name;
  std::string id;
};

struct KgSetup {
  std::vector<KgEntityRef> entities;
};

// For query tasks `rows` holds the expected result (row and column order
// significant); for mutation tasks `state_digest` holds the expected table
// digest. Exactly one of the two is set.
struct DbGroundTruth {
  std::string statement;
  std::optional<std::vector<DbRow>> rows;
  std::optional<std::string> state_digest;
};

struct OsGroundTruth {
  std::string eval_script;                    // exit 0 <=> task solved
  std::optional<std::string> solution_script; // used by dataset validation
};

struct KgGroundTruth {
  std::vector<std::string> actions;
  std::optional<std::set<std::string>> answer_entities;
  std::optional<std::int64_t> answer_count;
};

struct TaskInstance {
  std::string task_id;
  EnvKind env_kind = EnvKind::db;
  std::string instruction;
  std::variant<DbSetup, OsSetup, KgSetup> setup;
  std::variant<DbGroundTruth, OsGroundTruth, KgGroundTruth> ground_truth;
  std::vector<Skill> skills;
  std::optional<Difficulty> difficulty;

  const DbSetup& db_setup() const { return std::get<DbSetup>(setup); }
  const OsSetup& os_setup() const { return std::get<OsSetup>(setup); }
  const KgSetup& kg_setup() const { return std::get<KgSetup>(setup); }
  const DbGroundTruth& db_truth() const { return std::get<DbGroundTruth>(ground_truth); }
  const OsGroundTruth& os_truth() const { return std::get<OsGroundTruth>(ground_truth); }
  const KgGroundTruth& kg_truth() const { return std::get<KgGroundTruth>(ground_truth); }
};

// Returns a list of violated invariants, empty when the task is well-formed.
std::vector<std::string> validate_task_instance(const TaskInstance& task);

enum class Role { user, agent };

std::string to_string(Role role);

struct ChatMessage {
  Role role = Role::user;
  std::string content;
};

struct ChatHistory {
  std::vector<ChatMessage> messages;

  void add_user(std::string content) { messages.push_back({Role::user, std::move(content)}); }
  void add_agent(std::string content) { messages.push_back({Role::agent, std::move(content)}); }
  bool empty() const { return messages.empty(); }
  std::size_t size() const { return messages.size(); }
};

enum class SampleStatus {
  running,
  completed,
  task_limit_reached,
  agent_validation_failed,
  agent_context_limit,
  task_environment_error,
  task_unknown_error,
  agent_out_of_memory,
  agent_unknown_error,
};

std::string to_string(SampleStatus status);
SampleStatus sample_status_from_string(const std::string& s);
bool is_terminal(SampleStatus status);

enum class EvaluationOutcome { unknown, correct, incorrect };

std::string to_string(EvaluationOutcome outcome);
EvaluationOutcome evaluation_outcome_from_string(const std::string& s);

struct Session {
  std::string task_id;
  ChatHistory history;
  SampleStatus status = SampleStatus::running;
  EvaluationOutcome outcome = EvaluationOutcome::unknown;
  int reward = 0;
  int rounds_used = 0;
  std::int64_t input_tokens_total = 0;
  std::int64_t max_prompt_tokens = 0;
  // Wall-clock completion time, milliseconds since epoch. Kept in a sidecar
  // field so log normalization can strip it for byte-exact comparisons.
  std::int64_t ts = 0;
};

// Checks the session invariants (reward/outcome coupling, terminal statuses,
// round limit). Returns violations, empty when consistent.
std::vector<std::string> validate_session(const Session& session, int round_limit);

struct SkillTally {
  std::int64_t successes = 0;
  std::int64_t attempts = 0;
};

struct MetricsReport {
  double success_rate = 0.0;
  std::map<SampleStatus, std::int64_t> status_counts;
  std::map<Skill, SkillTally> per_skill_success;
  std::map<std::string, SkillTally> per_difficulty;
  double avg_input_tokens = 0.0;
  std::int64_t max_prompt_tokens = 0;
  std::int64_t session_count = 0;
  std::int64_t total_reward = 0;
};

}  // namespace seqbench
