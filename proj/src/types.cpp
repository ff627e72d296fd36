#include "seqbench/types.hpp"

#include <algorithm>
#include <stdexcept>

namespace seqbench {

std::string to_string(EnvKind kind) {
  switch (kind) {
    case EnvKind::db: return "db";
    case EnvKind::os: return "os";
    case EnvKind::kg: return "kg";
  }
  throw std::logic_error("unreachable env kind");
}

EnvKind env_kind_from_string(const std::string& s) {
  if (s == "db") return EnvKind::db;
  if (s == "os") return EnvKind::os;
  if (s == "kg") return EnvKind::kg;
  throw std::invalid_argument("unknown environment kind: " + s);
}

const std::vector<Skill>& db_skill_set() {
  static const std::vector<Skill> skills = {
      "column_alias",
      "delete",
      "group_by_multiple_columns",
      "group_by_single_column",
      "having_aggregate_calculation",
      "having_multiple_conditions_with_aggregate",
      "having_single_condition_with_aggregate",
      "insert",
      "limit_and_offset",
      "limit_only",
      "order_by_multiple_columns_different_directions",
      "order_by_multiple_columns_same_direction",
      "order_by_single_column",
      "select",
      "subquery_multiple",
      "subquery_nested",
      "subquery_single",
      "table_alias",
      "update",
      "where_multiple_conditions",
      "where_nested_conditions",
      "where_single_condition",
  };
  return skills;
}

const std::vector<Skill>& os_skill_set() {
  static const std::vector<Skill> skills = {
      "addgroup", "awk",   "cat",      "cd",      "chage",   "chgrp",
      "chmod",    "chown", "chsh",     "cp",      "echo",    "exit",
      "find",     "gpasswd", "grep",   "groupadd", "ln",     "ls",
      "mkdir",    "mv",    "rm",       "sed",     "sleep",   "tee",
      "touch",    "useradd", "usermod", "vi",     "wc",
  };
  return skills;
}

const std::vector<Skill>& kg_skill_set() {
  static const std::vector<Skill> skills = {
      "get_relations", "get_neighbors", "intersection", "get_attributes",
      "argmax",        "argmin",        "count",
  };
  return skills;
}

const std::vector<Skill>& skill_set_for(EnvKind kind) {
  switch (kind) {
    case EnvKind::db: return db_skill_set();
    case EnvKind::os: return os_skill_set();
    case EnvKind::kg: return kg_skill_set();
  }
  throw std::logic_error("unreachable env kind");
}

bool is_valid_skill(EnvKind kind, const Skill& name) {
  const auto& set = skill_set_for(kind);
  return std::find(set.begin(), set.end(), name) != set.end();
}

std::string to_string(DifficultyLevel level) {
  switch (level) {
    case DifficultyLevel::easy: return "easy";
    case DifficultyLevel::medium: return "medium";
    case DifficultyLevel::hard: return "hard";
  }
  throw std::logic_error("unreachable difficulty");
}

DifficultyLevel difficulty_level_from_string(const std::string& s) {
  if (s == "easy") return DifficultyLevel::easy;
  if (s == "medium") return DifficultyLevel::medium;
  if (s == "hard") return DifficultyLevel::hard;
  throw std::invalid_argument("unknown difficulty level: " + s);
}

std::string difficulty_bucket_name(const Difficulty& d) {
  if (std::holds_alternative<DifficultyLevel>(d)) return to_string(std::get<DifficultyLevel>(d));
  return "length_" + std::to_string(std::get<int>(d));
}

std::vector<std::string> validate_task_instance(const TaskInstance& task) {
  std::vector<std::string> errors;
  if (task.task_id.empty()) errors.push_back("task_id is empty");
  if (task.skills.empty()) errors.push_back("skill list is empty");
  for (const auto& skill : task.skills) {
    if (!is_valid_skill(task.env_kind, skill)) {
      errors.push_back("skill not in " + to_string(task.env_kind) + " skill set: " + skill);
    }
  }
  switch (task.env_kind) {
    case EnvKind::db:
      if (!std::holds_alternative<DbSetup>(task.setup)) errors.push_back("db task lacks db setup");
      if (!std::holds_alternative<DbGroundTruth>(task.ground_truth)) {
        errors.push_back("db task lacks db ground truth");
      } else {
        const auto& gt = task.db_truth();
        if (gt.rows.has_value() == gt.state_digest.has_value()) {
          errors.push_back("db ground truth must carry exactly one of rows / state_digest");
        }
      }
      break;
    case EnvKind::os:
      if (!std::holds_alternative<OsSetup>(task.setup)) errors.push_back("os task lacks os setup");
      if (!std::holds_alternative<OsGroundTruth>(task.ground_truth)) {
        errors.push_back("os task lacks os ground truth");
      } else if (task.os_truth().eval_script.empty()) {
        errors.push_back("os evaluation script is empty");
      }
      break;
    case EnvKind::kg:
      if (!std::holds_alternative<KgSetup>(task.setup)) errors.push_back("kg task lacks kg setup");
      if (!std::holds_alternative<KgGroundTruth>(task.ground_truth)) {
        errors.push_back("kg task lacks kg ground truth");
      } else {
        const auto& gt = task.kg_truth();
        if (gt.answer_entities.has_value() == gt.answer_count.has_value()) {
          errors.push_back("kg ground truth must carry exactly one of answer_entities / answer_count");
        }
        int len = static_cast<int>(gt.actions.size());
        if (len < 2 || len > 9) {
          errors.push_back("kg ground-truth action sequence length out of [2,9]: " + std::to_string(len));
        }
        if (!task.difficulty || !std::holds_alternative<int>(*task.difficulty) ||
            std::get<int>(*task.difficulty) != len) {
          errors.push_back("kg difficulty must equal ground-truth action count");
        }
      }
      break;
  }
  return errors;
}

std::string to_string(Role role) {
  return role == Role::user ? "user" : "agent";
}

std::string to_string(SampleStatus status) {
  switch (status) {
    case SampleStatus::running: return "running";
    case SampleStatus::completed: return "completed";
    case SampleStatus::task_limit_reached: return "task_limit_reached";
    case SampleStatus::agent_validation_failed: return "agent_validation_failed";
    case SampleStatus::agent_context_limit: return "agent_context_limit";
    case SampleStatus::task_environment_error: return "task_environment_error";
    case SampleStatus::task_unknown_error: return "task_unknown_error";
    case SampleStatus::agent_out_of_memory: return "agent_out_of_memory";
    case SampleStatus::agent_unknown_error: return "agent_unknown_error";
  }
  throw std::logic_error("unreachable sample status");
}

SampleStatus sample_status_from_string(const std::string& s) {
  static const std::map<std::string, SampleStatus> table = {
      {"running", SampleStatus::running},
      {"completed", SampleStatus::completed},
      {"task_limit_reached", SampleStatus::task_limit_reached},
      {"agent_validation_failed", SampleStatus::agent_validation_failed},
      {"agent_context_limit", SampleStatus::agent_context_limit},
      {"task_environment_error", SampleStatus::task_environment_error},
      {"task_unknown_error", SampleStatus::task_unknown_error},
      {"agent_out_of_memory", SampleStatus::agent_out_of_memory},
      {"agent_unknown_error", SampleStatus::agent_unknown_error},
  };
  auto it = table.find(s);
  if (it == table.end()) throw std::invalid_argument("unknown sample status: " + s);
  return it->second;
}

bool is_terminal(SampleStatus status) {
  return status != SampleStatus::running;
}

std::string to_string(EvaluationOutcome outcome) {
  switch (outcome) {
    case EvaluationOutcome::unknown: return "unknown";
    case EvaluationOutcome::correct: return "correct";
    case EvaluationOutcome::incorrect: return "incorrect";
  }
  throw std::logic_error("unreachable outcome");
}

EvaluationOutcome evaluation_outcome_from_string(const std::string& s) {
  if (s == "unknown") return EvaluationOutcome::unknown;
  if (s == "correct") return EvaluationOutcome::correct;
  if (s == "incorrect") return EvaluationOutcome::incorrect;
  throw std::invalid_argument("unknown evaluation outcome: " + s);
}

std::vector<std::string> validate_session(const Session& session, int round_limit) {
  std::vector<std::string> errors;
  if ((session.reward == 1) != (session.outcome == EvaluationOutcome::correct)) {
    errors.push_back("reward=1 must hold exactly when outcome=correct");
  }
  if (session.reward != 0 && session.reward != 1) errors.push_back("reward must be 0 or 1");
  if (round_limit >= 0 && session.rounds_used > round_limit) {
    errors.push_back("rounds_used exceeds round limit");
  }
  if (is_terminal(session.status) && session.outcome == EvaluationOutcome::unknown) {
    errors.push_back("terminal session must have a decided outcome");
  }
  if (!is_terminal(session.status) && session.outcome != EvaluationOutcome::unknown) {
    errors.push_back("in-flight session must have outcome=unknown");
  }
  if (session.rounds_used < 0 || session.input_tokens_total < 0) {
    errors.push_back("counters must be non-negative");
  }
  if (!session.history.empty() && session.history.messages.front().role != Role::user) {
    errors.push_back("history must start with a user message");
  }
  for (const auto& msg : session.history.messages) {
    if (msg.role == Role::user && msg.content.empty()) {
      errors.push_back("user messages must be non-empty");
      break;
    }
  }
  for (std::size_t i = 1; i < session.history.messages.size(); ++i) {
    if (session.history.messages[i].role == session.history.messages[i - 1].role) {
      errors.push_back("roles must alternate within the history");
      break;
    }
  }
  return errors;
}

}  // namespace seqbench
