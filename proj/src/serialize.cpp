#include "seqbench/serialize.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace seqbench {

Json db_value_to_json(const DbValue& v) {
  struct Visitor {
    Json operator()(std::nullptr_t) const { return nullptr; }
    Json operator()(std::int64_t i) const { return i; }
    Json operator()(double d) const { return d; }
    Json operator()(const std::string& s) const { return s; }
    Json operator()(const DecimalText& d) const { return Json{{"decimal", d.digits}}; }
  };
  return std::visit(Visitor{}, v);
}

DbValue db_value_from_json(const Json& j) {
  if (j.is_null()) return nullptr;
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number_float()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  if (j.is_object() && j.contains("decimal")) return DecimalText{j.at("decimal").get<std::string>()};
  throw std::invalid_argument("unsupported db value: " + j.dump());
}

Json db_rows_to_json(const std::vector<DbRow>& rows) {
  Json out = Json::array();
  for (const auto& row : rows) {
    Json r = Json::array();
    for (const auto& v : row) r.push_back(db_value_to_json(v));
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<DbRow> db_rows_from_json(const Json& j) {
  std::vector<DbRow> rows;
  for (const auto& r : j) {
    DbRow row;
    for (const auto& v : r) row.push_back(db_value_from_json(v));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json action_to_json(const ParsedAction& action) {
  Json j;
  j["kind"] = to_string(action.kind);
  j["payload"] = action.payload;
  if (action.call) {
    j["call"] = {{"name", action.call->name}, {"args", action.call->args}};
  }
  return j;
}

ParsedAction action_from_json(const Json& j) {
  ParsedAction action;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "db_operation") action.kind = ActionKind::db_operation;
  else if (kind == "db_answer") action.kind = ActionKind::db_answer;
  else if (kind == "os_bash") action.kind = ActionKind::os_bash;
  else if (kind == "os_finish") action.kind = ActionKind::os_finish;
  else if (kind == "kg_action") action.kind = ActionKind::kg_action;
  else if (kind == "kg_answer") action.kind = ActionKind::kg_answer;
  else action.kind = ActionKind::invalid;
  action.payload = j.at("payload").get<std::string>();
  if (j.contains("call")) {
    KgCall call;
    call.name = j.at("call").at("name").get<std::string>();
    call.args = j.at("call").at("args").get<std::vector<std::string>>();
    action.call = std::move(call);
  }
  return action;
}

Json task_to_json(const TaskInstance& task) {
  Json j;
  j["task_id"] = task.task_id;
  j["env_kind"] = to_string(task.env_kind);
  j["instruction"] = task.instruction;

  Json setup;
  switch (task.env_kind) {
    case EnvKind::db: {
      const auto& s = task.db_setup();
      setup = {{"table_name", s.table_name}, {"headers", s.headers}, {"rows", db_rows_to_json(s.rows)}};
      break;
    }
    case EnvKind::os:
      setup = {{"init_script", task.os_setup().init_script}};
      break;
    case EnvKind::kg: {
      Json entities = Json::array();
      for (const auto& e : task.kg_setup().entities) {
        entities.push_back({{"name", e.name}, {"id", e.id}});
      }
      setup = {{"entities", std::move(entities)}};
      break;
    }
  }
  j["setup"] = std::move(setup);

  Json truth;
  switch (task.env_kind) {
    case EnvKind::db: {
      const auto& gt = task.db_truth();
      truth["statement"] = gt.statement;
      if (gt.rows) truth["rows"] = db_rows_to_json(*gt.rows);
      if (gt.state_digest) truth["state_digest"] = *gt.state_digest;
      break;
    }
    case EnvKind::os: {
      const auto& gt = task.os_truth();
      truth["eval_script"] = gt.eval_script;
      if (gt.solution_script) truth["solution_script"] = *gt.solution_script;
      break;
    }
    case EnvKind::kg: {
      const auto& gt = task.kg_truth();
      truth["actions"] = gt.actions;
      if (gt.answer_entities) {
        truth["answer_entities"] = std::vector<std::string>(gt.answer_entities->begin(),
                                                            gt.answer_entities->end());
      }
      if (gt.answer_count) truth["answer_count"] = *gt.answer_count;
      break;
    }
  }
  j["ground_truth"] = std::move(truth);
  j["skills"] = task.skills;
  if (task.difficulty) {
    if (std::holds_alternative<DifficultyLevel>(*task.difficulty)) {
      j["difficulty"] = to_string(std::get<DifficultyLevel>(*task.difficulty));
    } else {
      j["difficulty"] = std::get<int>(*task.difficulty);
    }
  } else {
    j["difficulty"] = nullptr;
  }
  return j;
}

TaskInstance task_from_json(const Json& j) {
  TaskInstance task;
  task.task_id = j.at("task_id").get<std::string>();
  task.env_kind = env_kind_from_string(j.at("env_kind").get<std::string>());
  task.instruction = j.at("instruction").get<std::string>();

  const Json& setup = j.at("setup");
  const Json& truth = j.at("ground_truth");
  switch (task.env_kind) {
    case EnvKind::db: {
      DbSetup s;
      s.table_name = setup.at("table_name").get<std::string>();
      s.headers = setup.at("headers").get<std::vector<std::string>>();
      s.rows = db_rows_from_json(setup.at("rows"));
      task.setup = std::move(s);
      DbGroundTruth gt;
      gt.statement = truth.at("statement").get<std::string>();
      if (truth.contains("rows")) gt.rows = db_rows_from_json(truth.at("rows"));
      if (truth.contains("state_digest")) gt.state_digest = truth.at("state_digest").get<std::string>();
      task.ground_truth = std::move(gt);
      break;
    }
    case EnvKind::os: {
      task.setup = OsSetup{setup.at("init_script").get<std::string>()};
      OsGroundTruth gt;
      gt.eval_script = truth.at("eval_script").get<std::string>();
      if (truth.contains("solution_script")) {
        gt.solution_script = truth.at("solution_script").get<std::string>();
      }
      task.ground_truth = std::move(gt);
      break;
    }
    case EnvKind::kg: {
      KgSetup s;
      for (const auto& e : setup.at("entities")) {
        s.entities.push_back({e.at("name").get<std::string>(), e.at("id").get<std::string>()});
      }
      task.setup = std::move(s);
      KgGroundTruth gt;
      gt.actions = truth.at("actions").get<std::vector<std::string>>();
      if (truth.contains("answer_entities")) {
        auto list = truth.at("answer_entities").get<std::vector<std::string>>();
        gt.answer_entities = std::set<std::string>(list.begin(), list.end());
      }
      if (truth.contains("answer_count")) gt.answer_count = truth.at("answer_count").get<std::int64_t>();
      task.ground_truth = std::move(gt);
      break;
    }
  }
  task.skills = j.at("skills").get<std::vector<Skill>>();
  const Json& diff = j.at("difficulty");
  if (diff.is_string()) {
    task.difficulty = difficulty_level_from_string(diff.get<std::string>());
  } else if (diff.is_number_integer()) {
    task.difficulty = diff.get<int>();
  }
  return task;
}

Json history_to_json(const ChatHistory& history) {
  Json out = Json::array();
  for (const auto& msg : history.messages) {
    out.push_back({{"role", to_string(msg.role)}, {"content", msg.content}});
  }
  return out;
}

ChatHistory history_from_json(const Json& j) {
  ChatHistory history;
  for (const auto& m : j) {
    Role role = m.at("role").get<std::string>() == "user" ? Role::user : Role::agent;
    history.messages.push_back({role, m.at("content").get<std::string>()});
  }
  return history;
}

Json session_to_json(const Session& session) {
  Json j;
  j["task_id"] = session.task_id;
  j["history"] = history_to_json(session.history);
  j["status"] = to_string(session.status);
  j["outcome"] = to_string(session.outcome);
  j["reward"] = session.reward;
  j["rounds_used"] = session.rounds_used;
  j["input_tokens_total"] = session.input_tokens_total;
  j["max_prompt_tokens"] = session.max_prompt_tokens;
  j["ts"] = session.ts;
  return j;
}

Session session_from_json(const Json& j) {
  Session s;
  s.task_id = j.at("task_id").get<std::string>();
  s.history = history_from_json(j.at("history"));
  s.status = sample_status_from_string(j.at("status").get<std::string>());
  s.outcome = evaluation_outcome_from_string(j.at("outcome").get<std::string>());
  s.reward = j.at("reward").get<int>();
  s.rounds_used = j.at("rounds_used").get<int>();
  s.input_tokens_total = j.at("input_tokens_total").get<std::int64_t>();
  s.max_prompt_tokens = j.value("max_prompt_tokens", std::int64_t{0});
  s.ts = j.value("ts", std::int64_t{0});
  return s;
}

Json metrics_to_json(const MetricsReport& report) {
  Json j;
  j["success_rate"] = report.success_rate;
  Json statuses = Json::object();
  for (const auto& [status, count] : report.status_counts) statuses[to_string(status)] = count;
  j["status_counts"] = std::move(statuses);
  Json skills = Json::object();
  for (const auto& [skill, tally] : report.per_skill_success) {
    skills[skill] = {{"successes", tally.successes}, {"attempts", tally.attempts}};
  }
  j["per_skill_success"] = std::move(skills);
  Json difficulty = Json::object();
  for (const auto& [bucket, tally] : report.per_difficulty) {
    difficulty[bucket] = {{"successes", tally.successes}, {"attempts", tally.attempts}};
  }
  j["per_difficulty"] = std::move(difficulty);
  j["avg_input_tokens"] = report.avg_input_tokens;
  j["max_prompt_tokens"] = report.max_prompt_tokens;
  j["session_count"] = report.session_count;
  j["total_reward"] = report.total_reward;
  return j;
}

MetricsReport metrics_from_json(const Json& j) {
  MetricsReport report;
  report.success_rate = j.at("success_rate").get<double>();
  for (const auto& [status, count] : j.at("status_counts").items()) {
    report.status_counts[sample_status_from_string(status)] = count.get<std::int64_t>();
  }
  for (const auto& [skill, tally] : j.at("per_skill_success").items()) {
    report.per_skill_success[skill] = {tally.at("successes").get<std::int64_t>(),
                                       tally.at("attempts").get<std::int64_t>()};
  }
  for (const auto& [bucket, tally] : j.at("per_difficulty").items()) {
    report.per_difficulty[bucket] = {tally.at("successes").get<std::int64_t>(),
                                     tally.at("attempts").get<std::int64_t>()};
  }
  report.avg_input_tokens = j.at("avg_input_tokens").get<double>();
  report.max_prompt_tokens = j.at("max_prompt_tokens").get<std::int64_t>();
  report.session_count = j.at("session_count").get<std::int64_t>();
  report.total_reward = j.at("total_reward").get<std::int64_t>();
  return report;
}

std::vector<TaskInstance> load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);
  std::vector<TaskInstance> tasks;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      tasks.push_back(task_from_json(Json::parse(line)));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return tasks;
}

void save_dataset(const std::string& path, const std::vector<TaskInstance>& tasks) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write dataset file: " + path);
  for (const auto& task : tasks) out << task_to_json(task).dump() << "\n";
}

std::vector<Session> load_session_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) return {};
  std::vector<Session> sessions;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      sessions.push_back(session_from_json(Json::parse(line)));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return sessions;
}

void append_session(const std::string& path, const Session& session) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::runtime_error("cannot append to session log: " + path);
  out << session_to_json(session).dump() << "\n";
  out.flush();
}

std::string normalize_session_log(const std::string& log_text) {
  std::istringstream in(log_text);
  std::string line, out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Json j = Json::parse(line);
    j.erase("ts");
    out += j.dump();
    out += "\n";
  }
  return out;
}

}  // namespace seqbench
