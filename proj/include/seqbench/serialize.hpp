#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "seqbench/action.hpp"
#include "seqbench/types.hpp"

namespace seqbench {

using Json = nlohmann::json;

Json db_value_to_json(const DbValue& v);
DbValue db_value_from_json(const Json& j);

Json db_rows_to_json(const std::vector<DbRow>& rows);
std::vector<DbRow> db_rows_from_json(const Json& j);

Json action_to_json(const ParsedAction& action);
ParsedAction action_from_json(const Json& j);

Json task_to_json(const TaskInstance& task);
TaskInstance task_from_json(const Json& j);

Json history_to_json(const ChatHistory& history);
ChatHistory history_from_json(const Json& j);

Json session_to_json(const Session& session);
Session session_from_json(const Json& j);

Json metrics_to_json(const MetricsReport& report);
MetricsReport metrics_from_json(const Json& j);

// Dataset file: one task per line, line-delimited JSON.
std::vector<TaskInstance> load_dataset(const std::string& path);
void save_dataset(const std::string& path, const std::vector<TaskInstance>& tasks);

// Session log: append-only, one terminal session per line.
std::vector<Session> load_session_log(const std::string& path);
void append_session(const std::string& path, const Session& session);

// Re-serializes a session log with sidecar timestamps removed, for
// byte-exact comparison of runs.
std::string normalize_session_log(const std::string& log_text);

}  // namespace seqbench
