#include "seqbench/env_db.hpp"

#include <algorithm>

#include "seqbench/digest.hpp"
#include "seqbench/metrics.hpp"

namespace seqbench {

namespace {

std::string quote_identifier(const std::string& name) {
  std::string out = "`";
  for (char c : name) {
    if (c == '`') out += "``";
    else out += c;
  }
  out += "`";
  return out;
}

std::string sql_literal(const DbValue& v) {
  struct Visitor {
    std::string operator()(std::nullptr_t) const { return "NULL"; }
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(double d) const { return render_double(d); }
    std::string operator()(const std::string& s) const {
      std::string out = "'";
      for (char c : s) {
        if (c == '\'') out += "''";
        else out += c;
      }
      out += "'";
      return out;
    }
    std::string operator()(const DecimalText& d) const { return canonical_number_string(d.digits); }
  };
  return std::visit(Visitor{}, v);
}

void execute_or_throw(SqlBackend& backend, const std::string& statement) {
  SqlResult result = backend.execute(statement);
  if (!result.ok) {
    throw EnvironmentBackendError("table setup failed: " + result.error + " (" + statement + ")");
  }
}

}  // namespace

std::string digest_cell_format(const DbValue& v) {
  struct Visitor {
    std::string operator()(std::nullptr_t) const { return "NULL"; }
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(double d) const { return render_double(d); }
    std::string operator()(const std::string& s) const { return s; }
    std::string operator()(const DecimalText& d) const { return canonical_number_string(d.digits); }
  };
  return std::visit(Visitor{}, v);
}

std::string db_state_digest(SqlBackend& backend, const std::string& table_name) {
  SqlResult result = backend.execute("SELECT * FROM " + quote_identifier(table_name) + ";");
  if (!result.ok) {
    throw EnvironmentBackendError("state digest query failed: " + result.error);
  }
  std::vector<std::string> rendered;
  rendered.reserve(result.rows.size());
  for (const auto& row : result.rows) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) line += '\x1f';
      line += digest_cell_format(row[c]);
    }
    rendered.push_back(std::move(line));
  }
  std::sort(rendered.begin(), rendered.end());
  std::string payload;
  for (std::size_t r = 0; r < rendered.size(); ++r) {
    if (r > 0) payload += '\x1e';
    payload += rendered[r];
  }
  return md5_hex(payload);
}

DatabaseEnvironment::DatabaseEnvironment(std::shared_ptr<SqlBackend> backend,
                                         std::shared_ptr<HistoryItemFactory> factory)
    : backend_(std::move(backend)), factory_(std::move(factory)) {}

void create_task_table(SqlBackend& backend, const DbSetup& setup) {
  execute_or_throw(backend, "DROP TABLE IF EXISTS " + quote_identifier(setup.table_name) + ";");
  std::string create = "CREATE TABLE " + quote_identifier(setup.table_name) + " (";
  for (std::size_t i = 0; i < setup.headers.size(); ++i) {
    if (i > 0) create += ", ";
    create += quote_identifier(setup.headers[i]);
  }
  create += ");";
  execute_or_throw(backend, create);
  for (const auto& row : setup.rows) {
    std::string insert = "INSERT INTO " + quote_identifier(setup.table_name) + " VALUES (";
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) insert += ", ";
      insert += sql_literal(row[c]);
    }
    insert += ");";
    execute_or_throw(backend, insert);
  }
}

void drop_task_table(SqlBackend& backend, const std::string& table_name) {
  execute_or_throw(backend, "DROP TABLE IF EXISTS " + quote_identifier(table_name) + ";");
}

ChatHistory DatabaseEnvironment::reset(const TaskInstance& task) {
  guard_.on_reset();
  current_task_ = task;
  submitted_answer_.reset();
  try {
    create_task_table(*backend_, task.db_setup());
  } catch (...) {
    guard_.abort_task();
    throw;
  }
  return factory_->construct(EnvKind::db, task.instruction);
}

InteractResult DatabaseEnvironment::interact(const ParsedAction& action) {
  guard_.on_interact();
  if (action.kind == ActionKind::db_answer) {
    submitted_answer_ = action.payload;
    return {std::nullopt, true};
  }
  if (action.kind != ActionKind::db_operation) {
    throw std::logic_error("database environment cannot execute action kind " +
                           to_string(action.kind));
  }
  SqlResult result = backend_->execute(action.payload);
  if (!result.ok) return {result.error, false};
  if (result.is_read && !result.rows.empty()) {
    return {render_rows_literal(result.rows), false};
  }
  return {std::string("[]"), false};
}

int DatabaseEnvironment::complete() {
  guard_.on_complete();
  const DbGroundTruth& truth = current_task_.db_truth();
  int reward = 0;
  if (truth.rows) {
    // Query task: the committed answer must reproduce the expected rows with
    // both row and column order intact.
    if (submitted_answer_) {
      auto submitted = parse_rows_literal(*submitted_answer_);
      if (submitted && rows_equal(*submitted, *truth.rows)) reward = 1;
    }
  } else if (truth.state_digest) {
    std::string digest = db_state_digest(*backend_, current_task_.db_setup().table_name);
    if (digest == *truth.state_digest) reward = 1;
  }
  drop_task_table(*backend_, current_task_.db_setup().table_name);
  submitted_answer_.reset();
  return reward;
}

MetricsReport DatabaseEnvironment::calculate_metric(std::span<const Session> sessions,
                                                    std::span<const TaskInstance> tasks) {
  return aggregate_metrics(sessions, tasks);
}

void DatabaseEnvironment::release() {
  guard_.on_release();
  backend_.reset();
}

}  // namespace seqbench
