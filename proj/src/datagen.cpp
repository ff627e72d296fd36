#include "seqbench/datagen.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <sstream>

#include "seqbench/env_db.hpp"
#include "seqbench/serialize.hpp"
#include "seqbench/sql_backend.hpp"
#include "seqbench/tokenizer.hpp"

namespace seqbench::datagen {

SkillStats SkillStats::over(EnvKind kind, std::span<const TaskInstance> tasks) {
  SkillStats stats;
  stats.env_kind = kind;
  for (const auto& skill : skill_set_for(kind)) stats.counts[skill] = 0;
  for (const auto& task : tasks) {
    for (const auto& skill : task.skills) ++stats.counts[skill];
  }
  return stats;
}

void SkillStats::record(const TaskInstance& task) {
  for (const auto& skill : task.skills) ++counts[skill];
}

double relatedness(const TaskInstance& a, const TaskInstance& b) {
  if (a.env_kind != b.env_kind) throw std::invalid_argument("tasks are from different environments");
  if (a.skills.empty() || b.skills.empty()) {
    throw std::invalid_argument("relatedness requires non-empty skill sets");
  }
  std::set<Skill> sa(a.skills.begin(), a.skills.end());
  std::set<Skill> sb(b.skills.begin(), b.skills.end());
  std::size_t shared = 0;
  for (const auto& skill : sa) shared += sb.count(skill);
  if (shared == 0) return 0.0;
  double pa = static_cast<double>(shared) / static_cast<double>(sa.size());
  double pb = static_cast<double>(shared) / static_cast<double>(sb.size());
  return 2.0 * pa * pb / (pa + pb);
}

std::vector<Skill> sample_skill_subset(const SkillStats& stats, std::size_t k,
                                       std::mt19937_64& rng) {
  if (k == 0) throw std::invalid_argument("subset size must be positive");
  if (k > stats.counts.size()) {
    throw std::invalid_argument("subset size exceeds the skill set");
  }
  std::vector<Skill> names;
  std::vector<double> weights;
  for (const auto& [skill, count] : stats.counts) {
    names.push_back(skill);
    weights.push_back(1.0 / (static_cast<double>(count) + 1.0));
  }
  std::vector<Skill> out;
  for (std::size_t pick = 0; pick < k; ++pick) {
    std::discrete_distribution<std::size_t> dist(weights.begin(), weights.end());
    std::size_t chosen = dist(rng);
    out.push_back(names[chosen]);
    names.erase(names.begin() + static_cast<std::ptrdiff_t>(chosen));
    weights.erase(weights.begin() + static_cast<std::ptrdiff_t>(chosen));
  }
  return out;
}

namespace {

// Uppercase copy with string literals blanked, so keyword scans cannot be
// fooled by quoted data.
std::string upper_blank_strings(const std::string& statement) {
  std::string out;
  out.reserve(statement.size());
  char quote = '\0';
  for (char c : statement) {
    if (quote != '\0') {
      out += ' ';
      if (c == quote) quote = '\0';
      continue;
    }
    if (c == '\'' || c == '"') {
      quote = c;
      out += ' ';
      continue;
    }
    out += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  return out;
}

std::size_t find_keyword(const std::string& upper, const std::string& keyword,
                         std::size_t from = 0) {
  std::size_t pos = from;
  while ((pos = upper.find(keyword, pos)) != std::string::npos) {
    bool left_ok = pos == 0 || !std::isalnum(static_cast<unsigned char>(upper[pos - 1]));
    std::size_t end = pos + keyword.size();
    bool right_ok = end >= upper.size() || !std::isalnum(static_cast<unsigned char>(upper[end]));
    if (left_ok && right_ok) return pos;
    pos += 1;
  }
  return std::string::npos;
}

struct ClauseSpans {
  std::size_t where = std::string::npos;
  std::size_t group_by = std::string::npos;
  std::size_t having = std::string::npos;
  std::size_t order_by = std::string::npos;
  std::size_t limit = std::string::npos;

  std::size_t end_after(std::size_t pos, std::size_t total) const {
    std::size_t end = total;
    for (std::size_t candidate : {where, group_by, having, order_by, limit}) {
      if (candidate != std::string::npos && candidate > pos) end = std::min(end, candidate);
    }
    return end;
  }
};

// AND/OR structure of a condition span, ignoring subquery interiors.
struct ConditionShape {
  int top_level_connectives = 0;
  bool nested_connectives = false;
};

ConditionShape analyze_conditions(const std::string& upper, std::size_t begin, std::size_t end) {
  ConditionShape shape;
  int depth = 0;
  int subquery_depth = 0;
  for (std::size_t i = begin; i < end; ++i) {
    char c = upper[i];
    if (c == '(') {
      std::size_t next = upper.find_first_not_of(' ', i + 1);
      if (next != std::string::npos && upper.compare(next, 6, "SELECT") == 0) {
        ++subquery_depth;
        ++depth;
        continue;
      }
      ++depth;
      continue;
    }
    if (c == ')') {
      if (depth > 0) --depth;
      if (subquery_depth > 0 && depth < subquery_depth) --subquery_depth;
      continue;
    }
    if (subquery_depth > 0) continue;
    bool is_and = upper.compare(i, 3, "AND") == 0 &&
                  (i == 0 || !std::isalnum(static_cast<unsigned char>(upper[i - 1]))) &&
                  (i + 3 >= end || !std::isalnum(static_cast<unsigned char>(upper[i + 3])));
    bool is_or = upper.compare(i, 2, "OR") == 0 &&
                 (i == 0 || !std::isalnum(static_cast<unsigned char>(upper[i - 1]))) &&
                 (i + 2 >= end || !std::isalnum(static_cast<unsigned char>(upper[i + 2])));
    if (is_and || is_or) {
      if (depth == 0) ++shape.top_level_connectives;
      else shape.nested_connectives = true;
    }
  }
  return shape;
}

std::vector<std::string> split_top_level(const std::string& text) {
  std::vector<std::string> parts;
  std::string current;
  int depth = 0;
  for (char c : text) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      parts.push_back(current);
      current.clear();
      continue;
    }
    current += c;
  }
  parts.push_back(current);
  return parts;
}

bool contains_aggregate(const std::string& upper_span) {
  for (const char* agg : {"COUNT", "SUM", "AVG", "MAX", "MIN"}) {
    std::size_t pos = find_keyword(upper_span, agg);
    if (pos != std::string::npos) {
      std::size_t paren = upper_span.find_first_not_of(' ', pos + std::strlen(agg));
      if (paren != std::string::npos && upper_span[paren] == '(') return true;
    }
  }
  return false;
}

bool aggregate_arithmetic(const std::string& upper_span) {
  for (const char* agg : {"COUNT", "SUM", "AVG", "MAX", "MIN"}) {
    std::size_t pos = 0;
    while ((pos = find_keyword(upper_span, agg, pos)) != std::string::npos) {
      std::size_t open = upper_span.find('(', pos);
      if (open == std::string::npos) break;
      int depth = 1;
      std::size_t i = open + 1;
      while (i < upper_span.size() && depth > 0) {
        if (upper_span[i] == '(') ++depth;
        if (upper_span[i] == ')') --depth;
        ++i;
      }
      std::size_t after = upper_span.find_first_not_of(' ', i);
      if (after != std::string::npos &&
          (upper_span[after] == '+' || upper_span[after] == '-' || upper_span[after] == '*' ||
           upper_span[after] == '/')) {
        return true;
      }
      pos = i;
    }
  }
  return false;
}

struct SubqueryShape {
  int top_level = 0;
  bool nested = false;
};

SubqueryShape analyze_subqueries(const std::string& upper) {
  SubqueryShape shape;
  std::vector<bool> subquery_stack;
  for (std::size_t i = 0; i < upper.size(); ++i) {
    if (upper[i] == '(') {
      std::size_t next = upper.find_first_not_of(' ', i + 1);
      bool is_subquery = next != std::string::npos && upper.compare(next, 6, "SELECT") == 0;
      if (is_subquery) {
        bool inside = std::find(subquery_stack.begin(), subquery_stack.end(), true) !=
                      subquery_stack.end();
        if (inside) shape.nested = true;
        else ++shape.top_level;
      }
      subquery_stack.push_back(is_subquery);
    } else if (upper[i] == ')') {
      if (!subquery_stack.empty()) subquery_stack.pop_back();
    }
  }
  return shape;
}

}  // namespace

std::vector<Skill> detect_db_skills(const std::string& statement) {
  std::vector<Skill> skills;
  auto add = [&](const char* name) { skills.emplace_back(name); };

  std::string upper = upper_blank_strings(statement);
  std::size_t head = upper.find_first_not_of(" \t\r\n");
  if (head == std::string::npos) return skills;

  if (upper.compare(head, 6, "SELECT") == 0) add("select");
  if (upper.compare(head, 6, "INSERT") == 0) add("insert");
  if (upper.compare(head, 6, "UPDATE") == 0) add("update");
  if (upper.compare(head, 6, "DELETE") == 0) add("delete");

  ClauseSpans spans;
  spans.where = find_keyword(upper, "WHERE");
  spans.group_by = find_keyword(upper, "GROUP BY");
  spans.having = find_keyword(upper, "HAVING");
  spans.order_by = find_keyword(upper, "ORDER BY");
  spans.limit = find_keyword(upper, "LIMIT");

  std::size_t from_pos = find_keyword(upper, "FROM");

  // Aliases: AS in the select list is a column alias, AS between FROM and the
  // next clause is a table alias.
  if (upper.compare(head, 6, "SELECT") == 0 && from_pos != std::string::npos) {
    std::string select_list = upper.substr(head + 6, from_pos - head - 6);
    if (find_keyword(select_list, "AS") != std::string::npos) add("column_alias");
  }
  if (from_pos != std::string::npos) {
    std::size_t from_end = spans.end_after(from_pos, upper.size());
    // Stop at the first subquery; aliases inside it are the subquery's.
    std::string from_span = upper.substr(from_pos, from_end - from_pos);
    std::size_t sub = from_span.find("(");
    if (sub != std::string::npos) from_span = from_span.substr(0, sub);
    if (find_keyword(from_span, "AS") != std::string::npos) add("table_alias");
  }

  if (spans.where != std::string::npos) {
    std::size_t end = spans.end_after(spans.where, upper.size());
    ConditionShape shape = analyze_conditions(upper, spans.where + 5, end);
    if (shape.nested_connectives) add("where_nested_conditions");
    if (shape.top_level_connectives > 0) add("where_multiple_conditions");
    if (shape.top_level_connectives == 0 && !shape.nested_connectives) {
      add("where_single_condition");
    }
  }

  if (spans.group_by != std::string::npos) {
    std::size_t end = spans.end_after(spans.group_by, upper.size());
    auto columns = split_top_level(upper.substr(spans.group_by + 8, end - spans.group_by - 8));
    if (columns.size() >= 2) add("group_by_multiple_columns");
    else add("group_by_single_column");
  }

  if (spans.having != std::string::npos) {
    std::size_t end = spans.end_after(spans.having, upper.size());
    std::string span = upper.substr(spans.having + 6, end - spans.having - 6);
    if (contains_aggregate(span)) {
      ConditionShape shape = analyze_conditions(upper, spans.having + 6, end);
      if (aggregate_arithmetic(span)) add("having_aggregate_calculation");
      if (shape.top_level_connectives > 0) add("having_multiple_conditions_with_aggregate");
      else add("having_single_condition_with_aggregate");
    }
  }

  if (spans.order_by != std::string::npos) {
    std::size_t end = spans.end_after(spans.order_by, upper.size());
    auto items = split_top_level(upper.substr(spans.order_by + 8, end - spans.order_by - 8));
    if (items.size() == 1) {
      add("order_by_single_column");
    } else {
      std::set<bool> directions;
      for (const auto& item : items) {
        directions.insert(find_keyword(item, "DESC") != std::string::npos);
      }
      if (directions.size() == 1) add("order_by_multiple_columns_same_direction");
      else add("order_by_multiple_columns_different_directions");
    }
  }

  if (spans.limit != std::string::npos) {
    std::size_t end = upper.size();
    std::string span = upper.substr(spans.limit, end - spans.limit);
    bool offset = find_keyword(span, "OFFSET") != std::string::npos ||
                  span.find(',') != std::string::npos;
    if (offset) add("limit_and_offset");
    else add("limit_only");
  }

  SubqueryShape sub = analyze_subqueries(upper);
  if (sub.nested) add("subquery_nested");
  if (sub.top_level >= 2) add("subquery_multiple");
  else if (sub.top_level == 1) add("subquery_single");

  return skills;
}

std::vector<Skill> detect_os_skills(const std::string& script) {
  std::set<Skill> found;
  const auto& known = os_skill_set();
  std::istringstream lines(script);
  std::string line;
  while (std::getline(lines, line)) {
    std::istringstream words(line);
    std::string word;
    bool command_position = true;
    while (words >> word) {
      if (word == "&&" || word == "||" || word == "|" || word == ";") {
        command_position = true;
        continue;
      }
      if (command_position &&
          std::find(known.begin(), known.end(), word) != known.end()) {
        found.insert(word);
      }
      command_position = false;
    }
  }
  return {found.begin(), found.end()};
}

ValidationOutcome validate_db_task(TaskInstance candidate) {
  ValidationOutcome outcome;
  if (!std::holds_alternative<DbSetup>(candidate.setup) ||
      !std::holds_alternative<DbGroundTruth>(candidate.ground_truth)) {
    outcome.reason = "wrong_payload_kind";
    return outcome;
  }
  DbGroundTruth& truth = std::get<DbGroundTruth>(candidate.ground_truth);
  if (truth.statement.empty()) {
    outcome.reason = "missing_statement";
    return outcome;
  }

  SqliteBackend backend;
  create_task_table(backend, candidate.db_setup());
  SqlResult result = backend.execute(truth.statement);
  if (!result.ok) {
    outcome.reason = "statement_error:" + result.error;
    return outcome;
  }
  auto detected = detect_db_skills(truth.statement);
  for (const auto& skill : candidate.skills) {
    if (std::find(detected.begin(), detected.end(), skill) == detected.end()) {
      outcome.reason = "skill_absent:" + skill;
      return outcome;
    }
  }
  if (result.is_read) {
    if (truth.rows && !rows_equal(*truth.rows, result.rows)) {
      outcome.reason = "result_mismatch";
      return outcome;
    }
    truth.rows = result.rows;
    truth.state_digest.reset();
  } else {
    std::string digest = db_state_digest(backend, candidate.db_setup().table_name);
    if (truth.state_digest && *truth.state_digest != digest) {
      outcome.reason = "digest_mismatch";
      return outcome;
    }
    truth.state_digest = digest;
    truth.rows.reset();
  }
  drop_task_table(backend, candidate.db_setup().table_name);

  auto errors = validate_task_instance(candidate);
  if (!errors.empty()) {
    outcome.reason = "invariant:" + errors.front();
    return outcome;
  }
  outcome.accepted = true;
  outcome.task = std::move(candidate);
  return outcome;
}

ValidationOutcome validate_os_task(TaskInstance candidate, ExecBackend& backend) {
  ValidationOutcome outcome;
  if (!std::holds_alternative<OsSetup>(candidate.setup) ||
      !std::holds_alternative<OsGroundTruth>(candidate.ground_truth)) {
    outcome.reason = "wrong_payload_kind";
    return outcome;
  }
  OsGroundTruth& truth = std::get<OsGroundTruth>(candidate.ground_truth);
  if (!truth.solution_script) {
    outcome.reason = "missing_solution_script";
    return outcome;
  }

  backend.fresh();
  const std::string& init = candidate.os_setup().init_script;
  if (!init.empty() && backend.run(init).exit_code != 0) {
    outcome.reason = "init_failed";
    backend.destroy();
    return outcome;
  }
  if (backend.run(*truth.solution_script).exit_code != 0) {
    outcome.reason = "solution_failed";
    backend.destroy();
    return outcome;
  }
  int eval_code = backend.run(truth.eval_script).exit_code;
  backend.destroy();
  if (eval_code != 0) {
    outcome.reason = "eval_nonzero:" + std::to_string(eval_code);
    return outcome;
  }
  auto detected = detect_os_skills(*truth.solution_script);
  for (const auto& skill : candidate.skills) {
    if (std::find(detected.begin(), detected.end(), skill) == detected.end()) {
      outcome.reason = "skill_absent:" + skill;
      return outcome;
    }
  }

  auto errors = validate_task_instance(candidate);
  if (!errors.empty()) {
    outcome.reason = "invariant:" + errors.front();
    return outcome;
  }
  outcome.accepted = true;
  outcome.task = std::move(candidate);
  return outcome;
}

ValidationOutcome validate_kg_task(TaskInstance candidate, const TripleStore& store) {
  ValidationOutcome outcome;
  if (!std::holds_alternative<KgSetup>(candidate.setup) ||
      !std::holds_alternative<KgGroundTruth>(candidate.ground_truth)) {
    outcome.reason = "wrong_payload_kind";
    return outcome;
  }
  KgGroundTruth& truth = std::get<KgGroundTruth>(candidate.ground_truth);
  KgReplayResult replay = replay_kg_actions(store, truth.actions);
  if (!replay.ok) {
    outcome.reason = "replay_failed:" + replay.error;
    return outcome;
  }
  if (replay.is_count) {
    if (truth.answer_count && *truth.answer_count != replay.count) {
      outcome.reason = "answer_mismatch";
      return outcome;
    }
    truth.answer_count = replay.count;
    truth.answer_entities.reset();
  } else {
    if (truth.answer_entities && *truth.answer_entities != replay.entities) {
      outcome.reason = "answer_mismatch";
      return outcome;
    }
    truth.answer_entities = replay.entities;
    truth.answer_count.reset();
  }
  candidate.difficulty = static_cast<int>(truth.actions.size());

  auto errors = validate_task_instance(candidate);
  if (!errors.empty()) {
    outcome.reason = "invariant:" + errors.front();
    return outcome;
  }
  outcome.accepted = true;
  outcome.task = std::move(candidate);
  return outcome;
}

SelectionResult select_balanced_subset(const std::vector<TaskInstance>& pool,
                                       std::size_t target_size, std::int64_t min_per_skill) {
  SelectionResult result;
  if (pool.empty() || target_size > pool.size()) {
    result.deficient_skills.push_back("<pool smaller than target>");
    return result;
  }

  EnvKind kind = pool.front().env_kind;
  SkillStats availability = SkillStats::over(kind, pool);
  for (const auto& [skill, count] : availability.counts) {
    if (count < min_per_skill) result.deficient_skills.push_back(skill);
  }
  if (!result.deficient_skills.empty()) return result;

  std::map<Skill, std::int64_t> selected_counts;
  for (const auto& [skill, _] : availability.counts) selected_counts[skill] = 0;
  std::vector<bool> taken(pool.size(), false);

  for (std::size_t round = 0; round < target_size; ++round) {
    std::size_t best_index = pool.size();
    std::int64_t best_coverage = -1;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (taken[i]) continue;
      std::int64_t coverage = 0;
      for (const auto& skill : pool[i].skills) {
        if (selected_counts[skill] < min_per_skill) ++coverage;
      }
      if (coverage > best_coverage) {
        best_coverage = coverage;
        best_index = i;
      }
    }
    taken[best_index] = true;
    for (const auto& skill : pool[best_index].skills) ++selected_counts[skill];
  }

  for (const auto& [skill, count] : selected_counts) {
    if (count < min_per_skill) result.deficient_skills.push_back(skill);
  }
  if (!result.deficient_skills.empty()) return result;

  result.feasible = true;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (taken[i]) result.subset.push_back(pool[i]);
  }
  return result;
}

MockDbTaskGenerator::MockDbTaskGenerator(std::uint64_t seed, int malformed_every)
    : rng_(seed), malformed_every_(malformed_every) {}

namespace {

bool has(const std::vector<Skill>& skills, const char* name) {
  return std::find(skills.begin(), skills.end(), name) != skills.end();
}

// Picks the first requested member of a mutually exclusive skill family.
const char* pick_family(const std::vector<Skill>& requested,
                        std::initializer_list<const char*> family) {
  for (const auto& skill : requested) {
    for (const char* member : family) {
      if (skill == member) return member;
    }
  }
  return nullptr;
}

}  // namespace

std::optional<Json> MockDbTaskGenerator::generate(EnvKind env_kind,
                                                  const std::vector<Skill>& requested) {
  if (env_kind != EnvKind::db) {
    throw std::invalid_argument("the mock generator produces db tasks only");
  }
  ++generated_;
  if (malformed_every_ > 0 && generated_ % malformed_every_ == 0) {
    return Json{{"oops", "not a task"}};  // malformed by design, pipeline must drop it
  }

  std::uniform_int_distribution<int> row_count(6, 12);
  std::uniform_int_distribution<int> amount(10, 500);
  std::uniform_int_distribution<int> score(1, 100);
  std::uniform_int_distribution<int> group(0, 2);
  const char* group_names[] = {"alpha", "beta", "gamma"};

  std::string table = "records_" + std::to_string(rng_() % 100000);
  Json rows = Json::array();
  int n = row_count(rng_);
  for (int i = 1; i <= n; ++i) {
    rows.push_back(Json::array(
        {i, "item_" + std::to_string(i), group_names[group(rng_)], amount(rng_), score(rng_)}));
  }

  std::vector<Skill> built;
  std::string statement;

  const char* mutation = pick_family(requested, {"insert", "update", "delete"});
  const char* where_kind = pick_family(
      requested, {"where_nested_conditions", "where_multiple_conditions", "where_single_condition"});
  const char* subquery_kind =
      pick_family(requested, {"subquery_nested", "subquery_multiple", "subquery_single"});

  std::string where_clause;
  if (subquery_kind != nullptr) {
    // Subqueries live in the WHERE clause; they override the plain condition
    // families to keep the claimed skills consistent.
    if (std::string(subquery_kind) == "subquery_single") {
      where_clause = " WHERE amount > (SELECT AVG(amount) FROM " + table + ")";
      built.push_back("subquery_single");
    } else if (std::string(subquery_kind) == "subquery_multiple") {
      where_clause = " WHERE amount > (SELECT AVG(amount) FROM " + table +
                     ") AND score < (SELECT MAX(score) FROM " + table + ")";
      built.push_back("subquery_multiple");
      built.push_back("where_multiple_conditions");
    } else {
      where_clause = " WHERE amount > (SELECT AVG(amount) FROM " + table +
                     " WHERE score IN (SELECT score FROM " + table + "))";
      built.push_back("subquery_nested");
      built.push_back("subquery_single");
    }
  } else if (where_kind != nullptr) {
    int threshold = amount(rng_);
    if (std::string(where_kind) == "where_single_condition") {
      where_clause = " WHERE amount > " + std::to_string(threshold);
      built.push_back("where_single_condition");
    } else if (std::string(where_kind) == "where_multiple_conditions") {
      where_clause = " WHERE amount > " + std::to_string(threshold) + " AND score < 90";
      built.push_back("where_multiple_conditions");
    } else {
      where_clause = " WHERE (amount > " + std::to_string(threshold) +
                     " AND score < 90) OR grp = 'alpha'";
      built.push_back("where_nested_conditions");
    }
  }

  if (mutation != nullptr) {
    if (std::string(mutation) == "insert") {
      statement = "INSERT INTO " + table + " VALUES (" + std::to_string(n + 1) +
                  ", 'item_new', 'alpha', 77, 55);";
      built = {"insert"};
    } else if (std::string(mutation) == "update") {
      if (where_clause.empty()) {
        where_clause = " WHERE amount > 100";
        built.push_back("where_single_condition");
      }
      statement = "UPDATE " + table + " SET score = score + 1" + where_clause + ";";
      built.push_back("update");
    } else {
      if (where_clause.empty()) {
        where_clause = " WHERE score < 20";
        built.push_back("where_single_condition");
      }
      statement = "DELETE FROM " + table + where_clause + ";";
      built.push_back("delete");
    }
  } else {
    built.push_back("select");
    std::string select_list = "id, name";
    if (has(requested, "column_alias")) {
      select_list = "id AS row_id, name";
      built.push_back("column_alias");
    }
    std::string from_clause = " FROM " + table;
    if (has(requested, "table_alias")) {
      from_clause = " FROM " + table + " AS r";
      built.push_back("table_alias");
    }

    std::string group_clause, having_clause;
    const char* group_kind =
        pick_family(requested, {"group_by_multiple_columns", "group_by_single_column"});
    const char* having_kind = pick_family(
        requested, {"having_aggregate_calculation", "having_multiple_conditions_with_aggregate",
                    "having_single_condition_with_aggregate"});
    if (having_kind != nullptr && group_kind == nullptr) group_kind = "group_by_single_column";
    if (group_kind != nullptr) {
      if (std::string(group_kind) == "group_by_multiple_columns") {
        select_list = "grp, score";
        group_clause = " GROUP BY grp, score";
        built.push_back("group_by_multiple_columns");
      } else {
        select_list = "grp, COUNT(*)";
        group_clause = " GROUP BY grp";
        built.push_back("group_by_single_column");
      }
      if (having_kind != nullptr) {
        if (std::string(having_kind) == "having_aggregate_calculation") {
          having_clause = " HAVING MAX(amount) - MIN(amount) > 5";
          built.push_back("having_aggregate_calculation");
          built.push_back("having_single_condition_with_aggregate");
        } else if (std::string(having_kind) == "having_multiple_conditions_with_aggregate") {
          having_clause = " HAVING COUNT(*) > 1 AND AVG(score) < 95";
          built.push_back("having_multiple_conditions_with_aggregate");
        } else {
          having_clause = " HAVING COUNT(*) > 1";
          built.push_back("having_single_condition_with_aggregate");
        }
      }
    }

    std::string order_clause;
    const char* order_kind = pick_family(
        requested, {"order_by_multiple_columns_different_directions",
                    "order_by_multiple_columns_same_direction", "order_by_single_column"});
    if (order_kind != nullptr) {
      std::string first = group_clause.empty() ? "amount" : "grp";
      std::string second = group_clause.empty() ? "score" : select_list.find("score") !=
                                                                std::string::npos
                                                                ? "score"
                                                                : "COUNT(*)";
      if (std::string(order_kind) == "order_by_single_column") {
        order_clause = " ORDER BY " + first + " DESC";
        built.push_back("order_by_single_column");
      } else if (std::string(order_kind) == "order_by_multiple_columns_same_direction") {
        order_clause = " ORDER BY " + first + " ASC, " + second + " ASC";
        built.push_back("order_by_multiple_columns_same_direction");
      } else {
        order_clause = " ORDER BY " + first + " ASC, " + second + " DESC";
        built.push_back("order_by_multiple_columns_different_directions");
      }
    }

    std::string limit_clause;
    const char* limit_kind = pick_family(requested, {"limit_and_offset", "limit_only"});
    if (limit_kind != nullptr) {
      if (std::string(limit_kind) == "limit_and_offset") {
        limit_clause = " LIMIT 5 OFFSET 2";
        built.push_back("limit_and_offset");
      } else {
        limit_clause = " LIMIT 5";
        built.push_back("limit_only");
      }
    }

    if (group_clause.empty() && where_clause.empty()) {
      where_clause = " WHERE amount > " + std::to_string(amount(rng_));
      built.push_back("where_single_condition");
    }
    statement = "SELECT " + select_list + from_clause + where_clause + group_clause +
                having_clause + order_clause + limit_clause + ";";
  }

  std::sort(built.begin(), built.end());
  built.erase(std::unique(built.begin(), built.end()), built.end());

  std::string difficulty =
      built.size() <= 2 ? "easy" : (built.size() <= 4 ? "medium" : "hard");
  std::string instruction =
      (mutation != nullptr ? "Apply the described change to the table." :
                             "Answer the described query over the table.") +
      std::string("\nThe name of this table is ") + table + ".";

  return Json{{"instruction", instruction},
              {"table_name", table},
              {"headers", Json::array({"id", "name", "grp", "amount", "score"})},
              {"rows", rows},
              {"statement", statement},
              {"skills", built},
              {"difficulty", difficulty}};
}

HttpTaskGenerator::HttpTaskGenerator(std::shared_ptr<Model> model) : model_(std::move(model)) {}

std::optional<Json> HttpTaskGenerator::generate(EnvKind env_kind,
                                                const std::vector<Skill>& skills) {
  std::string skill_list;
  for (const auto& skill : skills) {
    if (!skill_list.empty()) skill_list += ", ";
    skill_list += skill;
  }
  ChatHistory prompt;
  prompt.add_user(
      "Generate one " + to_string(env_kind) +
      " benchmark task as a JSON object with fields instruction, table_name, headers, rows, "
      "statement and skills. The statement must exercise exactly these skills: " +
      skill_list + ". Reply with only the JSON object.");
  std::string reply;
  try {
    reply = model_->complete(prompt);
  } catch (const std::exception&) {
    return std::nullopt;
  }
  auto open = reply.find('{');
  auto close = reply.rfind('}');
  if (open == std::string::npos || close == std::string::npos || close < open) {
    return std::nullopt;
  }
  try {
    return Json::parse(reply.substr(open, close - open + 1));
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::optional<TaskInstance> candidate_from_reply(EnvKind env_kind, const Json& reply,
                                                 const std::string& task_id) {
  try {
    TaskInstance task;
    task.task_id = task_id;
    task.env_kind = env_kind;
    task.instruction = reply.at("instruction").get<std::string>();
    if (env_kind != EnvKind::db) return std::nullopt;

    DbSetup setup;
    setup.table_name = reply.at("table_name").get<std::string>();
    setup.headers = reply.at("headers").get<std::vector<std::string>>();
    setup.rows = db_rows_from_json(reply.at("rows"));
    task.setup = std::move(setup);

    DbGroundTruth truth;
    truth.statement = reply.at("statement").get<std::string>();
    task.ground_truth = std::move(truth);

    task.skills = reply.at("skills").get<std::vector<Skill>>();
    if (reply.contains("difficulty") && reply.at("difficulty").is_string()) {
      task.difficulty = difficulty_level_from_string(reply.at("difficulty").get<std::string>());
    }
    return task;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

Json PipelineStats::to_json() const {
  Json rejected = Json::object();
  for (const auto& [reason, count] : rejected_by_reason) rejected[reason] = count;
  return Json{{"generated", generated},
              {"validated", validated},
              {"selected", selected},
              {"rejected_by_reason", std::move(rejected)}};
}

PipelineResult run_db_pipeline(TaskGenerator& generator, const PipelineOptions& options) {
  PipelineResult result;
  std::mt19937_64 rng(options.seed);
  SkillStats stats = SkillStats::over(EnvKind::db, {});

  std::vector<TaskInstance> pool;
  std::uniform_int_distribution<std::size_t> subset_size(options.min_skills_per_task,
                                                         options.max_skills_per_task);
  for (std::size_t i = 0; i < options.candidate_count; ++i) {
    ++result.stats.generated;
    auto skills = sample_skill_subset(stats, subset_size(rng), rng);
    auto reply = generator.generate(EnvKind::db, skills);
    if (!reply) {
      ++result.stats.rejected_by_reason["malformed_reply"];
      continue;
    }
    auto candidate = candidate_from_reply(EnvKind::db, *reply,
                                          "gen_db_" + std::to_string(i));
    if (!candidate) {
      ++result.stats.rejected_by_reason["malformed_reply"];
      continue;
    }
    ValidationOutcome outcome = validate_db_task(std::move(*candidate));
    if (!outcome.accepted) {
      std::string reason = outcome.reason.substr(0, outcome.reason.find(':'));
      ++result.stats.rejected_by_reason[reason];
      continue;
    }
    stats.record(outcome.task);
    pool.push_back(std::move(outcome.task));
  }
  result.stats.validated = static_cast<std::int64_t>(pool.size());

  SelectionResult selection =
      select_balanced_subset(pool, std::min(options.target_size, pool.size()),
                             options.min_per_skill);
  result.feasible = selection.feasible;
  result.deficient_skills = selection.deficient_skills;
  if (selection.feasible) {
    result.dataset = std::move(selection.subset);
    result.stats.selected = static_cast<std::int64_t>(result.dataset.size());
  }
  return result;
}

std::string render_review_worksheet(const std::vector<TaskInstance>& tasks, double fraction,
                                    std::uint64_t seed) {
  if (fraction <= 0.0 || fraction > 1.0) {
    throw std::invalid_argument("review fraction must be in (0, 1]");
  }
  std::size_t sample_size =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(fraction * tasks.size())));
  std::vector<std::size_t> order(tasks.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(std::min(sample_size, order.size()));
  std::sort(order.begin(), order.end());

  std::ostringstream out;
  out << "# manual review worksheet\n";
  out << "# dataset size: " << tasks.size() << ", sampled: " << order.size()
      << ", fraction: " << fraction << ", seed: " << seed << "\n\n";
  int row = 1;
  for (std::size_t index : order) {
    const TaskInstance& task = tasks[index];
    out << "## " << row++ << ". " << task.task_id << " [" << to_string(task.env_kind) << "]\n";
    out << "instruction: " << task.instruction << "\n";
    switch (task.env_kind) {
      case EnvKind::db:
        out << "ground truth: " << task.db_truth().statement << "\n";
        break;
      case EnvKind::os:
        out << "evaluation script: " << task.os_truth().eval_script << "\n";
        break;
      case EnvKind::kg: {
        out << "ground truth actions:";
        for (const auto& action : task.kg_truth().actions) out << " " << action << ";";
        out << "\n";
        break;
      }
    }
    out << "skills:";
    for (const auto& skill : task.skills) out << " " << skill;
    out << "\n";
    out << "verdict (ok / reject): \n";
    out << "notes: \n\n";
  }
  return out.str();
}

namespace {

struct SexprNode {
  std::string symbol;  // set for leaves
  std::vector<SexprNode> children;
  bool is_leaf() const { return children.empty(); }
};

struct SexprParser {
  const std::string& text;
  std::size_t pos = 0;

  explicit SexprParser(const std::string& t) : text(t) {}

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  std::optional<SexprNode> parse() {
    skip_ws();
    if (pos >= text.size()) return std::nullopt;
    if (text[pos] == '(') {
      ++pos;
      SexprNode node;
      node.symbol = "()";
      while (true) {
        skip_ws();
        if (pos >= text.size()) return std::nullopt;
        if (text[pos] == ')') {
          ++pos;
          return node;
        }
        auto child = parse();
        if (!child) return std::nullopt;
        node.children.push_back(std::move(*child));
      }
    }
    std::size_t start = pos;
    while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos])) &&
           text[pos] != '(' && text[pos] != ')') {
      ++pos;
    }
    if (pos == start) return std::nullopt;
    SexprNode node;
    node.symbol = text.substr(start, pos - start);
    return node;
  }
};

struct SexprEmitter {
  std::vector<std::string> actions;
  int var_counter = 0;
  std::string error;

  // Returns the reference produced by the node: an entity literal or "#k".
  // Empty string signals failure (error holds the reason).
  std::string emit(const SexprNode& node) {
    if (node.is_leaf() && node.symbol != "()") return node.symbol;
    if (node.children.empty()) {
      error = "empty expression";
      return "";
    }
    const SexprNode& head = node.children[0];
    if (!head.is_leaf()) {
      error = "operator position must be a symbol";
      return "";
    }
    const std::string& op = head.symbol;

    if (op == "JOIN" && node.children.size() == 3) {
      // Only reversed relations map onto the outgoing get_neighbors action.
      const SexprNode& rel = node.children[1];
      if (rel.is_leaf() || rel.children.size() != 2 || !rel.children[0].is_leaf() ||
          rel.children[0].symbol != "R" || !rel.children[1].is_leaf()) {
        error = "unsupported JOIN relation form";
        return "";
      }
      std::string source = emit(node.children[2]);
      if (source.empty()) return "";
      actions.push_back("get_relations(" + source + ")");
      actions.push_back("get_neighbors(" + source + "," + rel.children[1].symbol + ")");
      return "#" + std::to_string(var_counter++);
    }
    if (op == "AND" && node.children.size() == 3) {
      std::string left = emit(node.children[1]);
      if (left.empty()) return "";
      std::string right = emit(node.children[2]);
      if (right.empty()) return "";
      if (left[0] != '#' || right[0] != '#') {
        error = "AND requires variable operands";
        return "";
      }
      actions.push_back("intersection(" + left + "," + right + ")");
      return "#" + std::to_string(var_counter++);
    }
    if (op == "COUNT" && node.children.size() == 2) {
      std::string ref = emit(node.children[1]);
      if (ref.empty()) return "";
      if (ref[0] != '#') {
        error = "COUNT requires a variable operand";
        return "";
      }
      actions.push_back("count(" + ref + ")");
      return ref;  // the count is terminal; the variable remains the reference
    }
    if ((op == "ARGMAX" || op == "ARGMIN") && node.children.size() == 3 &&
        node.children[2].is_leaf()) {
      std::string ref = emit(node.children[1]);
      if (ref.empty()) return "";
      if (ref[0] != '#') {
        error = op + " requires a variable operand";
        return "";
      }
      const std::string& attribute = node.children[2].symbol;
      actions.push_back("get_attributes(" + ref + ")");
      actions.push_back((op == "ARGMAX" ? "argmax(" : "argmin(") + ref + "," + attribute + ")");
      return "#" + std::to_string(var_counter++);
    }
    error = "unsupported form: " + op;
    return "";
  }
};

}  // namespace

SexprConversion convert_sexpr(const std::string& sexpr) {
  SexprConversion out;
  SexprParser parser(sexpr);
  auto node = parser.parse();
  if (!node) {
    out.error = "malformed s-expression";
    return out;
  }
  parser.skip_ws();
  if (parser.pos != sexpr.size()) {
    out.error = "trailing content after s-expression";
    return out;
  }
  SexprEmitter emitter;
  std::string ref = emitter.emit(*node);
  if (ref.empty()) {
    out.error = emitter.error;
    return out;
  }
  if (ref[0] != '#') {
    out.error = "expression reduces to an entity literal, not a query";
    return out;
  }
  out.ok = true;
  out.actions = std::move(emitter.actions);
  return out;
}

ValidationOutcome kg_task_from_sexpr(const std::string& task_id, const std::string& question,
                                     const std::vector<KgEntityRef>& entities,
                                     const std::string& sexpr, const TripleStore& store) {
  ValidationOutcome outcome;
  SexprConversion conversion = convert_sexpr(sexpr);
  if (!conversion.ok) {
    outcome.reason = "conversion_failed:" + conversion.error;
    return outcome;
  }
  if (conversion.actions.size() < 2 || conversion.actions.size() > 9) {
    outcome.reason = "length_out_of_range:" + std::to_string(conversion.actions.size());
    return outcome;
  }

  TaskInstance task;
  task.task_id = task_id;
  task.env_kind = EnvKind::kg;
  task.instruction = question;
  task.setup = KgSetup{entities};

  KgGroundTruth truth;
  truth.actions = conversion.actions;
  task.ground_truth = std::move(truth);

  std::vector<Skill> skills;
  for (const auto& action : conversion.actions) {
    auto call = parse_kg_call(action);
    if (call && std::find(skills.begin(), skills.end(), call->name) == skills.end()) {
      skills.push_back(call->name);
    }
  }
  task.skills = std::move(skills);

  return validate_kg_task(std::move(task), store);
}

}  // namespace seqbench::datagen
