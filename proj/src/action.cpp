#include "seqbench/action.hpp"

#include <algorithm>
#include <cctype>

namespace seqbench {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool contains(const std::string& text, const std::string& needle) {
  return text.find(needle) != std::string::npos;
}

// Content of the first fenced code block tagged with `lang`.
std::optional<std::string> first_code_block(const std::string& text, const std::string& lang) {
  const std::string open = "```" + lang;
  auto start = text.find(open);
  if (start == std::string::npos) return std::nullopt;
  auto body_start = text.find('\n', start + open.size());
  if (body_start == std::string::npos) return std::nullopt;
  ++body_start;
  auto end = text.find("```", body_start);
  if (end == std::string::npos) return std::nullopt;
  return text.substr(body_start, end - body_start);
}

// True when `statement` holds a single SQL statement (one optional trailing
// semicolon; none elsewhere outside quotes).
bool single_statement(const std::string& statement) {
  std::string s = trim(statement);
  if (!s.empty() && s.back() == ';') s.pop_back();
  char quote = '\0';
  for (char c : s) {
    if (quote != '\0') {
      if (c == quote) quote = '\0';
    } else if (c == '\'' || c == '"') {
      quote = c;
    } else if (c == ';') {
      return false;
    }
  }
  return !trim(s).empty();
}

ParsedAction invalid(std::string why) {
  return {ActionKind::invalid, std::move(why), std::nullopt};
}

bool word_boundary_before(const std::string& text, std::size_t pos) {
  if (pos == 0) return true;
  char c = text[pos - 1];
  return !(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.');
}

bool valid_kg_argument(const std::string& arg) {
  if (arg.empty()) return false;
  for (char c : arg) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '#' || c == '-')) {
      return false;
    }
  }
  return true;
}

std::size_t expected_arity(const std::string& name) {
  if (name == "get_neighbors" || name == "intersection" || name == "argmax" || name == "argmin") return 2;
  return 1;  // get_relations, get_attributes, count
}

std::optional<KgCall> parse_kg_call_at(const std::string& text, std::size_t pos, const std::string& name) {
  std::size_t open = pos + name.size();
  while (open < text.size() && (text[open] == ' ' || text[open] == '\t')) ++open;
  if (open >= text.size() || text[open] != '(') return std::nullopt;
  auto close = text.find(')', open);
  if (close == std::string::npos) return std::nullopt;
  std::string inner = text.substr(open + 1, close - open - 1);

  KgCall call{name, {}};
  std::size_t start = 0;
  while (start <= inner.size()) {
    auto comma = inner.find(',', start);
    std::string piece = trim(comma == std::string::npos ? inner.substr(start)
                                                        : inner.substr(start, comma - start));
    if (!piece.empty()) call.args.push_back(piece);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (call.args.size() != expected_arity(name)) return std::nullopt;
  for (const auto& arg : call.args) {
    if (!valid_kg_argument(arg)) return std::nullopt;
  }
  return call;
}

ParsedAction parse_db(const std::string& text) {
  bool has_operation = contains(text, "Action: Operation");
  bool has_answer = contains(text, "Action: Answer");
  if (has_operation && has_answer) return invalid("conflicting action markers");
  if (has_answer) {
    const std::string marker = "Final Answer:";
    auto pos = text.find(marker);
    if (pos == std::string::npos) return invalid("answer without Final Answer payload");
    return {ActionKind::db_answer, trim(text.substr(pos + marker.size())), std::nullopt};
  }
  if (has_operation) {
    auto block = first_code_block(text, "sql");
    if (!block) return invalid("operation without sql code block");
    std::string statement = trim(*block);
    if (!single_statement(statement)) return invalid("expected exactly one SQL statement");
    return {ActionKind::db_operation, statement, std::nullopt};
  }
  return invalid("no action marker found");
}

ParsedAction parse_os(const std::string& text) {
  bool has_bash = contains(text, "Act: bash");
  bool has_finish = contains(text, "Act: finish");
  if (has_bash && has_finish) return invalid("conflicting action markers");
  if (has_finish) return {ActionKind::os_finish, "", std::nullopt};
  if (has_bash) {
    auto block = first_code_block(text, "bash");
    if (!block) return invalid("bash action without bash code block");
    std::string script = trim(*block);
    if (script.empty()) return invalid("empty bash code block");
    return {ActionKind::os_bash, script, std::nullopt};
  }
  return invalid("no action marker found");
}

ParsedAction parse_kg(const std::string& text) {
  std::optional<KgCall> first_call;
  std::size_t first_pos = std::string::npos;
  for (const auto& name : kg_skill_set()) {
    std::size_t search = 0;
    while (true) {
      auto pos = text.find(name, search);
      if (pos == std::string::npos) break;
      search = pos + 1;
      if (!word_boundary_before(text, pos)) continue;
      auto call = parse_kg_call_at(text, pos, name);
      if (call && pos < first_pos) {
        first_pos = pos;
        first_call = call;
        break;  // earlier occurrences of this name cannot follow
      }
    }
  }

  bool has_answer = contains(text, "Final Answer:");
  if (has_answer && first_call) return invalid("conflicting action markers");
  if (has_answer) {
    const std::string marker = "Final Answer:";
    auto pos = text.find(marker);
    std::string payload = trim(text.substr(pos + marker.size()));
    if (payload.empty()) return invalid("empty final answer");
    return {ActionKind::kg_answer, payload, std::nullopt};
  }
  if (first_call) return {ActionKind::kg_action, render_kg_call(*first_call), first_call};
  return invalid("no well-formed graph action found");
}

}  // namespace

std::string to_string(ActionKind kind) {
  switch (kind) {
    case ActionKind::db_operation: return "db_operation";
    case ActionKind::db_answer: return "db_answer";
    case ActionKind::os_bash: return "os_bash";
    case ActionKind::os_finish: return "os_finish";
    case ActionKind::kg_action: return "kg_action";
    case ActionKind::kg_answer: return "kg_answer";
    case ActionKind::invalid: return "invalid";
  }
  return "invalid";
}

ParsedAction parse_action(EnvKind env_kind, const std::string& text) {
  switch (env_kind) {
    case EnvKind::db: return parse_db(text);
    case EnvKind::os: return parse_os(text);
    case EnvKind::kg: return parse_kg(text);
  }
  return invalid("unknown environment");
}

std::string render_action(EnvKind, const ParsedAction& action) {
  switch (action.kind) {
    case ActionKind::db_operation:
      return "Action: Operation\n```sql\n" + action.payload + "\n```";
    case ActionKind::db_answer:
      return "Action: Answer\nFinal Answer: " + action.payload;
    case ActionKind::os_bash:
      return "Act: bash\n```bash\n" + action.payload + "\n```";
    case ActionKind::os_finish:
      return "Act: finish";
    case ActionKind::kg_action:
      return action.call ? render_kg_call(*action.call) : action.payload;
    case ActionKind::kg_answer:
      return "Final Answer: " + action.payload;
    case ActionKind::invalid:
      return action.payload;
  }
  return action.payload;
}

std::string render_kg_call(const KgCall& call) {
  std::string out = call.name + "(";
  for (std::size_t i = 0; i < call.args.size(); ++i) {
    if (i > 0) out += ",";
    out += call.args[i];
  }
  out += ")";
  return out;
}

std::optional<KgCall> parse_kg_call(const std::string& text) {
  auto action = parse_kg(trim(text));
  if (action.kind != ActionKind::kg_action) return std::nullopt;
  return action.call;
}

}  // namespace seqbench
