#pragma once

#include <optional>
#include <string>
#include <vector>

#include "seqbench/types.hpp"

namespace seqbench {

enum class ActionKind {
  db_operation,
  db_answer,
  os_bash,
  os_finish,
  kg_action,
  kg_answer,
  invalid,
};

std::string to_string(ActionKind kind);

struct KgCall {
  std::string name;
  std::vector<std::string> args;
};

struct ParsedAction {
  ActionKind kind = ActionKind::invalid;
  // db_operation: the single SQL statement from the first sql code block.
  // db_answer: the text after "Final Answer:".
  // os_bash: the script from the first bash code block.
  // kg_answer: a variable name "#k" or an integer literal.
  // invalid: the diagnostic.
  std::string payload;
  std::optional<KgCall> call;  // set for kg_action
};

// Total over all inputs: every string maps to exactly one kind. Markers are
// matched literally, per the instruction text the environments hand out.
ParsedAction parse_action(EnvKind env_kind, const std::string& text);

// Re-renders a well-formed action the way an agent would emit it. Parsing the
// result yields the same payload byte-exact.
std::string render_action(EnvKind env_kind, const ParsedAction& action);

std::string render_kg_call(const KgCall& call);
std::optional<KgCall> parse_kg_call(const std::string& text);

}  // namespace seqbench
