#include "seqbench/replay.hpp"

#include <algorithm>
#include <charconv>
#include <stdexcept>

#include "seqbench/action.hpp"
#include "seqbench/env_kg.hpp"
#include "seqbench/serialize.hpp"
#include "seqbench/values.hpp"

namespace seqbench {

const std::string kUnparseableAnswer = "\xe2\x8a\xa5";  // ⊥

std::string ExperienceStore::serialize() const {
  Json j = Json::array();
  for (const auto& session : sessions_) j.push_back(session_to_json(session));
  return j.dump();
}

ExperienceStore ExperienceStore::deserialize(const std::string& bytes) {
  ExperienceStore store;
  for (const auto& item : Json::parse(bytes)) {
    store.append(session_from_json(item));
  }
  return store;
}

std::vector<Session> select_experiences(const ExperienceStore& store, std::size_t n) {
  std::vector<Session> out;
  const auto& sessions = store.sessions();
  for (auto it = sessions.rbegin(); it != sessions.rend() && out.size() < n; ++it) {
    if (it->reward == 1) out.push_back(*it);
  }
  return out;
}

namespace {

std::size_t injection_index(const ChatHistory& history) {
  if (history.empty()) return 0;
  // After the preamble and acknowledgement, before the task question.
  return std::min<std::size_t>(2, history.size() - 1);
}

}  // namespace

ChatHistory inject_experiences(const ChatHistory& history, const std::vector<Session>& experiences) {
  ChatHistory out = history;
  std::size_t at = injection_index(out);
  std::vector<ChatMessage> block;
  for (const auto& exp : experiences) {
    block.insert(block.end(), exp.history.messages.begin(), exp.history.messages.end());
  }
  out.messages.insert(out.messages.begin() + static_cast<std::ptrdiff_t>(at), block.begin(),
                      block.end());
  return out;
}

std::vector<std::vector<Session>> partition_groups(const std::vector<Session>& experiences,
                                                   std::size_t g) {
  if (g == 0) throw std::invalid_argument("group count must be at least 1");
  std::vector<std::vector<Session>> groups;
  std::size_t len = experiences.size();
  std::size_t base = len / g;
  std::size_t remainder = len % g;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < g; ++i) {
    std::size_t size = base + (i < remainder ? 1 : 0);
    if (size == 0) break;  // trailing empty groups are dropped
    groups.emplace_back(experiences.begin() + static_cast<std::ptrdiff_t>(pos),
                        experiences.begin() + static_cast<std::ptrdiff_t>(pos + size));
    pos += size;
  }
  return groups;
}

namespace {

std::string trim_copy(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string canonicalize_kg_answer(const std::string& raw) {
  std::string payload = trim_copy(raw);
  if (payload.empty()) return kUnparseableAnswer;
  if (payload[0] == '#') return payload;  // variable reference; resolved when a live env is given
  // Integer answer.
  {
    std::int64_t value = 0;
    auto res = std::from_chars(payload.data(), payload.data() + payload.size(), value);
    if (res.ec == std::errc() && res.ptr == payload.data() + payload.size()) {
      return std::to_string(value);
    }
  }
  // Entity set, braces optional.
  if (payload.front() == '{' && payload.back() == '}') {
    payload = payload.substr(1, payload.size() - 2);
  }
  std::set<std::string> entities;
  std::string current;
  for (char c : payload + ",") {
    if (c == ',') {
      std::string id = trim_copy(current);
      if (!id.empty()) entities.insert(id);
      current.clear();
    } else {
      current += c;
    }
  }
  if (entities.empty()) return kUnparseableAnswer;
  return canonical_entity_set(entities);
}

}  // namespace

std::string canonicalize_answer(EnvKind env_kind, const std::string& raw_answer) {
  switch (env_kind) {
    case EnvKind::db: {
      auto canonical = canonical_rows_literal(raw_answer);
      return canonical ? *canonical : kUnparseableAnswer;
    }
    case EnvKind::kg:
      return canonicalize_kg_answer(raw_answer);
    case EnvKind::os:
      return "finish";
  }
  return kUnparseableAnswer;
}

std::string candidate_vote_key(EnvKind env_kind, const std::string& message_text,
                               const Environment* environment) {
  ParsedAction action = parse_action(env_kind, message_text);
  switch (action.kind) {
    case ActionKind::invalid:
      return kUnparseableAnswer;
    case ActionKind::db_answer:
      return "answer:" + canonicalize_answer(EnvKind::db, action.payload);
    case ActionKind::db_operation:
    case ActionKind::os_bash:
      return "op:" + action.payload;
    case ActionKind::os_finish:
      return "answer:finish";
    case ActionKind::kg_action:
      return "op:" + action.payload;
    case ActionKind::kg_answer: {
      std::string payload = action.payload;
      if (!payload.empty() && payload[0] == '#' && environment != nullptr) {
        if (const auto* kg = dynamic_cast<const KgEnvironment*>(environment)) {
          if (auto entities = kg->resolve_answer_entities(payload)) {
            return "answer:" + canonical_entity_set(*entities);
          }
          return kUnparseableAnswer;
        }
      }
      return "answer:" + canonicalize_answer(EnvKind::kg, payload);
    }
  }
  return kUnparseableAnswer;
}

std::string majority_vote(const std::vector<std::string>& candidates) {
  if (candidates.empty()) throw std::invalid_argument("majority_vote requires candidates");
  std::map<std::string, std::size_t> counts;
  for (const auto& c : candidates) ++counts[c];
  std::size_t best = 0;
  for (const auto& [_, count] : counts) best = std::max(best, count);
  // The first candidate holding a modal value wins, which is exactly the
  // lowest-group-index tie-break.
  for (const auto& c : candidates) {
    if (counts[c] == best) return c;
  }
  return candidates.front();
}

ChatHistory merge_prompt(const ChatHistory& history, const ChatHistory& injection) {
  if (injection.empty()) return history;
  ChatHistory out = history;
  std::size_t at = injection_index(out);
  out.messages.insert(out.messages.begin() + static_cast<std::ptrdiff_t>(at),
                      injection.messages.begin(), injection.messages.end());
  return out;
}

namespace {

// Oldest first inside the prompt; selection order is most recent first.
ChatHistory build_injection(std::vector<Session> experiences) {
  std::reverse(experiences.begin(), experiences.end());
  ChatHistory block;
  for (const auto& exp : experiences) {
    block.messages.insert(block.messages.end(), exp.history.messages.begin(),
                          exp.history.messages.end());
  }
  return block;
}

}  // namespace

void ExperienceReplayCallback::on_environment_reset(CallbackContext& ctx) {
  if (!ctx.prompt_injection) return;
  *ctx.prompt_injection = build_injection(select_experiences(store_, n_));
}

void ExperienceReplayCallback::on_environment_complete(CallbackContext& ctx) {
  if (ctx.session) store_.append(*ctx.session);
}

void ExperienceReplayCallback::on_state_save(CallbackContext& ctx) {
  if (ctx.callback_states) (*ctx.callback_states)[name()] = store_.serialize();
}

void ExperienceReplayCallback::restore_state(CallbackContext& ctx) {
  if (!ctx.callback_states) return;
  auto it = ctx.callback_states->find(name());
  if (it != ctx.callback_states->end()) store_ = ExperienceStore::deserialize(it->second);
}

GroupSelfConsistencyCallback::GroupSelfConsistencyCallback(std::size_t n, std::size_t g)
    : ExperienceReplayCallback(n), g_(g) {
  if (g == 0) throw std::invalid_argument("group count must be at least 1");
}

void GroupSelfConsistencyCallback::on_environment_reset(CallbackContext& ctx) {
  group_injections_.clear();
  auto selected = select_experiences(store_, n_);
  for (auto& group : partition_groups(selected, g_)) {
    group_injections_.push_back(build_injection(std::move(group)));
  }
  if (ctx.prompt_injection) {
    *ctx.prompt_injection = group_injections_.empty() ? ChatHistory{} : group_injections_[0];
  }
}

void GroupSelfConsistencyCallback::on_agent_inference(CallbackContext& ctx) {
  if (group_injections_.size() <= 1) return;  // degenerate grouping: plain replay
  if (!ctx.session || !ctx.agent || ctx.session->status != SampleStatus::running) return;
  ChatHistory& history = ctx.session->history;
  if (history.empty() || history.messages.back().role != Role::agent) return;

  EnvKind kind = ctx.environment ? ctx.environment->kind() : EnvKind::db;

  // Group 0 already answered through the regular inference step.
  std::vector<std::string> texts{history.messages.back().content};
  ChatHistory base = history;
  base.messages.pop_back();

  for (std::size_t i = 1; i < group_injections_.size(); ++i) {
    ChatHistory prompt = merge_prompt(base, group_injections_[i]);
    InferenceResult result = ctx.agent->inference(prompt);
    ctx.session->input_tokens_total += result.prompt_tokens;
    if (result.prompt_tokens > ctx.session->max_prompt_tokens) {
      ctx.session->max_prompt_tokens = result.prompt_tokens;
    }
    texts.push_back(result.ok() ? result.text : "");
  }

  std::vector<std::string> keys;
  keys.reserve(texts.size());
  for (const auto& text : texts) {
    keys.push_back(candidate_vote_key(kind, text, ctx.environment));
  }
  std::string winner = majority_vote(keys);
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (keys[i] == winner) {
      history.messages.back().content = texts[i];
      break;
    }
  }
}

}  // namespace seqbench
