#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "seqbench/callback.hpp"

namespace seqbench {

// Terminal sessions in execution order; the memory experience replay draws
// from. Append-only, and serialized into the snapshot so interrupted
// experiments resume with the same memory.
class ExperienceStore {
 public:
  void append(Session session) { sessions_.push_back(std::move(session)); }
  const std::vector<Session>& sessions() const { return sessions_; }
  std::size_t size() const { return sessions_.size(); }

  std::string serialize() const;
  static ExperienceStore deserialize(const std::string& bytes);

 private:
  std::vector<Session> sessions_;
};

// Up to n sessions with reward 1, most recent first.
std::vector<Session> select_experiences(const ExperienceStore& store, std::size_t n);

// New history with each experience's full message sequence inserted after the
// task preamble and before the current question (oldest experience first as
// given). The input history is untouched.
ChatHistory inject_experiences(const ChatHistory& history, const std::vector<Session>& experiences);

// Splits experiences into g contiguous sublists whose concatenation preserves
// the input order; sizes differ by at most one with earlier groups taking the
// remainder, and trailing empty groups are dropped. g must be >= 1.
std::vector<std::vector<Session>> partition_groups(const std::vector<Session>& experiences,
                                                   std::size_t g);

// Marker for answers that could not be parsed; distinct from every valid
// canonical form.
extern const std::string kUnparseableAnswer;

// Canonical comparison form of a committed final answer: DB literals are
// re-rendered with normalized numbers and whitespace (row order kept), KG
// entity sets sort lexicographically, OS answers collapse to the finish
// marker.
std::string canonicalize_answer(EnvKind env_kind, const std::string& raw_answer);

// Comparison key over a whole candidate agent message: answers go through
// canonicalize_answer, operations through their normalized payload,
// unparseable messages map to the bottom marker.
std::string candidate_vote_key(EnvKind env_kind, const std::string& message_text,
                               const Environment* environment = nullptr);

// Modal value; ties break toward the candidate from the lowest index (group 0
// holds the most recent experiences). Candidates must be non-empty.
std::string majority_vote(const std::vector<std::string>& candidates);

// Merges the prompt-only injection block into a history for inference.
ChatHistory merge_prompt(const ChatHistory& history, const ChatHistory& injection);

// Replays up to n recent successful transcripts into every prompt.
// Config name: "experience_replay", param n.
class ExperienceReplayCallback : public Callback {
 public:
  explicit ExperienceReplayCallback(std::size_t n) : n_(n) {}

  std::string name() const override { return "experience_replay"; }

  void on_environment_reset(CallbackContext& ctx) override;
  void on_environment_complete(CallbackContext& ctx) override;
  void on_state_save(CallbackContext& ctx) override;
  void restore_state(CallbackContext& ctx) override;

  const ExperienceStore& store() const { return store_; }

 protected:
  std::size_t n_;
  ExperienceStore store_;
};

// Splits the retrieved experiences into g groups, prompts once per group and
// keeps the majority answer. Group 0 rides the regular inference step, the
// remaining groups run extra inferences at on_agent_inference; with g=1 the
// behavior is exactly plain replay. Config name: "group_self_consistency",
// params n and g.
class GroupSelfConsistencyCallback : public ExperienceReplayCallback {
 public:
  GroupSelfConsistencyCallback(std::size_t n, std::size_t g);

  std::string name() const override { return "group_self_consistency"; }

  void on_environment_reset(CallbackContext& ctx) override;
  void on_agent_inference(CallbackContext& ctx) override;

 private:
  std::size_t g_;
  std::vector<ChatHistory> group_injections_;  // index 0 = most recent group
};

}  // namespace seqbench
