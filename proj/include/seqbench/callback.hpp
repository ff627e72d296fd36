#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "seqbench/agent.hpp"
#include "seqbench/environment.hpp"
#include "seqbench/types.hpp"

namespace seqbench {

enum class CallbackEvent {
  restore_state,
  on_session_create,
  on_environment_reset,
  on_agent_inference,
  on_environment_interact,
  on_environment_complete,
  on_state_save,
};

std::string to_string(CallbackEvent event);

// The four booleans gating the steps of the interaction loop. All default
// true at session start and are reset to true at the top of every loop
// iteration after the first; callbacks flip them to skip steps.
struct ControlFlags {
  bool should_environment_reset = true;
  bool should_agent_inference = true;
  bool should_environment_interact = true;
  bool should_environment_complete = true;

  void reset() { *this = ControlFlags{}; }
  bool all_set() const {
    return should_environment_reset && should_agent_inference &&
           should_environment_interact && should_environment_complete;
  }
};

// Handlers receive the agent, the environment, the live session, the list of
// prior sessions and the control flags, all by reference; mutations are how
// callbacks influence the run. `prompt_injection` holds messages merged into
// the agent's prompt ahead of the current question without entering the
// persisted history. `callback_states` is non-null only during
// restore_state / on_state_save.
struct CallbackContext {
  Agent* agent = nullptr;
  Environment* environment = nullptr;
  Session* session = nullptr;
  std::vector<Session>* history = nullptr;
  ControlFlags* flags = nullptr;
  ChatHistory* prompt_injection = nullptr;
  std::map<std::string, std::string>* callback_states = nullptr;
};

// Base callback: every handler defaults to a no-op; override the events of
// interest. Callbacks in a chain are isolated and unaware of each other.
class Callback {
 public:
  virtual ~Callback() = default;
  virtual std::string name() const = 0;

  virtual void restore_state(CallbackContext&) {}
  virtual void on_session_create(CallbackContext&) {}
  virtual void on_environment_reset(CallbackContext&) {}
  virtual void on_agent_inference(CallbackContext&) {}
  virtual void on_environment_interact(CallbackContext&) {}
  virtual void on_environment_complete(CallbackContext&) {}
  virtual void on_state_save(CallbackContext&) {}
};

using CallbackList = std::vector<std::shared_ptr<Callback>>;

// Invokes every callback's handler for `event` in registration order.
void dispatch_event(CallbackEvent event, CallbackContext& ctx, const CallbackList& callbacks);

}  // namespace seqbench
