#include "seqbench/callback.hpp"

namespace seqbench {

std::string to_string(CallbackEvent event) {
  switch (event) {
    case CallbackEvent::restore_state: return "restore_state";
    case CallbackEvent::on_session_create: return "on_session_create";
    case CallbackEvent::on_environment_reset: return "on_environment_reset";
    case CallbackEvent::on_agent_inference: return "on_agent_inference";
    case CallbackEvent::on_environment_interact: return "on_environment_interact";
    case CallbackEvent::on_environment_complete: return "on_environment_complete";
    case CallbackEvent::on_state_save: return "on_state_save";
  }
  return "unknown";
}

void dispatch_event(CallbackEvent event, CallbackContext& ctx, const CallbackList& callbacks) {
  for (const auto& callback : callbacks) {
    switch (event) {
      case CallbackEvent::restore_state: callback->restore_state(ctx); break;
      case CallbackEvent::on_session_create: callback->on_session_create(ctx); break;
      case CallbackEvent::on_environment_reset: callback->on_environment_reset(ctx); break;
      case CallbackEvent::on_agent_inference: callback->on_agent_inference(ctx); break;
      case CallbackEvent::on_environment_interact: callback->on_environment_interact(ctx); break;
      case CallbackEvent::on_environment_complete: callback->on_environment_complete(ctx); break;
      case CallbackEvent::on_state_save: callback->on_state_save(ctx); break;
    }
  }
}

}  // namespace seqbench
