#include "seqbench/agent.hpp"

namespace seqbench {

Agent::Agent(std::shared_ptr<Model> model, std::shared_ptr<Tokenizer> tokenizer)
    : model_(std::move(model)), tokenizer_(std::move(tokenizer)) {}

InferenceResult Agent::inference(const ChatHistory& history) const {
  InferenceResult result;
  result.prompt_tokens = count_prompt_tokens(*tokenizer_, history);
  if (result.prompt_tokens > model_->context_limit()) {
    result.failure = SampleStatus::agent_context_limit;
    result.diagnostic = "prompt of " + std::to_string(result.prompt_tokens) +
                        " tokens exceeds context limit " + std::to_string(model_->context_limit());
    return result;
  }
  try {
    result.text = model_->complete(history);
  } catch (const ModelContextOverflow& e) {
    result.failure = SampleStatus::agent_context_limit;
    result.diagnostic = e.what();
  } catch (const ModelOutOfMemory& e) {
    result.failure = SampleStatus::agent_out_of_memory;
    result.diagnostic = e.what();
  } catch (const std::exception& e) {
    result.failure = SampleStatus::agent_unknown_error;
    result.diagnostic = e.what();
  }
  return result;
}

}  // namespace seqbench
