#pragma once

#include <memory>
#include <string>

#include "seqbench/model.hpp"
#include "seqbench/tokenizer.hpp"
#include "seqbench/types.hpp"

namespace seqbench {

struct InferenceResult {
  // running means success; otherwise one of the agent_* failure statuses.
  SampleStatus failure = SampleStatus::running;
  std::string text;
  std::int64_t prompt_tokens = 0;
  std::string diagnostic;

  bool ok() const { return failure == SampleStatus::running; }
};

// Turns a chat history into the next agent message. The prompt is checked
// against the model's declared context limit before the call; backend-reported
// overflow and OOM are mapped onto the same failure statuses.
class Agent {
 public:
  Agent(std::shared_ptr<Model> model, std::shared_ptr<Tokenizer> tokenizer);

  InferenceResult inference(const ChatHistory& history) const;

  Model& model() const { return *model_; }
  const Tokenizer& tokenizer() const { return *tokenizer_; }
  std::shared_ptr<Model> model_handle() const { return model_; }

 private:
  std::shared_ptr<Model> model_;
  std::shared_ptr<Tokenizer> tokenizer_;
};

}  // namespace seqbench
