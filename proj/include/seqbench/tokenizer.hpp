#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "seqbench/types.hpp"

namespace seqbench {

// Token accounting is pluggable; the bundled tokenizer is a deterministic
// whitespace split, which is enough for the monotone trend checks the
// harness reports.
class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  virtual std::int64_t count_tokens(const std::string& text) const = 0;
};

class WhitespaceTokenizer : public Tokenizer {
 public:
  std::int64_t count_tokens(const std::string& text) const override;
};

// Renders a chat history into the single text sequence fed to a model.
std::string render_history(const ChatHistory& history);

std::int64_t count_prompt_tokens(const Tokenizer& tokenizer, const ChatHistory& history);

std::shared_ptr<Tokenizer> make_default_tokenizer();

}  // namespace seqbench
