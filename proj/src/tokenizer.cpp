#include "seqbench/tokenizer.hpp"

#include <cctype>

namespace seqbench {

std::int64_t WhitespaceTokenizer::count_tokens(const std::string& text) const {
  std::int64_t count = 0;
  bool in_token = false;
  for (char c : text) {
    bool ws = std::isspace(static_cast<unsigned char>(c));
    if (!ws && !in_token) ++count;
    in_token = !ws;
  }
  return count;
}

std::string render_history(const ChatHistory& history) {
  std::string out;
  for (const auto& msg : history.messages) {
    out += to_string(msg.role);
    out += ": ";
    out += msg.content;
    out += "\n";
  }
  return out;
}

std::int64_t count_prompt_tokens(const Tokenizer& tokenizer, const ChatHistory& history) {
  return tokenizer.count_tokens(render_history(history));
}

std::shared_ptr<Tokenizer> make_default_tokenizer() {
  return std::make_shared<WhitespaceTokenizer>();
}

}  // namespace seqbench
