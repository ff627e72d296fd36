#pragma once

#include <string>

#include "seqbench/types.hpp"

namespace seqbench {

// The instruction preamble each environment hands out. The wording doubles as
// the parsing contract for agent replies, so it is fixed verbatim.
const std::string& db_preamble();
const std::string& os_preamble();
const std::string& kg_preamble();

// Builds the initial interaction history for a task: the environment
// preamble, a canned acknowledgement, then the task goal. Kept separate from
// the environments so prompt construction can run in its own process.
class HistoryItemFactory {
 public:
  virtual ~HistoryItemFactory() = default;

  virtual ChatHistory construct(EnvKind env_kind, const std::string& instruction);

  // Free-form text appended to the preamble; exists so deployments can tweak
  // prompting without forking an environment, and doubles as the mutable
  // state the distributed tests observe across processes.
  virtual std::string preamble_suffix() const { return suffix_; }
  virtual void set_preamble_suffix(const std::string& suffix) { suffix_ = suffix; }

 private:
  std::string suffix_;
};

}  // namespace seqbench
