#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "seqbench/action.hpp"

namespace seqbench {

struct Triple {
  std::string subject;
  std::string relation;
  std::string object;
  bool operator<(const Triple& other) const {
    return std::tie(subject, relation, object) <
           std::tie(other.subject, other.relation, other.object);
  }
};

// In-memory graph fixture: triples plus numeric attributes keyed by
// (entity, attribute). Fixture files are TSV, one record per line; a line
// whose third field parses fully as a number is an attribute, otherwise it
// is a triple.
class TripleStore {
 public:
  void add_triple(const std::string& subject, const std::string& relation,
                  const std::string& object);
  void add_attribute(const std::string& entity, const std::string& attribute, double value);

  static TripleStore load(const std::string& path);
  void save(const std::string& path) const;

  const std::vector<Triple>& triples() const { return triples_; }
  const std::map<std::pair<std::string, std::string>, double>& attributes() const {
    return attributes_;
  }

  std::set<std::string> outgoing_relations(const std::set<std::string>& entities) const;
  std::set<std::string> neighbors(const std::set<std::string>& entities,
                                  const std::string& relation) const;
  std::set<std::string> attribute_names(const std::set<std::string>& entities) const;

 private:
  std::vector<Triple> triples_;
  std::set<Triple> triple_set_;
  std::map<std::string, std::map<std::string, std::set<std::string>>> out_index_;
  std::map<std::pair<std::string, std::string>, double> attributes_;
  std::map<std::string, std::set<std::string>> attr_index_;
};

// Named entity-set binding produced by a graph action. Names are dense: after
// k variable-producing actions the table holds exactly #0..#(k-1).
struct KgVariable {
  std::string name;
  std::set<std::string> entities;
  std::string provenance;
};

struct KgApplyResult {
  enum class Kind { relations, attributes, variable, count, error };
  Kind result_kind = Kind::error;
  std::vector<std::string> names;   // relations / attribute ids, sorted
  int variable_index = -1;          // into the variable table
  std::int64_t count = 0;
  std::string error;
};

// Executes one of the seven actions against the store, appending to `vars`
// when the action produces a variable. Referencing an undefined variable is
// an error result, an absent relation just yields an empty variable.
KgApplyResult kg_apply(const KgCall& call, const TripleStore& store,
                       std::vector<KgVariable>& vars);

// Replays a ground-truth action sequence; used by dataset validation and the
// scripted fixtures. Returns the final variable's entities or the final
// count, with an error string on malformed sequences.
struct KgReplayResult {
  bool ok = false;
  std::string error;
  bool is_count = false;
  std::int64_t count = 0;
  std::set<std::string> entities;
};

KgReplayResult replay_kg_actions(const TripleStore& store,
                                 const std::vector<std::string>& actions);

}  // namespace seqbench
