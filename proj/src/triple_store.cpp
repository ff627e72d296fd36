#include "seqbench/triple_store.hpp"

#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace seqbench {

namespace {

bool parse_number(const std::string& text, double& out) {
  if (text.empty()) return false;
  char* end = nullptr;
  out = std::strtod(text.c_str(), &end);
  return end == text.c_str() + text.size();
}

}  // namespace

void TripleStore::add_triple(const std::string& subject, const std::string& relation,
                             const std::string& object) {
  if (subject.empty() || relation.empty() || object.empty()) {
    throw std::invalid_argument("triple fields must be non-empty");
  }
  Triple t{subject, relation, object};
  if (!triple_set_.insert(t).second) return;
  triples_.push_back(t);
  out_index_[subject][relation].insert(object);
}

void TripleStore::add_attribute(const std::string& entity, const std::string& attribute,
                                double value) {
  if (entity.empty() || attribute.empty()) {
    throw std::invalid_argument("attribute fields must be non-empty");
  }
  attributes_[{entity, attribute}] = value;
  attr_index_[entity].insert(attribute);
}

TripleStore TripleStore::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open triple store fixture: " + path);
  TripleStore store;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string a, b, c;
    if (!std::getline(fields, a, '\t') || !std::getline(fields, b, '\t') ||
        !std::getline(fields, c, '\t')) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected 3 tab-separated fields");
    }
    double value = 0;
    if (parse_number(c, value)) {
      store.add_attribute(a, b, value);
    } else {
      store.add_triple(a, b, c);
    }
  }
  return store;
}

void TripleStore::save(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write triple store fixture: " + path);
  for (const auto& t : triples_) {
    out << t.subject << "\t" << t.relation << "\t" << t.object << "\n";
  }
  for (const auto& [key, value] : attributes_) {
    out << key.first << "\t" << key.second << "\t" << value << "\n";
  }
}

std::set<std::string> TripleStore::outgoing_relations(const std::set<std::string>& entities) const {
  std::set<std::string> out;
  for (const auto& e : entities) {
    auto it = out_index_.find(e);
    if (it == out_index_.end()) continue;
    for (const auto& [relation, _] : it->second) out.insert(relation);
  }
  return out;
}

std::set<std::string> TripleStore::neighbors(const std::set<std::string>& entities,
                                             const std::string& relation) const {
  std::set<std::string> out;
  for (const auto& e : entities) {
    auto it = out_index_.find(e);
    if (it == out_index_.end()) continue;
    auto rel = it->second.find(relation);
    if (rel == it->second.end()) continue;
    out.insert(rel->second.begin(), rel->second.end());
  }
  return out;
}

std::set<std::string> TripleStore::attribute_names(const std::set<std::string>& entities) const {
  std::set<std::string> out;
  for (const auto& e : entities) {
    auto it = attr_index_.find(e);
    if (it == attr_index_.end()) continue;
    out.insert(it->second.begin(), it->second.end());
  }
  return out;
}

namespace {

struct Resolved {
  bool ok = false;
  std::set<std::string> entities;
  std::string error;
};

Resolved resolve_argument(const std::string& arg, const std::vector<KgVariable>& vars) {
  if (!arg.empty() && arg[0] == '#') {
    std::size_t index = 0;
    auto res = std::from_chars(arg.data() + 1, arg.data() + arg.size(), index);
    if (res.ec != std::errc() || res.ptr != arg.data() + arg.size() || index >= vars.size()) {
      return {false, {}, "Error: variable " + arg + " is not defined."};
    }
    return {true, vars[index].entities, ""};
  }
  return {true, {arg}, ""};
}

KgApplyResult make_variable(std::vector<KgVariable>& vars, std::set<std::string> entities,
                            std::string provenance) {
  KgVariable var;
  var.name = "#" + std::to_string(vars.size());
  var.entities = std::move(entities);
  var.provenance = std::move(provenance);
  vars.push_back(std::move(var));
  KgApplyResult result;
  result.result_kind = KgApplyResult::Kind::variable;
  result.variable_index = static_cast<int>(vars.size()) - 1;
  return result;
}

}  // namespace

KgApplyResult kg_apply(const KgCall& call, const TripleStore& store,
                       std::vector<KgVariable>& vars) {
  KgApplyResult error_result;

  auto resolve = [&](const std::string& arg, Resolved& out) {
    out = resolve_argument(arg, vars);
    if (!out.ok) {
      error_result.result_kind = KgApplyResult::Kind::error;
      error_result.error = out.error;
    }
    return out.ok;
  };

  if (call.name == "get_relations") {
    Resolved x;
    if (!resolve(call.args[0], x)) return error_result;
    auto relations = store.outgoing_relations(x.entities);
    KgApplyResult result;
    result.result_kind = KgApplyResult::Kind::relations;
    result.names.assign(relations.begin(), relations.end());
    return result;
  }
  if (call.name == "get_neighbors") {
    Resolved x;
    if (!resolve(call.args[0], x)) return error_result;
    return make_variable(vars, store.neighbors(x.entities, call.args[1]), render_kg_call(call));
  }
  if (call.name == "intersection") {
    Resolved a, b;
    if (!resolve(call.args[0], a) || !resolve(call.args[1], b)) return error_result;
    std::set<std::string> out;
    for (const auto& e : a.entities) {
      if (b.entities.count(e)) out.insert(e);
    }
    return make_variable(vars, std::move(out), render_kg_call(call));
  }
  if (call.name == "get_attributes") {
    Resolved v;
    if (!resolve(call.args[0], v)) return error_result;
    auto attrs = store.attribute_names(v.entities);
    KgApplyResult result;
    result.result_kind = KgApplyResult::Kind::attributes;
    result.names.assign(attrs.begin(), attrs.end());
    return result;
  }
  if (call.name == "argmax" || call.name == "argmin") {
    Resolved v;
    if (!resolve(call.args[0], v)) return error_result;
    const std::string& attr = call.args[1];
    bool want_max = call.name == "argmax";
    double best = want_max ? -std::numeric_limits<double>::infinity()
                           : std::numeric_limits<double>::infinity();
    bool found = false;
    const auto& attrs = store.attributes();
    for (const auto& e : v.entities) {
      auto it = attrs.find({e, attr});
      if (it == attrs.end()) continue;  // entities lacking the attribute are excluded
      if (!found || (want_max ? it->second > best : it->second < best)) {
        best = it->second;
        found = true;
      }
    }
    std::set<std::string> out;
    if (found) {
      for (const auto& e : v.entities) {
        auto it = attrs.find({e, attr});
        if (it != attrs.end() && it->second == best) out.insert(e);
      }
    }
    return make_variable(vars, std::move(out), render_kg_call(call));
  }
  if (call.name == "count") {
    Resolved v;
    if (!resolve(call.args[0], v)) return error_result;
    KgApplyResult result;
    result.result_kind = KgApplyResult::Kind::count;
    result.count = static_cast<std::int64_t>(v.entities.size());
    return result;
  }
  error_result.error = "Error: unknown action " + call.name + ".";
  return error_result;
}

KgReplayResult replay_kg_actions(const TripleStore& store,
                                 const std::vector<std::string>& actions) {
  KgReplayResult result;
  std::vector<KgVariable> vars;
  KgApplyResult last;
  for (const auto& text : actions) {
    auto call = parse_kg_call(text);
    if (!call) {
      result.error = "malformed action: " + text;
      return result;
    }
    last = kg_apply(*call, store, vars);
    if (last.result_kind == KgApplyResult::Kind::error) {
      result.error = last.error;
      return result;
    }
  }
  if (last.result_kind == KgApplyResult::Kind::count) {
    result.ok = true;
    result.is_count = true;
    result.count = last.count;
    return result;
  }
  if (last.result_kind == KgApplyResult::Kind::variable) {
    result.ok = true;
    result.entities = vars[last.variable_index].entities;
    return result;
  }
  result.error = "ground-truth sequence must end in a variable-producing action or count";
  return result;
}

}  // namespace seqbench
