#include "seqbench/env_kg.hpp"

#include <charconv>

#include "seqbench/metrics.hpp"

namespace seqbench {

std::string canonical_entity_set(const std::set<std::string>& entities) {
  std::string out;
  for (const auto& e : entities) {
    if (!out.empty()) out += ",";
    out += e;
  }
  return out;
}

KgEnvironment::KgEnvironment(std::shared_ptr<TripleStore> store,
                             std::shared_ptr<HistoryItemFactory> factory)
    : store_(std::move(store)), factory_(std::move(factory)) {}

ChatHistory KgEnvironment::reset(const TaskInstance& task) {
  guard_.on_reset();
  current_task_ = task;
  vars_.clear();
  submitted_answer_.reset();

  std::string question = task.instruction;
  const auto& entities = task.kg_setup().entities;
  if (!entities.empty()) {
    question += "\nEntities: ";
    for (std::size_t i = 0; i < entities.size(); ++i) {
      if (i > 0) question += ", ";
      question += entities[i].name + " (" + entities[i].id + ")";
    }
  }
  return factory_->construct(EnvKind::kg, question);
}

InteractResult KgEnvironment::interact(const ParsedAction& action) {
  guard_.on_interact();
  if (action.kind == ActionKind::kg_answer) {
    submitted_answer_ = action.payload;
    return {std::nullopt, true};
  }
  if (action.kind != ActionKind::kg_action || !action.call) {
    throw std::logic_error("kg environment cannot execute action kind " + to_string(action.kind));
  }
  KgApplyResult result = kg_apply(*action.call, *store_, vars_);
  switch (result.result_kind) {
    case KgApplyResult::Kind::relations:
    case KgApplyResult::Kind::attributes: {
      std::string obs = "[";
      for (std::size_t i = 0; i < result.names.size(); ++i) {
        if (i > 0) obs += ", ";
        obs += result.names[i];
      }
      obs += "]";
      return {obs, false};
    }
    case KgApplyResult::Kind::variable:
      return {"Variable " + vars_[result.variable_index].name, false};
    case KgApplyResult::Kind::count:
      return {std::to_string(result.count), false};
    case KgApplyResult::Kind::error:
      return {result.error, false};
  }
  return {std::string("Error: action could not be executed."), false};
}

std::optional<std::set<std::string>> KgEnvironment::resolve_answer_entities(
    const std::string& payload) const {
  if (!payload.empty() && payload[0] == '#') {
    std::size_t index = 0;
    auto res = std::from_chars(payload.data() + 1, payload.data() + payload.size(), index);
    if (res.ec != std::errc() || res.ptr != payload.data() + payload.size() ||
        index >= vars_.size()) {
      return std::nullopt;
    }
    return vars_[index].entities;
  }
  // Comma-separated entity ids.
  std::set<std::string> out;
  std::string current;
  for (char c : payload + ",") {
    if (c == ',') {
      auto b = current.find_first_not_of(" \t");
      auto e = current.find_last_not_of(" \t");
      if (b != std::string::npos) out.insert(current.substr(b, e - b + 1));
      current.clear();
    } else {
      current += c;
    }
  }
  if (out.empty()) return std::nullopt;
  return out;
}

int KgEnvironment::complete() {
  guard_.on_complete();
  const KgGroundTruth& truth = current_task_.kg_truth();
  int reward = 0;
  if (submitted_answer_) {
    if (truth.answer_count) {
      // Accept the number itself or a variable holding the counted set.
      std::int64_t value = 0;
      auto res = std::from_chars(submitted_answer_->data(),
                                 submitted_answer_->data() + submitted_answer_->size(), value);
      if (res.ec == std::errc() && res.ptr == submitted_answer_->data() + submitted_answer_->size()) {
        reward = value == *truth.answer_count ? 1 : 0;
      } else if (auto entities = resolve_answer_entities(*submitted_answer_)) {
        reward = static_cast<std::int64_t>(entities->size()) == *truth.answer_count ? 1 : 0;
      }
    } else if (truth.answer_entities) {
      auto entities = resolve_answer_entities(*submitted_answer_);
      if (entities && *entities == *truth.answer_entities) reward = 1;
    }
  }
  vars_.clear();
  submitted_answer_.reset();
  return reward;
}

MetricsReport KgEnvironment::calculate_metric(std::span<const Session> sessions,
                                              std::span<const TaskInstance> tasks) {
  return aggregate_metrics(sessions, tasks);
}

void KgEnvironment::release() {
  guard_.on_release();
  store_.reset();
}

}  // namespace seqbench
