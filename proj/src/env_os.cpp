#include "seqbench/env_os.hpp"

#include "seqbench/metrics.hpp"

namespace seqbench {

std::string truncate_observation(const std::string& text, std::size_t limit) {
  if (text.size() <= limit || limit == 0) return text;
  std::size_t head = limit / 2;
  std::size_t tail = limit - head;
  std::size_t omitted = text.size() - head - tail;
  return text.substr(0, head) + "..." + std::to_string(omitted) + " characters is omitted..." +
         text.substr(text.size() - tail);
}

OsEnvironment::OsEnvironment(std::shared_ptr<ExecBackend> backend,
                             std::shared_ptr<HistoryItemFactory> factory,
                             OsEnvironmentOptions options)
    : backend_(std::move(backend)), factory_(std::move(factory)), options_(options) {}

ChatHistory OsEnvironment::reset(const TaskInstance& task) {
  guard_.on_reset();
  current_task_ = task;
  try {
    backend_->fresh();
    const std::string& init = task.os_setup().init_script;
    if (!init.empty()) {
      ExecResult result = backend_->run(init);
      if (result.exit_code != 0) {
        throw EnvironmentBackendError("task initialization script failed with exit " +
                                      std::to_string(result.exit_code) + ": " + result.stdout_text);
      }
    }
  } catch (const std::logic_error&) {
    guard_.abort_task();
    throw;
  } catch (const EnvironmentBackendError&) {
    guard_.abort_task();
    throw;
  } catch (const std::exception& e) {
    guard_.abort_task();
    throw EnvironmentBackendError(e.what());
  }
  return factory_->construct(EnvKind::os, task.instruction);
}

InteractResult OsEnvironment::interact(const ParsedAction& action) {
  guard_.on_interact();
  if (action.kind == ActionKind::os_finish) {
    return {std::nullopt, true};
  }
  if (action.kind != ActionKind::os_bash) {
    throw std::logic_error("os environment cannot execute action kind " + to_string(action.kind));
  }
  ExecResult result;
  try {
    result = backend_->run(action.payload);
  } catch (const std::logic_error&) {
    throw;
  } catch (const std::exception& e) {
    throw EnvironmentBackendError(e.what());
  }
  std::string observation;
  if (result.stdout_text.empty()) {
    observation = "The output of the OS is empty.";
  } else {
    observation = "The output of the OS:\n\n" +
                  truncate_observation(result.stdout_text, options_.observation_limit);
  }
  return {observation, false};
}

int OsEnvironment::complete() {
  guard_.on_complete();
  int reward = 0;
  try {
    ExecResult eval = backend_->run(current_task_.os_truth().eval_script);
    reward = eval.exit_code == 0 ? 1 : 0;
    backend_->destroy();
  } catch (const std::logic_error&) {
    throw;
  } catch (const std::exception& e) {
    throw EnvironmentBackendError(e.what());
  }
  return reward;
}

MetricsReport OsEnvironment::calculate_metric(std::span<const Session> sessions,
                                              std::span<const TaskInstance> tasks) {
  return aggregate_metrics(sessions, tasks);
}

void OsEnvironment::release() {
  guard_.on_release();
  if (backend_) backend_->destroy();
  backend_.reset();
}

}  // namespace seqbench
