#include "seqbench/metrics.hpp"

#include <unordered_map>

namespace seqbench {

double success_rate(std::span<const Session> sessions) {
  if (sessions.empty()) return 0.0;
  std::int64_t rewarded = 0;
  for (const auto& s : sessions) rewarded += s.reward;
  return static_cast<double>(rewarded) / static_cast<double>(sessions.size());
}

std::map<SampleStatus, std::int64_t> status_breakdown(std::span<const Session> sessions) {
  std::map<SampleStatus, std::int64_t> counts;
  for (const auto& s : sessions) ++counts[s.status];
  return counts;
}

MetricsReport aggregate_metrics(std::span<const Session> sessions,
                                std::span<const TaskInstance> tasks) {
  MetricsReport report;
  report.session_count = static_cast<std::int64_t>(sessions.size());
  report.status_counts = status_breakdown(sessions);
  report.success_rate = success_rate(sessions);

  std::unordered_map<std::string, const TaskInstance*> by_id;
  for (const auto& t : tasks) by_id[t.task_id] = &t;

  std::int64_t token_sum = 0;
  for (const auto& s : sessions) {
    report.total_reward += s.reward;
    token_sum += s.input_tokens_total;
    if (s.max_prompt_tokens > report.max_prompt_tokens) {
      report.max_prompt_tokens = s.max_prompt_tokens;
    }
    auto it = by_id.find(s.task_id);
    if (it == by_id.end()) continue;
    const TaskInstance& task = *it->second;
    for (const auto& skill : task.skills) {
      auto& tally = report.per_skill_success[skill];
      ++tally.attempts;
      tally.successes += s.reward;
    }
    if (task.difficulty) {
      auto& tally = report.per_difficulty[difficulty_bucket_name(*task.difficulty)];
      ++tally.attempts;
      tally.successes += s.reward;
    }
  }
  if (!sessions.empty()) {
    report.avg_input_tokens = static_cast<double>(token_sum) / static_cast<double>(sessions.size());
  }
  return report;
}

}  // namespace seqbench
