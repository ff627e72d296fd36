#pragma once

#include <span>
#include <vector>

#include "seqbench/types.hpp"

namespace seqbench {

// Fraction of sessions with reward 1. Empty input yields 0.
double success_rate(std::span<const Session> sessions);

std::map<SampleStatus, std::int64_t> status_breakdown(std::span<const Session> sessions);

// Core aggregation over terminal sessions. Per-skill and per-difficulty
// tallies need the tasks the sessions came from; sessions without a matching
// task contribute to the global numbers only.
MetricsReport aggregate_metrics(std::span<const Session> sessions,
                                std::span<const TaskInstance> tasks);

}  // namespace seqbench
