#pragma once

#include <string>

namespace seqbench::demo {

// Writes the bundled demo data into `dir`: the mini datasets (12 db, 10 kg,
// 8 os tasks), the knowledge-graph fixture, scripted agent files whose
// replies pin the expected outcome of every task, and ready-to-run configs.
// Deterministic: regenerating produces identical files.
void write_demo_data(const std::string& dir);

}  // namespace seqbench::demo
