#pragma once

// Declarative experiment runner behind the CLI: builds problems and
// parameter bundles from a flat config, runs the requested mode, and writes
// CSV artifacts plus a MANIFEST into the output directory.

#include "tikflow/config.hpp"
#include "tikflow/ipg.hpp"
#include "tikflow/lyapunov.hpp"
#include "tikflow/rates.hpp"

namespace tikflow {

// Modes: run-ode | run-ipga | compare | predict | audit | check-appendix.
// Returns the process exit code (0 = success and all requested audits pass).
int run_experiment(const Config& cfg, const std::string& mode,
                   const std::string& out_dir);

// Config -> typed bundles (exposed for tests).
ObjectiveOracle problem_from_config(const Config& cfg);
FlowParams flow_from_config(const Config& cfg);
StepParams step_from_config(const Config& cfg);

void write_trajectory_csv(const std::string& path, const Trajectory& traj, int dim);
void write_iterates_csv(const std::string& path, const IterateLog& log, int dim,
                        bool with_calE, bool with_E);

}  // namespace tikflow
