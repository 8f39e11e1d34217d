/*
   Copyright 2026 The ppipower Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ppipower/sim/config.hpp"
#include "ppipower/sim/generate.hpp"

namespace ppipower::sim {

/// A fully resolved cell plus the planning context it was derived from.
struct SimCell {
    CellSpec spec;
    std::optional<double> target_power;  ///< inversion and misspecification runs
    std::optional<double> rho_plan;      ///< misspecification runs
    bool pool_exhausted = false;         ///< planned n exceeds the unlabeled pool
};

struct SimRow {
    SimCell cell;
    double analytic_power = 0.0;
    double empirical_power = 0.0;
    double abs_discrepancy = 0.0;
    std::optional<double> type1;
    double lambda_rmse = 0.0;
    double mc_stderr = 0.0;
    int n_used = 0;
    int n_dropped = 0;
    double effect = 0.0;  ///< tested effect on the test's own scale
};

struct SimResult {
    std::vector<SimRow> rows;

    std::string to_csv() const;
};

/// Expands a configuration into its ordered list of cells.
std::vector<SimCell> expand_cells(const SimConfig& cfg);

struct RunOptions {
    std::uint64_t seed = 1;
    int threads = 1;
    int reference_samples = 100000;
    bool null_runs = false;
    int null_replicates = 0;
};

/// Simulates one cell. `cell_index` keys the random substreams, so the row
/// depends only on (seed, cell_index, cell) and not on scheduling.
SimRow run_cell(const SimCell& cell, std::uint64_t cell_index, const RunOptions& opt);

SimResult run_experiment(const SimConfig& cfg);

/// Analytic power of the test the cell runs at its finite N. Tuned modes use
/// the oracle variance; classical and vanilla use their fixed-weight variance.
double cell_analytic_power(const CellSpec& cell, const ContrastBlocks* logistic_blocks = nullptr);

}  // namespace ppipower::sim
