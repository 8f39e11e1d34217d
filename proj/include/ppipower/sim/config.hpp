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
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ppipower/sim/generate.hpp"

namespace ppipower::sim {

enum class Experiment { grid, inversion_check, misspecified_rho, unequal_groups };

std::string_view to_string(Experiment e);

/// Declarative simulation configuration.
///
/// Text form: one `key = value` per line, comma-separated lists, `#` starts
/// a comment. Unknown keys and malformed values raise ErrorCode::config with
/// the offending line number.
struct SimConfig {
    Design design = Design::one_sample_cont;
    Experiment experiment = Experiment::grid;
    std::vector<int> n{20, 40, 60, 80, 100};
    std::vector<int> N{200, 500};
    std::vector<double> rho{0.5, 0.7, 0.9};
    std::vector<double> accuracy{0.70, 0.85, 0.95};
    std::vector<double> delta{0.2};
    double p_base = 0.3;
    std::vector<double> p_treat{0.4};
    std::vector<double> target_power{0.8};
    std::vector<double> rho_shift{-0.2, -0.1, 0.0, 0.1, 0.2};
    std::vector<double> allocation{1.0, 1.5, 2.0, 3.0, 4.0};  ///< n_A : n_B ratios
    int n_total = 100;
    int N_total = 600;
    int replicates = 1000;
    std::uint64_t seed = 1;
    LambdaMode lambda_mode = LambdaMode::oracle;
    int folds = 2;
    OutcomeDist outcome_dist = OutcomeDist::gaussian;
    double alpha = 0.05;
    bool null_runs = false;
    int null_replicates = 0;  ///< 0: same as replicates
    int threads = 0;          ///< 0: hardware concurrency
    int reference_samples = 100000;
    double within_pair_corr = 0.3;

    static SimConfig parse(std::string_view text);
    static SimConfig load(const std::filesystem::path& path);
    void validate() const;
};

}  // namespace ppipower::sim
