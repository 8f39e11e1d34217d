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

#include <optional>
#include <stdexcept>
#include <string>

namespace ppipower {

enum class ErrorCode {
    domain,            // argument outside the mathematical domain
    invalid_argument,  // violates a documented precondition
    degenerate,        // zero variance where a positive one is required
    unattainable,      // zero effect size, no n reaches the target power
    infeasible,        // no finite n works with the given unlabeled pool
    singular,          // rank-deficient estimating equation
    config,            // bad simulation configuration
    parse,             // malformed input text
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what,
          std::optional<double> minimal_unlabeled = std::nullopt)
        : std::runtime_error(what), code_(code), minimal_unlabeled_(minimal_unlabeled) {}

    ErrorCode code() const noexcept { return code_; }

    // Set for infeasible plans: the smallest unlabeled pool that admits a finite n.
    std::optional<double> minimal_unlabeled() const noexcept { return minimal_unlabeled_; }

private:
    ErrorCode code_;
    std::optional<double> minimal_unlabeled_;
};

// Non-fatal conditions that change which formula was applied.
enum class Warning {
    none,
    zero_prediction_variance,  // var(f) == 0: fell back to the classical estimator
};

}  // namespace ppipower
