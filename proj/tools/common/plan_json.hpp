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

// JSON request handling shared by the command-line tool and the HTTP
// service. Both front ends route through these functions, which is what
// keeps their outputs identical.

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ppipower/ppipower.h"

namespace ppipower::tools {

using Json = nlohmann::ordered_json;

struct FieldError {
    std::string field;
    std::string message;
};

/// A request that cannot be answered. `status` follows HTTP semantics:
/// 400 for malformed input, 422 for well-formed but infeasible plans.
class RequestError : public std::runtime_error {
public:
    RequestError(int status, std::string code, std::vector<FieldError> errors,
                 std::optional<double> minimal_N = std::nullopt);

    int status() const { return status_; }
    const std::string& code() const { return code_; }
    const std::vector<FieldError>& errors() const { return errors_; }
    Json to_json() const;

private:
    int status_;
    std::string code_;
    std::vector<FieldError> errors_;
    std::optional<double> minimal_N_;
};

/// Plan endpoints: "mean", "two-sample", "paired", "two-by-two", "regression".
bool is_plan_design(std::string_view design);

Json plan(std::string_view design, const Json& body);

/// Power at a given labeled count; same body as plan() plus "n".
Json power(std::string_view design, const Json& body);

Json calibrate(const Json& body);

Json sim_result_json(const ppw_sim_result* result);

/// Rounds to six significant digits, the precision of every printed real.
double round6(double x);

/// Pretty JSON with a trailing newline; the exact bytes used for goldens.
std::string render(const Json& j);

/// `key=value` lines for the scalar top-level fields, in document order.
std::string render_text(const Json& j);

}  // namespace ppipower::tools
