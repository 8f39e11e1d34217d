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


// Shared helpers for the unit tests.

#pragma once

#include <optional>

#include "ppipower/error.hpp"

namespace ppipower::testing {

// Code of the ppipower::Error thrown by fn, or nullopt if none was thrown.
template <class Fn>
std::optional<ErrorCode> error_code(Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return std::nullopt;
}

}  // namespace ppipower::testing
