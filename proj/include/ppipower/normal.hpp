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

// Standard normal distribution. Both functions throw ppipower::Error
// (ErrorCode::domain) on inputs outside their domain.

namespace ppipower {

// Phi(z), including the limits at +-infinity. Absolute error below 1e-15.
double normal_cdf(double z);

// Phi^{-1}(q) for q in (0, 1).
double normal_quantile(double q);

}  // namespace ppipower
