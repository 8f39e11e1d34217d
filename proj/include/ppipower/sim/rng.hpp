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
#include <random>

namespace ppipower::sim {

// Replicate-level random streams.
//
// Every (seed, cell, replicate, stream) tuple is mapped through a SplitMix64
// mixing chain to an independent 64-bit key that seeds a Mersenne Twister.
// Cells and replicates can therefore be evaluated in any order, on any
// thread, and reproduce the same draws.
std::uint64_t substream_key(std::uint64_t seed, std::uint64_t cell, std::uint64_t replicate,
                            std::uint64_t stream = 0);

class Rng {
public:
    explicit Rng(std::uint64_t key) : engine_(key) {}

    static Rng substream(std::uint64_t seed, std::uint64_t cell, std::uint64_t replicate,
                         std::uint64_t stream = 0) {
        return Rng(substream_key(seed, cell, replicate, stream));
    }

    double normal() { return normal_(engine_); }
    double uniform() { return uniform_(engine_); }
    bool bernoulli(double p) { return uniform_(engine_) < p; }
    double student_t5() { return student_(engine_); }
    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
    std::student_t_distribution<double> student_{5.0};
};

}  // namespace ppipower::sim
