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


#include <cmath>
#include <set>
#include <tuple>

#include <doctest.h>

#include "ppipower/sim/rng.hpp"

using namespace ppipower::sim;

TEST_CASE("substream keys are deterministic and distinct") {
    std::set<std::uint64_t> keys;
    for (std::uint64_t seed : {0u, 1u, 2u})
        for (std::uint64_t cell = 0; cell < 20; ++cell)
            for (std::uint64_t rep = 0; rep < 50; ++rep)
                for (std::uint64_t stream = 0; stream < 5; ++stream) {
                    const auto k = substream_key(seed, cell, rep, stream);
                    CHECK(k == substream_key(seed, cell, rep, stream));
                    keys.insert(k);
                }
    CHECK(keys.size() == 3u * 20u * 50u * 5u);
}

TEST_CASE("swapping tuple coordinates changes the key") {
    CHECK(substream_key(1, 2, 3, 0) != substream_key(1, 3, 2, 0));
    CHECK(substream_key(1, 0, 0, 1) != substream_key(1, 1, 0, 0));
    CHECK(substream_key(0, 1, 0, 0) != substream_key(1, 0, 0, 0));
}

TEST_CASE("identical substreams replay identical draws") {
    Rng a = Rng::substream(7, 3, 11, 2), b = Rng::substream(7, 3, 11, 2);
    for (int i = 0; i < 1000; ++i) {
        CHECK(a.normal() == b.normal());
        CHECK(a.uniform() == b.uniform());
    }
}

TEST_CASE("neighbouring substreams are uncorrelated") {
    const int M = 20000;
    Rng a = Rng::substream(1, 0, 0), b = Rng::substream(1, 0, 1);
    double sab = 0, saa = 0, sbb = 0;
    for (int i = 0; i < M; ++i) {
        const double x = a.normal(), y = b.normal();
        sab += x * y;
        saa += x * x;
        sbb += y * y;
    }
    CHECK(std::abs(sab / std::sqrt(saa * sbb)) < 4.0 / std::sqrt(M));
}

TEST_CASE("uniform and bernoulli draws") {
    Rng r(42);
    const int M = 100000;
    int hits = 0;
    for (int i = 0; i < M; ++i) {
        const double u = r.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        hits += r.bernoulli(0.3) ? 1 : 0;
    }
    CHECK(std::abs(hits / double(M) - 0.3) < 4.0 * std::sqrt(0.21 / M));
}
