// Copyright 2026 The shor-mps Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Factors N = 21 with a = 2: one modexp stage, then a few samples.

#include <cstdio>

#include "shor_mps/shor.hpp"

int main() {
    using namespace shor_mps;
    const auto inst = make_instance(21, 2);
    PipelineConfig cfg;
    cfg.layout = Layout::dynamic_order;
    ShorSimulation sim(inst, cfg);
    sim.build_initial();
    sim.run_modexp();
    std::printf("alpha_hat = %u, lower register dim = %zu\n", sim.alpha_hat(), sim.lower_index().size());
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        Rng rng(seed);
        const auto rec = sample_from(sim, rng);
        std::printf("seed %llu: residue %llu, s = %4llu", static_cast<unsigned long long>(seed),
                    static_cast<unsigned long long>(rec.residue), static_cast<unsigned long long>(rec.s));
        if (rec.factors) {
            std::printf(" -> %llu x %llu", static_cast<unsigned long long>(rec.factors->first),
                        static_cast<unsigned long long>(rec.factors->second));
        }
        std::printf("\n");
    }
}
