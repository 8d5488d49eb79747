#pragma once

#include <cstdint>
#include <string>

#include "dmc/explicit_format.hpp"

namespace dmc {

// Benchmark model generators. Every generated model carries an "init" label
// on its initial state so that writing and re-parsing round-trips exactly.
struct BenchmarkSpec {
    std::string name;            // betting | deepsea | obstacle | energy | mudnails
    std::uint32_t n = 10;        // grid edge for obstacle/energy
    std::uint64_t seed = 1;      // obstacle placement

    // Model constants the sources leave open, exposed as flags.
    std::uint32_t betting_stages = 10;      // decision epochs incl. the terminal one
    std::int64_t obstacle_delay = 10;       // extra time steps per obstacle cell
    double obstacle_density = 0.15;
    std::uint32_t initial_energy = 20;
    std::int64_t depletion_delay = 10;
};

struct GeneratedBenchmark {
    MdpModel model;
    std::string reward_name;
    std::string formula;         // co-safe formula over the model's labels
    std::string query;           // suggested optimisation query
    double suggested_vmax;
};

// Throws UnsupportedError for unknown benchmark names.
GeneratedBenchmark generate(const BenchmarkSpec& spec);

} // namespace dmc
