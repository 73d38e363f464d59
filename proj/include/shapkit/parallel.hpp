#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "shapkit/coalition.hpp"
#include "shapkit/game.hpp"

namespace shapkit {

// Every data-parallel kernel has a serial reference path with identical
// results; tests and the benchmark target compare the two.
enum class Exec { serial, parallel };

// Number of OpenMP threads the parallel path will use.
int worker_count();

// Independent 64-bit seed for logical stream `stream` of a run seeded with
// `seed` (splitmix64 finalizer over both words).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// Evaluates the game on each mask, writing results in input order.
std::vector<double> evaluate_coalitions(const GameOracle& game,
                                        std::span<const Mask> masks,
                                        Exec exec = Exec::parallel);

}  // namespace shapkit
