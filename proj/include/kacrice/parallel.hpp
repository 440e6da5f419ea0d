#pragma once

// Deterministic per-task random streams and a minimal parallel loop.

#include <cstdint>
#include <functional>
#include <random>

namespace kacrice {

std::uint64_t splitmix64(std::uint64_t x);

// Engine for task `index` under master `seed`; independent of worker count.
std::mt19937_64 task_engine(std::uint64_t seed, std::uint64_t index);

// Number of workers to use when `requested` is 0.
int default_workers();

// Runs body(i) for i in [0, count) on `workers` threads. Each index runs exactly
// once; the first exception thrown by any task is rethrown on the caller.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& body);

}  // namespace kacrice
