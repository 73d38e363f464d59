#include "shapkit/parallel.hpp"

#include <omp.h>

#include <exception>

namespace shapkit {

int worker_count() { return omp_get_max_threads(); }

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(seed) ^ (stream * 0xd1b54a32d192ed03ULL + 1));
}

std::vector<double> evaluate_coalitions(const GameOracle& game,
                                        std::span<const Mask> masks,
                                        Exec exec) {
  const int m = game.num_features();
  const auto n = static_cast<std::int64_t>(masks.size());
  std::vector<double> out(masks.size());
  if (exec == Exec::serial) {
    for (std::int64_t k = 0; k < n; ++k) {
      out[k] = game.value(Coalition(masks[k], m));
    }
    return out;
  }
  // Exceptions may not escape an OpenMP region; the first one is rethrown.
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t k = 0; k < n; ++k) {
    try {
      out[k] = game.value(Coalition(masks[k], m));
    } catch (...) {
#pragma omp critical(shapkit_eval_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace shapkit
