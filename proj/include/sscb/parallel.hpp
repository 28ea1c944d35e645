#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "sscb/metrics.hpp"
#include "sscb/rng.hpp"

// Data-parallel kernels. Each has a serial path kept as the reference; the
// OpenMP path must return bit-identical results.
namespace sscb::par {

enum class Exec { kSerial, kOpenMP };

// f(lo + i * step) for i = 0 .. floor((hi - lo) / step). f must be safe to call
// concurrently.
std::vector<double> evaluate_grid(const std::function<double(double)>& f, double lo, double hi,
                                  double step, Exec exec);

struct GridMinimum {
  std::size_t index;
  double x;
  double value;
};

// Interior points with v[i-1] > v[i] <= v[i+1].
std::vector<GridMinimum> grid_local_minima(std::span<const double> values, double lo, double step);

// Running per-coordinate mean and sum of squared deviations.
struct Moments {
  std::uint64_t count = 0;
  std::vector<double> mean;
  std::vector<double> m2;

  explicit Moments(std::size_t dim = 0) : mean(dim, 0.0), m2(dim, 0.0) {}
  void add(std::span<const double> sample);
  void merge(const Moments& other);
  // Unbiased per-coordinate variance; zero below two samples.
  std::vector<double> variance() const;
  double total_variance() const;
};

// Fills `out` with one draw and returns true, or returns false to reject the
// draw (conditional estimators).
using SampleFn = std::function<bool(Rng& rng, std::span<double> out)>;

// Monte Carlo moments over `draws` attempts. Attempts are split into chunks of
// `chunk`; chunk j uses Rng(seed, j) and chunks are merged in order, so the
// result does not depend on the thread count.
Moments monte_carlo_moments(std::size_t dim, std::uint64_t draws, std::uint64_t seed,
                            const SampleFn& sample, Exec exec, std::uint64_t chunk = 4096);

// Rounds whose action differs from greedy[context_id].
std::uint64_t count_mismatches(std::span<const RoundRecord> log,
                               std::span<const std::uint32_t> greedy, Exec exec);

}  // namespace sscb::par
