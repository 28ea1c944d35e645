#include "sscb/parallel.hpp"

#include <cmath>

#include <omp.h>

#include "sscb/error.hpp"

namespace sscb::par {

std::vector<double> evaluate_grid(const std::function<double(double)>& f, double lo, double hi,
                                  double step, Exec exec) {
  if (!(step > 0.0) || !(hi >= lo)) throw ValidationError("grid needs step > 0 and hi >= lo");
  const auto n = static_cast<std::int64_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> values(static_cast<std::size_t>(n));
  if (exec == Exec::kSerial) {
    for (std::int64_t i = 0; i < n; ++i) values[i] = f(lo + static_cast<double>(i) * step);
  } else {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) values[i] = f(lo + static_cast<double>(i) * step);
  }
  return values;
}

std::vector<GridMinimum> grid_local_minima(std::span<const double> values, double lo,
                                           double step) {
  std::vector<GridMinimum> out;
  for (std::size_t i = 1; i + 1 < values.size(); ++i)
    if (values[i] < values[i - 1] && values[i] <= values[i + 1])
      out.push_back({i, lo + static_cast<double>(i) * step, values[i]});
  return out;
}

void Moments::add(std::span<const double> sample) {
  if (sample.size() != mean.size()) throw ShapeError("moment sample has wrong length");
  ++count;
  const double n = static_cast<double>(count);
  for (std::size_t i = 0; i < mean.size(); ++i) {
    const double delta = sample[i] - mean[i];
    mean[i] += delta / n;
    m2[i] += delta * (sample[i] - mean[i]);
  }
}

// Chan et al. pairwise combination.
void Moments::merge(const Moments& other) {
  if (other.mean.size() != mean.size()) throw ShapeError("moment merge of different lengths");
  if (other.count == 0) return;
  if (count == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(count);
  const double nb = static_cast<double>(other.count);
  const double n = na + nb;
  for (std::size_t i = 0; i < mean.size(); ++i) {
    const double delta = other.mean[i] - mean[i];
    mean[i] += delta * nb / n;
    m2[i] += other.m2[i] + delta * delta * na * nb / n;
  }
  count += other.count;
}

std::vector<double> Moments::variance() const {
  std::vector<double> v(mean.size(), 0.0);
  if (count < 2) return v;
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = m2[i] / static_cast<double>(count - 1);
  return v;
}

double Moments::total_variance() const {
  double total = 0.0;
  for (double v : variance()) total += v;
  return total;
}

Moments monte_carlo_moments(std::size_t dim, std::uint64_t draws, std::uint64_t seed,
                            const SampleFn& sample, Exec exec, std::uint64_t chunk) {
  if (chunk == 0) throw ValidationError("chunk size must be positive");
  const auto chunks = static_cast<std::int64_t>((draws + chunk - 1) / chunk);
  std::vector<Moments> partial(static_cast<std::size_t>(chunks), Moments(dim));

  auto run_chunk = [&](std::int64_t j) {
    Rng rng(seed, static_cast<std::uint64_t>(j));
    std::vector<double> buf(dim);
    const std::uint64_t begin = static_cast<std::uint64_t>(j) * chunk;
    const std::uint64_t end = std::min(draws, begin + chunk);
    for (std::uint64_t t = begin; t < end; ++t)
      if (sample(rng, buf)) partial[j].add(buf);
  };
  if (exec == Exec::kSerial) {
    for (std::int64_t j = 0; j < chunks; ++j) run_chunk(j);
  } else {
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t j = 0; j < chunks; ++j) run_chunk(j);
  }

  Moments total(dim);
  for (const auto& m : partial) total.merge(m);
  return total;
}

std::uint64_t count_mismatches(std::span<const RoundRecord> log,
                               std::span<const std::uint32_t> greedy, Exec exec) {
  for (const auto& r : log)
    if (r.context_id >= greedy.size())
      throw IndexError("unknown context id " + std::to_string(r.context_id));
  const auto n = static_cast<std::int64_t>(log.size());
  std::uint64_t count = 0;
  if (exec == Exec::kSerial) {
    for (std::int64_t i = 0; i < n; ++i) count += log[i].action != greedy[log[i].context_id];
  } else {
#pragma omp parallel for reduction(+ : count) schedule(static)
    for (std::int64_t i = 0; i < n; ++i) count += log[i].action != greedy[log[i].context_id];
  }
  return count;
}

}  // namespace sscb::par
