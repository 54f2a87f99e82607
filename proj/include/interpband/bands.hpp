#pragma once

// Sup-t uniform confidence bands for an interpolated functional:
//   1. estimate on the grid
//   2. bootstrap draws and robust node scale
//   3. sup-t critical value over the grid
//   4. node intervals  centre -/+ sigma t / sqrt(r_n)
//   5. multilinear interpolation of centre and endpoints.

#include <cmath>
#include <cstddef>
#include <ostream>
#include <span>
#include <vector>

#include "interpband/bootstrap.hpp"
#include "interpband/error.hpp"
#include "interpband/estimators.hpp"
#include "interpband/interp.hpp"

namespace interpband {

struct UniformBand {
  GridField center;
  GridField lower;
  GridField upper;
  GridField sigma;
  double t = 0.0;      ///< sup-t critical value
  double alpha = 0.05;
  double r_n = 1.0;

  const TensorGrid& grid() const { return center.grid(); }
  double half_width_scale() const { return t / std::sqrt(r_n); }
};

struct BandTriple {
  double lower;
  double center;
  double upper;
};

/// Steps 4-5 given a finished bootstrap: one band per level, sharing draws.
inline UniformBand band_from_draws(const BootstrapDraws& draws, const ScaleEstimate& scale,
                                   std::span<const double> stats, double alpha) {
  const double t = critical_value(stats, alpha);
  const double h = t / std::sqrt(draws.r_n);
  const auto c = draws.center.values();
  std::vector<double> lo(c.size()), up(c.size());
  for (std::size_t j = 0; j < c.size(); ++j) {
    const double half = scale.sigma[j] * h;
    lo[j] = c[j] - half;
    up[j] = c[j] + half;
  }
  return UniformBand{draws.center, GridField(draws.grid(), std::move(lo)), GridField(draws.grid(), std::move(up)),
                     scale.sigma, t, alpha, draws.r_n};
}

/// Bands at several levels from a single bootstrap run.
inline std::vector<UniformBand> build_bands(const DidSample& sample, TargetKind target, const TensorGrid& grid,
                                            const BootstrapConfig& config, std::span<const double> alphas,
                                            double r_n, std::size_t threads = 1) {
  for (double a : alphas) detail::require<DomainError>(a > 0.0 && a < 1.0, "build_band: alpha must lie in (0,1)");
  const BootstrapDraws draws = bootstrap_fields(sample, target, grid, config, r_n, threads);
  const ScaleEstimate scale = sigma_hat(draws);
  const std::vector<double> stats = sup_t_stats(draws, scale.sigma);
  std::vector<UniformBand> out;
  out.reserve(alphas.size());
  for (double a : alphas) out.push_back(band_from_draws(draws, scale, stats, a));
  return out;
}

/// r_n <= 0 selects the default r_n = n.
inline UniformBand build_band(const DidSample& sample, TargetKind target, const TensorGrid& grid,
                              const BootstrapConfig& config, double alpha, double r_n = 0.0, std::size_t threads = 1) {
  if (r_n <= 0.0) r_n = static_cast<double>(sample.size());
  const double alphas[] = {alpha};
  return std::move(build_bands(sample, target, grid, config, alphas, r_n, threads).front());
}

inline BandTriple band_at(const UniformBand& band, std::span<const double> x) {
  detail::check_in_domain(band.grid(), x);
  return {detail::eval_unchecked(band.lower, x), detail::eval_unchecked(band.center, x),
          detail::eval_unchecked(band.upper, x)};
}

inline BandTriple band_at(const UniformBand& band, std::initializer_list<double> x) {
  return band_at(band, std::span<const double>(x.begin(), x.size()));
}

/// True iff lower(x) <= truth(x) <= upper(x) at every probe point.
template <class F>
bool covers(const UniformBand& band, F&& truth, const ProbeGrid& probe) {
  bool ok = true;
  probe.for_each([&](std::span<const double> x, std::span<const std::size_t>) {
    if (!ok) return;
    const double v = truth(x);
    if (v < eval(band.lower, x) || v > eval(band.upper, x)) ok = false;
  });
  return ok;
}

/// Probe lattice aligned with the band grid: `per_cell` steps per cell per
/// axis, so every node is a probe point. per_cell = 1 probes the nodes only.
inline ProbeGrid aligned_probe(const TensorGrid& grid, std::size_t per_cell) {
  detail::require<PreconditionError>(per_cell >= 1, "aligned_probe: per_cell must be >= 1");
  return ProbeGrid(grid.region(), (grid.nodes_per_axis() - 1) * per_cell + 1);
}

/// Whether the band excludes zero somewhere. Interpolated endpoints attain
/// their cell extrema at vertices, so checking nodes is exact.
inline bool rejects_zero(const UniformBand& band) {
  for (std::size_t j = 0; j < band.center.size(); ++j) {
    if (band.lower[j] > 0.0 || band.upper[j] < 0.0) return true;
  }
  return false;
}

/// Band CSV: x1..xd,lower,center,upper on the given output lattice.
inline void write_band_csv(std::ostream& os, const UniformBand& band, const ProbeGrid& out) {
  for (std::size_t k = 0; k < band.grid().dim(); ++k) os << 'x' << (k + 1) << ',';
  os << "lower,center,upper\n";
  out.for_each([&](std::span<const double> x, std::span<const std::size_t>) {
    const BandTriple v = band_at(band, x);
    for (double c : x) os << detail::format_double(c) << ',';
    os << detail::format_double(v.lower) << ',' << detail::format_double(v.center) << ','
       << detail::format_double(v.upper) << '\n';
  });
}

}  // namespace interpband
