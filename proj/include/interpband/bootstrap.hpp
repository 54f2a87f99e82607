#pragma once

// Weighted bootstrap of a grid-estimated functional: multinomial frequency
// weights, robust IQR scale per node, sup-t statistics over the grid and the
// bootstrap critical value.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "interpband/error.hpp"
#include "interpband/estimators.hpp"
#include "interpband/interp.hpp"
#include "interpband/numerics.hpp"
#include "interpband/parallel.hpp"
#include "interpband/random.hpp"

namespace interpband {

enum class WeightScheme {
  kMultinomial,
  /// Every weight is one: each draw reproduces the centre. Test hook only.
  kIdentity,
};

struct BootstrapConfig {
  std::size_t draws = 499;
  WeightScheme scheme = WeightScheme::kMultinomial;
  std::uint64_t seed = 0;
};

/// Centre estimate and B bootstrap re-estimates on a common grid.
struct BootstrapDraws {
  GridField center;
  std::vector<GridField> draws;
  double r_n = 1.0;

  const TensorGrid& grid() const { return center.grid(); }
  std::size_t size() const { return draws.size(); }
};

/// Multinomial(n, 1/n) counts from n independent categorical draws.
inline std::vector<std::uint32_t> multinomial_weights(std::size_t n, Rng& rng) {
  detail::require<PreconditionError>(n >= 1, "multinomial_weights: n must be >= 1");
  std::vector<std::uint32_t> counts(n, 0);
  for (std::size_t i = 0; i < n; ++i) ++counts[rng.below(n)];
  return counts;
}

/// Draw b reweights the sample with multinomial weights from stream
/// derive_seed(seed, b); output is independent of the thread count.
inline BootstrapDraws bootstrap_fields(const DidSample& sample, TargetKind target, const TensorGrid& grid,
                                       const BootstrapConfig& config, double r_n, std::size_t threads = 1) {
  detail::require<PreconditionError>(config.draws >= 1, "bootstrap: need at least one draw");
  detail::require<PreconditionError>(r_n > 0.0, "bootstrap: r_n must be positive");
  const GridEstimator estimator(sample, grid);
  GridField center = estimator.field<double>(target);
  std::vector<std::vector<double>> values(config.draws);
  parallel_for(config.draws, threads, [&](std::size_t b) {
    if (config.scheme == WeightScheme::kIdentity) {
      values[b].assign(center.values().begin(), center.values().end());
      return;
    }
    Rng rng(derive_seed(config.seed, b));
    const auto w = multinomial_weights(sample.size(), rng);
    const GridField f = estimator.field(target, std::span<const std::uint32_t>(w));
    values[b].assign(f.values().begin(), f.values().end());
  });
  std::vector<GridField> draws;
  draws.reserve(config.draws);
  for (auto& v : values) draws.emplace_back(grid, std::move(v));
  return BootstrapDraws{std::move(center), std::move(draws), r_n};
}

struct ScaleEstimate {
  GridField sigma;
  double floor = 0.0;              ///< sigma_min applied to degenerate nodes
  std::size_t floored_nodes = 0;   ///< how many nodes hit the floor
};

/// Per node: IQR of sqrt(r_n)(F* - F) over the draws divided by the normal
/// IQR, floored at 1e-6 (1 + max |centre|).
inline ScaleEstimate sigma_hat(const BootstrapDraws& draws) {
  const std::size_t B = draws.size();
  detail::require<PreconditionError>(B >= 4, "sigma_hat: need at least 4 bootstrap draws");
  const auto center = draws.center.values();
  const double root = std::sqrt(draws.r_n);
  double max_abs = 0.0;
  for (double c : center) max_abs = std::max(max_abs, std::abs(c));
  const double floor = 1e-6 * (1.0 + max_abs);
  const double iqr_normal = normal_iqr();

  ScaleEstimate out{draws.center, floor, 0};
  std::vector<double> sigma(center.size());
  std::vector<double> dev(B);
  for (std::size_t j = 0; j < center.size(); ++j) {
    for (std::size_t b = 0; b < B; ++b) dev[b] = root * (draws.draws[b][j] - center[j]);
    const double iqr = empirical_quantile(dev, 0.75) - empirical_quantile(dev, 0.25);
    sigma[j] = iqr / iqr_normal;
    if (!(sigma[j] >= floor)) {
      sigma[j] = floor;
      ++out.floored_nodes;
    }
  }
  out.sigma = GridField(draws.grid(), std::move(sigma));
  return out;
}

/// T_b = max over nodes of |sqrt(r_n)(F*_b - F)| / sigma.
inline std::vector<double> sup_t_stats(const BootstrapDraws& draws, const GridField& sigma) {
  detail::require<PreconditionError>(sigma.size() == draws.center.size(), "sup_t_stats: sigma has wrong size");
  for (std::size_t j = 0; j < sigma.size(); ++j) {
    if (!(sigma[j] > 0.0)) throw DomainError("sup_t_stats: nonpositive sigma at node " + std::to_string(j));
  }
  const auto center = draws.center.values();
  const double root = std::sqrt(draws.r_n);
  std::vector<double> stats(draws.size());
  for (std::size_t b = 0; b < draws.size(); ++b) {
    const auto v = draws.draws[b].values();
    double t = 0.0;
    for (std::size_t j = 0; j < center.size(); ++j) t = std::max(t, std::abs(root * (v[j] - center[j])) / sigma[j]);
    stats[b] = t;
  }
  return stats;
}

/// k-th order statistic of the statistics, k = min(ceil((1-alpha)(B+1)), B).
inline double critical_value(std::span<const double> stats, double alpha) {
  detail::require<DomainError>(alpha > 0.0 && alpha < 1.0, "critical_value: alpha must lie in (0,1)");
  detail::require<PreconditionError>(!stats.empty(), "critical_value: no statistics");
  const std::size_t B = stats.size();
  const std::size_t k =
      std::clamp<std::size_t>(detail::ceil_rank((1.0 - alpha) * static_cast<double>(B + 1)), 1, B);
  std::vector<double> copy(stats.begin(), stats.end());
  std::nth_element(copy.begin(), copy.begin() + static_cast<std::ptrdiff_t>(k - 1), copy.end());
  return copy[k - 1];
}

/// B rows, one column per node (lexicographic order).
inline void write_draws_csv(std::ostream& os, const BootstrapDraws& draws) {
  const std::size_t nodes = draws.center.size();
  os << "draw";
  for (std::size_t j = 0; j < nodes; ++j) os << ",node" << j;
  os << '\n';
  for (std::size_t b = 0; b < draws.size(); ++b) {
    os << b;
    for (double v : draws.draws[b].values()) os << ',' << detail::format_double(v);
    os << '\n';
  }
}

}  // namespace interpband
