#pragma once

// Monte Carlo harness for the two-period difference-in-differences coverage
// study: data generation, evaluation regions, continuous L2 error,
// replication loop and table emission.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "interpband/bands.hpp"
#include "interpband/bootstrap.hpp"
#include "interpband/error.hpp"
#include "interpband/estimators.hpp"
#include "interpband/grid.hpp"
#include "interpband/interp.hpp"
#include "interpband/numerics.hpp"
#include "interpband/parallel.hpp"
#include "interpband/random.hpp"

namespace interpband {

struct DgpParams {
  double alpha = 0.1;
  double beta = 0.2;
  double gamma = -0.1;
  double delta = 0.0;
  double rho = 0.5;  ///< off-diagonal of the unit-diagonal error covariance (d = 2)
};

struct McDesign {
  std::size_t dim = 1;
  std::size_t n = 500;
  double a = 1.0;
  double b = 0.3;
  std::size_t replications = 200;
  std::size_t draws = 199;
  std::vector<double> alphas = {0.10, 0.05, 0.01};
  std::uint64_t seed = 0;
  DgpParams dgp;
  double tau_lb = 0.05;
  double tau_ub = 0.95;
  /// Probe points per cell per axis for coverage and L2 error (0 = 8 for
  /// d = 1, 4 otherwise).
  std::size_t probe_per_cell = 0;

  std::size_t effective_probe_per_cell() const {
    if (probe_per_cell > 0) return probe_per_cell;
    return dim == 1 ? 8 : 4;
  }

  void validate() const {
    auto fail = [](const std::string& field, const std::string& msg) { throw ConfigError("design." + field + ": " + msg); };
    if (dim != 1 && dim != 2) fail("d", "must be 1 or 2");
    if (n < 4) fail("n", "must be >= 4");
    if (!(a > 0.0)) fail("a", "must be positive");
    if (!std::isfinite(b)) fail("b", "must be finite");
    if (replications < 1) fail("R", "must be >= 1");
    if (draws < 4) fail("B", "must be >= 4");
    if (alphas.empty()) fail("alphas", "must be nonempty");
    for (std::size_t i = 0; i < alphas.size(); ++i) {
      if (!(alphas[i] > 0.0 && alphas[i] < 1.0)) fail("alphas[" + std::to_string(i) + "]", "must lie in (0,1)");
    }
    if (!(tau_lb > 0.0 && tau_lb < tau_ub && tau_ub < 1.0)) fail("tau_lb/tau_ub", "need 0 < tau_lb < tau_ub < 1");
    if (!(dgp.rho > -1.0 && dgp.rho < 1.0)) fail("dgp.rho", "must lie in (-1,1)");
  }
};

/// Per-target aggregates for one design cell.
struct McTargetSummary {
  std::size_t grid_size = 0;       ///< median realised L
  double l2 = 0.0;                 ///< mean continuous L2 error
  std::vector<double> coverage;    ///< one entry per design alpha
};

struct McRow {
  std::size_t n = 0;
  double a = 0.0;
  double b = 0.0;
  std::vector<double> alphas;
  McTargetSummary dtt;
  McTargetSummary cf;
};

/// Per-replication record, kept for audit logs and replication-level checks.
struct McReplication {
  std::array<std::size_t, 2> grid_size{};
  std::array<double, 2> l2{};
  std::array<std::vector<bool>, 2> covered;
  std::vector<bool> dtt_rejects;
};

inline double group_mean(const DgpParams& p, int treated, int period) {
  return p.alpha + p.beta * treated + p.gamma * period + p.delta * treated * period;
}

/// First floor(n/2) observations in period 0, the rest in period 1;
/// treatment ~ Bernoulli(1/2); standard normal (or bivariate normal with
/// correlation rho) errors around the group mean.
inline DidSample simulate_sample(const McDesign& design, Rng& rng) {
  detail::require<PreconditionError>(design.n >= 4, "simulate_sample: n must be >= 4");
  const DgpParams& p = design.dgp;
  DidSample sample(design.dim);
  std::vector<double> y(design.dim);
  const double tail = std::sqrt(1.0 - p.rho * p.rho);
  for (std::size_t i = 0; i < design.n; ++i) {
    const int period = i < design.n / 2 ? 0 : 1;
    const int treated = rng.bernoulli_half() ? 1 : 0;
    const double mu = group_mean(p, treated, period);
    const double e1 = rng.normal();
    y[0] = mu + e1;
    if (design.dim == 2) y[1] = mu + p.rho * e1 + tail * rng.normal();
    sample.add(y, treated, period);
  }
  return sample;
}

/// Population target. DTT is identically zero; CF is the untreated outcome
/// distribution of the treated group in period 1. Requires delta = 0.
inline double truth(TargetKind target, const McDesign& design, std::span<const double> x) {
  if (design.dgp.delta != 0.0) throw PreconditionError("truth: closed-form targets require delta = 0");
  if (target == TargetKind::kDtt) return 0.0;
  const double mu = group_mean(design.dgp, 1, 1);
  if (design.dim == 1) return std_normal_cdf(x[0] - mu);
  return binormal_lower_cdf(x[0] - mu, x[1] - mu, design.dgp.rho);
}

namespace detail {

// Diagonal point q where the orthant CDF of N2((mu,mu), Sigma) equals p.
inline double diagonal_orthant_quantile(double mu, double rho, double p) {
  return bisect([&](double q) { return binormal_lower_cdf(q - mu, q - mu, rho) - p; }, mu - 40.0, mu + 40.0, 1e-12);
}

}  // namespace detail

/// Evaluation region of a target.
///  d = 1, DTT: empirical tau_lb / tau_ub quantiles of the pooled outcomes.
///  d = 1, CF : population CF quantiles.
///  d = 2, DTT: [-c, c]^2 with mixture CDF(c,c) - CDF(-c,-c) = tau_ub - tau_lb
///              under the equal-weight mixture of the four group laws.
///  d = 2, CF : diagonal points where the CF orthant probability is tau_lb
///              and tau_ub.
inline Box select_region(TargetKind target, const McDesign& design, const DidSample& sample) {
  const DgpParams& p = design.dgp;
  const double mu = group_mean(p, 1, 1);
  if (design.dim == 1) {
    if (target == TargetKind::kDtt) {
      const auto y = sample.axis_values(0);
      return Box({empirical_quantile(y, design.tau_lb)}, {empirical_quantile(y, design.tau_ub)});
    }
    return Box({mu + std_normal_quantile(design.tau_lb)}, {mu + std_normal_quantile(design.tau_ub)});
  }
  if (target == TargetKind::kDtt) {
    const double mass = design.tau_ub - design.tau_lb;
    auto mixture = [&](double v) {
      double s = 0.0;
      for (int d = 0; d < 2; ++d) {
        for (int t = 0; t < 2; ++t) {
          const double m = group_mean(p, d, t);
          s += binormal_lower_cdf(v - m, v - m, p.rho);
        }
      }
      return 0.25 * s;
    };
    const double c = bisect([&](double v) { return mixture(v) - mixture(-v) - mass; }, 0.0, 40.0, 1e-12);
    return Box({-c, -c}, {c, c});
  }
  const double lo = detail::diagonal_orthant_quantile(mu, p.rho, design.tau_lb);
  const double hi = detail::diagonal_orthant_quantile(mu, p.rho, design.tau_ub);
  return Box({lo, lo}, {hi, hi});
}

/// (|region|^{-1} integral over region of (F_L - truth)^2)^{1/2} by the
/// trapezoid rule on the probe.
template <class F>
double l2_error(const GridField& field, F&& truth_fn, const Box& region, const ProbeGrid& probe) {
  detail::require<PreconditionError>(region.measure() > 0.0, "l2_error: degenerate region");
  const double integral = trapezoid_integral(
      [&](std::span<const double> x) {
        const double e = eval(field, x) - truth_fn(x);
        return e * e;
      },
      probe);
  return std::sqrt(std::max(0.0, integral) / region.measure());
}

/// One replication: simulate, then for each target build bands at all
/// design levels and record coverage and L2 error.
inline McReplication run_replication(const McDesign& design, std::size_t r) {
  const std::uint64_t rep_seed = derive_seed(design.seed, r);
  Rng rng(derive_seed(rep_seed, 0));
  const DidSample sample = simulate_sample(design, rng);
  McReplication rec;
  for (int m = 0; m < 2; ++m) {
    const TargetKind target = m == 0 ? TargetKind::kDtt : TargetKind::kCf;
    const Box region = select_region(target, design, sample);
    const std::size_t L = grid_rule(design.a, design.b, region.width(0), design.n);
    const TensorGrid grid(region, L);
    BootstrapConfig cfg{design.draws, WeightScheme::kMultinomial, derive_seed(rep_seed, 1 + static_cast<std::uint64_t>(m))};
    const auto bands = build_bands(sample, target, grid, cfg, design.alphas, static_cast<double>(design.n));
    const ProbeGrid probe = aligned_probe(grid, design.effective_probe_per_cell());

    auto target_truth = [&](std::span<const double> x) { return truth(target, design, x); };

    rec.grid_size[m] = L;
    rec.l2[m] = l2_error(bands.front().center, target_truth, region, probe);
    for (const UniformBand& band : bands) {
      const bool ok = covers(band, target_truth, probe);
      rec.covered[m].push_back(ok);
      if (target == TargetKind::kDtt) rec.dtt_rejects.push_back(rejects_zero(band));
    }
  }
  return rec;
}

namespace detail {

inline std::size_t lower_median(std::vector<std::size_t> v) {
  std::sort(v.begin(), v.end());
  return v[(v.size() - 1) / 2];
}

}  // namespace detail

/// Aggregates replications in index order: median L, mean L2, coverage
/// frequency per level.
inline McRow summarize(const McDesign& design, const std::vector<McReplication>& reps) {
  McRow row{design.n, design.a, design.b, design.alphas, {}, {}};
  for (int m = 0; m < 2; ++m) {
    McTargetSummary& s = m == 0 ? row.dtt : row.cf;
    std::vector<std::size_t> sizes;
    double l2 = 0.0;
    s.coverage.assign(design.alphas.size(), 0.0);
    for (const auto& rec : reps) {
      sizes.push_back(rec.grid_size[m]);
      l2 += rec.l2[m];
      for (std::size_t a = 0; a < design.alphas.size(); ++a) s.coverage[a] += rec.covered[m][a] ? 1.0 : 0.0;
    }
    const auto R = static_cast<double>(reps.size());
    s.grid_size = detail::lower_median(sizes);
    s.l2 = l2 / R;
    for (double& c : s.coverage) c /= R;
  }
  return row;
}

/// Replications run in parallel; each is keyed by derive_seed(seed, r), so
/// the result does not depend on `threads`.
inline McRow run_design(const McDesign& design, std::size_t threads = 1,
                        std::vector<McReplication>* audit = nullptr) {
  design.validate();
  std::vector<McReplication> reps(design.replications);
  parallel_for(design.replications, threads, [&](std::size_t r) {
    try {
      reps[r] = run_replication(design, r);
    } catch (const Error&) {
      detail::rethrow_with_context("replication " + std::to_string(r) + ": ");
    }
  });
  McRow row = summarize(design, reps);
  if (audit) *audit = std::move(reps);
  return row;
}

enum class TableFormat { kCsv, kMarkdown };

namespace detail {

inline std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

inline std::string level_label(double alpha) {
  const double pct = 100.0 * (1.0 - alpha);
  const double rounded = std::round(pct);
  if (std::abs(pct - rounded) < 1e-9) return std::to_string(static_cast<long>(rounded));
  return format_double(pct);
}

}  // namespace detail

/// Columns n, a, b, then per target (DTT, CF): L, L2, coverage per level.
/// Errors and coverages use three decimals.
inline std::string emit_table(const std::vector<McRow>& rows, TableFormat format) {
  detail::require<PreconditionError>(!rows.empty(), "emit_table: no rows");
  const auto& alphas = rows.front().alphas;
  for (const auto& r : rows) {
    detail::require<PreconditionError>(r.alphas == alphas, "emit_table: rows use different alpha levels");
  }
  std::vector<std::string> header = {"n", "a", "b"};
  for (const char* name : {"DTT", "CF"}) {
    header.push_back(std::string("L_") + name);
    header.push_back(std::string("L2_") + name);
    for (double a : alphas) header.push_back("cov" + detail::level_label(a));
  }
  std::vector<std::vector<std::string>> body;
  for (const auto& r : rows) {
    std::vector<std::string> cells = {std::to_string(r.n), detail::fixed(r.a, 2), detail::fixed(r.b, 2)};
    for (const McTargetSummary* s : {&r.dtt, &r.cf}) {
      cells.push_back(std::to_string(s->grid_size));
      cells.push_back(detail::fixed(s->l2, 3));
      for (double c : s->coverage) cells.push_back(detail::fixed(c, 3));
    }
    body.push_back(std::move(cells));
  }
  std::ostringstream os;
  auto line = [&](const std::vector<std::string>& cells) {
    if (format == TableFormat::kCsv) {
      for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    } else {
      os << '|';
      for (const auto& c : cells) os << ' ' << c << " |";
    }
    os << '\n';
  };
  line(header);
  if (format == TableFormat::kMarkdown) {
    os << '|';
    for (std::size_t i = 0; i < header.size(); ++i) os << "---|";
    os << '\n';
  }
  for (const auto& cells : body) line(cells);
  return os.str();
}

/// Parses the CSV produced by emit_table. Alpha levels are recovered from
/// the coverage column labels.
inline std::vector<McRow> parse_table(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw DataError("table CSV: empty input");
  const auto header = detail::split_csv_line(detail::trim(line));
  if (header.size() < 7 || (header.size() - 3) % 2 != 0 || header[0] != "n" || header[3] != "L_DTT") {
    throw DataError("table CSV: unexpected header");
  }
  const std::size_t per_target = (header.size() - 3) / 2;
  const std::size_t levels = per_target - 2;
  std::vector<double> alphas;
  for (std::size_t i = 0; i < levels; ++i) {
    const auto label = std::string(header[5 + i]);
    if (label.rfind("cov", 0) != 0) throw DataError("table CSV: bad coverage column '" + label + "'");
    alphas.push_back((100.0 - detail::parse_double(label.substr(3), "table header")) / 100.0);
  }
  std::vector<McRow> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_csv_line(detail::trim(line));
    const std::string where = "table CSV line " + std::to_string(lineno);
    if (cells.size() != header.size()) throw DataError(where + ": wrong column count");
    McRow row;
    row.n = static_cast<std::size_t>(detail::parse_double(cells[0], where));
    row.a = detail::parse_double(cells[1], where);
    row.b = detail::parse_double(cells[2], where);
    row.alphas = alphas;
    for (int m = 0; m < 2; ++m) {
      McTargetSummary& s = m == 0 ? row.dtt : row.cf;
      const std::size_t base = 3 + static_cast<std::size_t>(m) * per_target;
      s.grid_size = static_cast<std::size_t>(detail::parse_double(cells[base], where));
      s.l2 = detail::parse_double(cells[base + 1], where);
      for (std::size_t i = 0; i < levels; ++i) s.coverage.push_back(detail::parse_double(cells[base + 2 + i], where));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace interpband
