#pragma once

// Empirical lower-orthant CDFs by treatment/period group and the
// identity-link difference-in-differences functionals
//   CF  = F10 + F01 - F00
//   DTT = F11 - CF
// where Fdt is the ECDF of group (treated = d, period = t).

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "interpband/error.hpp"
#include "interpband/grid.hpp"
#include "interpband/interp.hpp"

namespace interpband {

enum class TargetKind { kDtt, kCf };

inline std::string to_string(TargetKind t) { return t == TargetKind::kDtt ? "dtt" : "cf"; }

inline TargetKind parse_target(std::string_view s) {
  if (s == "dtt" || s == "DTT") return TargetKind::kDtt;
  if (s == "cf" || s == "CF") return TargetKind::kCf;
  throw ConfigError("unknown target '" + std::string(s) + "' (expected dtt or cf)");
}

/// Observations (y, treated, period) with nonnegative frequency weights.
class DidSample {
 public:
  explicit DidSample(std::size_t dim) : dim_(dim) {
    detail::require<PreconditionError>(dim >= 1 && dim <= kMaxDim, "DidSample: invalid dimension");
  }

  void add(std::span<const double> y, int treated, int period, double weight = 1.0) {
    detail::require<PreconditionError>(y.size() == dim_, "DidSample::add: outcome has wrong dimension");
    detail::require<PreconditionError>((treated == 0 || treated == 1) && (period == 0 || period == 1),
                                       "DidSample::add: treated and period must be 0 or 1");
    detail::require<PreconditionError>(std::isfinite(weight) && weight >= 0.0, "DidSample::add: invalid weight");
    for (double v : y) detail::require<PreconditionError>(std::isfinite(v), "DidSample::add: non-finite outcome");
    y_.insert(y_.end(), y.begin(), y.end());
    treated_.push_back(static_cast<std::uint8_t>(treated));
    period_.push_back(static_cast<std::uint8_t>(period));
    weight_.push_back(weight);
  }

  void add(std::initializer_list<double> y, int treated, int period, double weight = 1.0) {
    add(std::span<const double>(y.begin(), y.size()), treated, period, weight);
  }

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return treated_.size(); }
  std::span<const double> y(std::size_t i) const { return {y_.data() + i * dim_, dim_}; }
  std::span<const double> outcomes() const { return y_; }
  int treated(std::size_t i) const { return treated_[i]; }
  int period(std::size_t i) const { return period_[i]; }
  double weight(std::size_t i) const { return weight_[i]; }
  std::span<const double> weights() const { return weight_; }

  /// Group id 2*treated + period.
  int group(std::size_t i) const { return 2 * treated_[i] + period_[i]; }

  /// Coordinate k of every outcome, in observation order.
  std::vector<double> axis_values(std::size_t k) const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < size(); ++i) out[i] = y_[i * dim_ + k];
    return out;
  }

 private:
  std::size_t dim_;
  std::vector<double> y_;
  std::vector<std::uint8_t> treated_;
  std::vector<std::uint8_t> period_;
  std::vector<double> weight_;
};

/// Points (row-major, dim columns) with optional weights; empty weights
/// means unit weights.
struct WeightedPoints {
  std::size_t dim = 1;
  std::span<const double> coords;
  std::span<const double> weights;

  std::size_t size() const { return dim == 0 ? 0 : coords.size() / dim; }
};

/// Weighted share of points y with y <= x coordinate-wise.
inline double ecdf_orthant(const WeightedPoints& pts, std::span<const double> x) {
  detail::require<EstimationError>(pts.size() > 0, "ecdf_orthant: empty point set");
  detail::require<PreconditionError>(x.size() == pts.dim, "ecdf_orthant: dimension mismatch");
  detail::require<PreconditionError>(pts.weights.empty() || pts.weights.size() == pts.size(),
                                     "ecdf_orthant: weight count mismatch");
  double below = 0.0, total = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double w = pts.weights.empty() ? 1.0 : pts.weights[i];
    total += w;
    bool inside = true;
    for (std::size_t k = 0; k < pts.dim && inside; ++k) inside = pts.coords[i * pts.dim + k] <= x[k];
    if (inside) below += w;
  }
  detail::require<EstimationError>(total > 0.0, "ecdf_orthant: total weight is zero");
  return below / total;
}

inline std::string group_name(int treated, int period) {
  return "(treated=" + std::to_string(treated) + ", period=" + std::to_string(period) + ")";
}

/// ECDF of the observations in group (treated, period).
inline double group_ecdf(const DidSample& sample, int treated, int period, std::span<const double> x) {
  std::vector<double> coords, w;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    if (sample.treated(i) == treated && sample.period(i) == period) {
      const auto y = sample.y(i);
      coords.insert(coords.end(), y.begin(), y.end());
      w.push_back(sample.weight(i));
    }
  }
  if (coords.empty()) throw EstimationError("empty group " + group_name(treated, period));
  double total = 0.0;
  for (double v : w) total += v;
  if (total <= 0.0) throw EstimationError("zero total weight in group " + group_name(treated, period));
  return ecdf_orthant(WeightedPoints{sample.dim(), coords, w}, x);
}

namespace detail {

inline double combine(TargetKind target, double f00, double f01, double f10, double f11) {
  const double cf = f10 + f01 - f00;
  return target == TargetKind::kCf ? cf : f11 - cf;
}

}  // namespace detail

inline double estimate_target(const DidSample& sample, TargetKind target, std::span<const double> x) {
  const double f00 = group_ecdf(sample, 0, 0, x);
  const double f01 = group_ecdf(sample, 0, 1, x);
  const double f10 = group_ecdf(sample, 1, 0, x);
  const double f11 = group_ecdf(sample, 1, 1, x);
  return detail::combine(target, f00, f01, f10, f11);
}

inline double estimate_target(const DidSample& sample, TargetKind target, std::initializer_list<double> x) {
  return estimate_target(sample, target, std::span<const double>(x.begin(), x.size()));
}

/// Evaluates the group ECDFs at every node of a fixed grid for arbitrary
/// per-observation weight multipliers. Each observation is assigned once to
/// the bucket of the first node dominating it; a cumulative sum along every
/// axis then yields the orthant counts, so one evaluation costs
/// O(n + d L^d).
class GridEstimator {
 public:
  static constexpr std::size_t kOutside = static_cast<std::size_t>(-1);

  GridEstimator(const DidSample& sample, TensorGrid grid) : sample_(&sample), grid_(std::move(grid)) {
    detail::require<PreconditionError>(grid_.dim() == sample.dim(), "estimate_on_grid: grid and sample dimensions differ");
    const std::size_t d = grid_.dim();
    const std::size_t L = grid_.nodes_per_axis();
    std::vector<std::vector<double>> axes(d, std::vector<double>(L));
    for (std::size_t k = 0; k < d; ++k) {
      for (std::size_t i = 0; i < L; ++i) axes[k][i] = grid_.coordinate(k, i);
    }
    bucket_.resize(sample.size());
    for (std::size_t i = 0; i < sample.size(); ++i) {
      const auto y = sample.y(i);
      std::size_t lin = 0;
      for (std::size_t k = 0; k < d; ++k) {
        const auto it = std::lower_bound(axes[k].begin(), axes[k].end(), y[k]);
        if (it == axes[k].end()) {
          lin = kOutside;
          break;
        }
        lin = lin * L + static_cast<std::size_t>(it - axes[k].begin());
      }
      bucket_[i] = lin;
    }
  }

  const TensorGrid& grid() const { return grid_; }

  /// Target field with observation weights base_weight * multiplier; an empty
  /// multiplier span means all ones.
  template <class M = double>
  GridField field(TargetKind target, std::span<const M> multipliers = {}) const {
    const std::size_t nodes = grid_.node_count();
    std::array<std::vector<double>, 4> sums;
    std::array<double, 4> totals{};
    for (auto& s : sums) s.assign(nodes, 0.0);
    for (std::size_t i = 0; i < sample_->size(); ++i) {
      double w = sample_->weight(i);
      if (!multipliers.empty()) w *= static_cast<double>(multipliers[i]);
      if (w == 0.0) continue;
      const int g = sample_->group(i);
      totals[g] += w;
      if (bucket_[i] != kOutside) sums[g][bucket_[i]] += w;
    }
    for (int g = 0; g < 4; ++g) {
      if (!(totals[g] > 0.0)) throw EstimationError("empty group " + group_name(g / 2, g % 2));
      cumulate(sums[g]);
    }
    std::vector<double> values(nodes);
    for (std::size_t j = 0; j < nodes; ++j) {
      values[j] = detail::combine(target, sums[0][j] / totals[0], sums[1][j] / totals[1], sums[2][j] / totals[2],
                                  sums[3][j] / totals[3]);
    }
    return GridField(grid_, std::move(values));
  }

 private:
  void cumulate(std::vector<double>& s) const {
    const std::size_t L = grid_.nodes_per_axis();
    for (std::size_t k = 0; k < grid_.dim(); ++k) {
      const std::size_t stride = grid_.stride(k);
      for (std::size_t j = 0; j < s.size(); ++j) {
        if ((j / stride) % L != 0) s[j] += s[j - stride];
      }
    }
  }

  const DidSample* sample_;
  TensorGrid grid_;
  std::vector<std::size_t> bucket_;
};

inline GridField estimate_on_grid(const DidSample& sample, TargetKind target, const TensorGrid& grid) {
  return GridEstimator(sample, grid).field<double>(target);
}

/// Reads the CSV schema: header naming y1..yd, d (treated), t (period) and
/// optionally w, in any column order. Blank, non-numeric or NaN cells are
/// rejected with the offending line number.
inline DidSample read_did_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw DataError("data CSV: missing header row");
  const auto header = detail::split_csv_line(detail::trim(line));
  std::map<std::string, std::size_t> column;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string name(detail::trim(header[c]));
    if (!column.emplace(name, c).second) throw DataError("data CSV: duplicate column '" + name + "'");
  }
  std::size_t dim = 0;
  while (column.count("y" + std::to_string(dim + 1))) ++dim;
  if (dim == 0) throw DataError("data CSV: header must contain y1 (and y2.. for vector outcomes)");
  if (!column.count("d")) throw DataError("data CSV: missing column 'd'");
  if (!column.count("t")) throw DataError("data CSV: missing column 't'");
  const std::optional<std::size_t> wcol = column.count("w") ? std::optional(column.at("w")) : std::nullopt;
  for (const auto& [name, c] : column) {
    const bool known = name == "d" || name == "t" || name == "w" ||
                       (name.size() > 1 && name[0] == 'y' && std::all_of(name.begin() + 1, name.end(), ::isdigit) &&
                        std::stoul(name.substr(1)) >= 1 && std::stoul(name.substr(1)) <= dim);
    if (!known) throw DataError("data CSV: unexpected column '" + name + "'");
  }

  DidSample sample(dim);
  std::vector<double> y(dim);
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_csv_line(line);
    const std::string where = "data CSV line " + std::to_string(lineno);
    if (cells.size() != header.size()) {
      throw DataError(where + ": expected " + std::to_string(header.size()) + " cells, got " + std::to_string(cells.size()));
    }
    auto cell = [&](const std::string& name) {
      const auto text = detail::trim(cells[column.at(name)]);
      if (text.empty()) throw DataError(where + ": missing value in column '" + name + "'");
      return detail::parse_double(text, where + ", column '" + name + "'");
    };
    for (std::size_t k = 0; k < dim; ++k) y[k] = cell("y" + std::to_string(k + 1));
    const double d = cell("d");
    const double t = cell("t");
    if (d != 0.0 && d != 1.0) throw DataError(where + ": column 'd' must be 0 or 1");
    if (t != 0.0 && t != 1.0) throw DataError(where + ": column 't' must be 0 or 1");
    double w = 1.0;
    if (wcol) {
      w = cell("w");
      if (w < 0.0) throw DataError(where + ": column 'w' must be nonnegative");
    }
    sample.add(y, static_cast<int>(d), static_cast<int>(t), w);
  }
  if (sample.size() == 0) throw DataError("data CSV: no observations");
  return sample;
}

inline void write_did_csv(std::ostream& os, const DidSample& sample) {
  const auto w = sample.weights();
  const bool weighted = std::any_of(w.begin(), w.end(), [](double v) { return v != 1.0; });
  for (std::size_t k = 0; k < sample.dim(); ++k) os << 'y' << (k + 1) << ',';
  os << (weighted ? "d,t,w\n" : "d,t\n");
  for (std::size_t i = 0; i < sample.size(); ++i) {
    for (double v : sample.y(i)) os << detail::format_double(v) << ',';
    os << sample.treated(i) << ',' << sample.period(i);
    if (weighted) os << ',' << detail::format_double(w[i]);
    os << '\n';
  }
}

}  // namespace interpband
