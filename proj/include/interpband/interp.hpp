#pragma once

// Multilinear interpolation of node values on a TensorGrid, interpolation
// error measurement, error bounds and monotone inversion.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "interpband/error.hpp"
#include "interpband/grid.hpp"
#include "interpband/numerics.hpp"

namespace interpband {

/// Values at every node of a grid, lexicographic order with the last axis
/// fastest. All values are finite.
class GridField {
 public:
  GridField(TensorGrid grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.node_count()) {
      throw PreconditionError("GridField: expected " + std::to_string(grid_.node_count()) + " values, got " +
                              std::to_string(values_.size()));
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!std::isfinite(values_[i])) throw PreconditionError("GridField: non-finite value at node " + std::to_string(i));
    }
  }

  /// Samples f at every node.
  template <class F>
  static GridField sample(const TensorGrid& grid, F&& f) {
    std::vector<double> values(grid.node_count());
    for (std::size_t i = 0; i < values.size(); ++i) {
      const auto x = grid.node(i);
      values[i] = f(std::span<const double>(x));
    }
    return GridField(grid, std::move(values));
  }

  const TensorGrid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }

 private:
  TensorGrid grid_;
  std::vector<double> values_;
};

/// The 2^d vertices of a cell and their interpolation weights. Vertex j
/// has corner bits iota with axis d-1 least significant.
struct VertexWeights {
  std::vector<std::vector<std::size_t>> vertices;
  std::vector<double> weights;
};

/// w(iota) = prod_k (1 - offset_k)^{1 - iota_k} offset_k^{iota_k}.
inline VertexWeights weights(const CellLocation& cell) {
  const std::size_t d = cell.cell.size();
  detail::require<PreconditionError>(d == cell.offset.size() && d >= 1 && d <= kMaxDim, "weights: malformed cell");
  const std::size_t count = std::size_t{1} << d;
  VertexWeights out;
  out.vertices.reserve(count);
  out.weights.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    std::vector<std::size_t> vertex(d);
    double w = 1.0;
    for (std::size_t k = 0; k < d; ++k) {
      const bool upper = (j >> (d - 1 - k)) & 1U;
      vertex[k] = cell.cell[k] + (upper ? 1 : 0);
      w *= upper ? cell.offset[k] : 1.0 - cell.offset[k];
    }
    out.vertices.push_back(std::move(vertex));
    out.weights.push_back(w);
  }
  return out;
}

namespace detail {

// Interpolates at x without heap allocation. x must already be validated.
inline double eval_unchecked(const GridField& field, std::span<const double> x) {
  const TensorGrid& grid = field.grid();
  const std::size_t d = grid.dim();
  std::array<std::size_t, kMaxDim> cell{};
  std::array<double, kMaxDim> offset{};
  std::array<std::size_t, kMaxDim> stride{};
  for (std::size_t k = 0; k < d; ++k) {
    locate_axis(grid, k, x[k], cell[k], offset[k]);
    stride[k] = grid.stride(k);
  }
  std::size_t base = 0;
  for (std::size_t k = 0; k < d; ++k) base += cell[k] * stride[k];

  const auto values = field.values();
  const std::size_t count = std::size_t{1} << d;
  double sum = 0.0;
  for (std::size_t j = 0; j < count; ++j) {
    double w = 1.0;
    std::size_t idx = base;
    for (std::size_t k = 0; k < d; ++k) {
      if ((j >> (d - 1 - k)) & 1U) {
        w *= offset[k];
        idx += stride[k];
      } else {
        w *= 1.0 - offset[k];
      }
    }
    if (w != 0.0) sum += w * values[idx];
  }
  return sum;
}

}  // namespace detail

/// Multilinear interpolant F_L(x). Reproduces node values exactly at nodes.
inline double eval(const GridField& field, std::span<const double> x) {
  detail::check_in_domain(field.grid(), x);
  return detail::eval_unchecked(field, x);
}

inline double eval(const GridField& field, std::initializer_list<double> x) {
  return eval(field, std::span<const double>(x.begin(), x.size()));
}

/// Elementwise eval; an out-of-domain point raises DomainError naming its
/// position in the batch.
inline std::vector<double> eval_batch(const GridField& field, std::span<const std::vector<double>> xs) {
  std::vector<double> out;
  out.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    try {
      detail::check_in_domain(field.grid(), xs[i]);
    } catch (const Error& e) {
      throw DomainError("eval_batch: point " + std::to_string(i) + ": " + e.what());
    }
    out.push_back(detail::eval_unchecked(field, xs[i]));
  }
  return out;
}

/// max over probe points of |F_L(x) - f(x)|.
template <class F>
double sup_abs_error(const GridField& field, F&& f, const ProbeGrid& probe) {
  double worst = 0.0;
  probe.for_each([&](std::span<const double> x, std::span<const std::size_t>) {
    worst = std::max(worst, std::abs(eval(field, x) - f(x)));
  });
  return worst;
}

/// Trapezoid approximation of the integral of |F_L - f| over the probe region.
template <class F>
double integrated_abs_error(const GridField& field, F&& f, const ProbeGrid& probe) {
  return trapezoid_integral([&](std::span<const double> x) { return std::abs(eval(field, x) - f(x)); }, probe);
}

/// Holder-continuity bound sqrt(r_n) C_tilde C^{alpha/2} / (L-1)^alpha.
inline double holder_bound(double r_n, double c_tilde, double C, double alpha, std::size_t L) {
  detail::require<DomainError>(alpha > 0.0 && alpha <= 1.0, "holder_bound: alpha must lie in (0,1]");
  detail::require<PreconditionError>(L >= 2, "holder_bound: L must be >= 2");
  detail::require<PreconditionError>(r_n > 0.0 && c_tilde >= 0.0 && C >= 0.0, "holder_bound: invalid constants");
  return std::sqrt(r_n) * c_tilde * std::pow(C, 0.5 * alpha) / std::pow(static_cast<double>(L - 1), alpha);
}

/// Smallest x with F_L(x) >= tau for a nondecreasing one-dimensional field;
/// exact linear inversion within the bracketing cell.
inline double invert_monotone(const GridField& field, double tau) {
  const TensorGrid& grid = field.grid();
  detail::require<PreconditionError>(grid.dim() == 1, "invert_monotone: field must be one-dimensional");
  const auto v = field.values();
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] < v[i - 1]) throw PreconditionError("invert_monotone: values decrease at node " + std::to_string(i));
  }
  if (!(tau >= v.front() && tau <= v.back())) {
    throw RangeError("invert_monotone: level " + std::to_string(tau) + " outside [" + std::to_string(v.front()) + ", " +
                     std::to_string(v.back()) + "]");
  }
  // First node reaching tau; the crossing lies in the segment just before it.
  const auto it = std::lower_bound(v.begin(), v.end(), tau);
  const std::size_t j = static_cast<std::size_t>(it - v.begin());
  if (j == 0 || v[j] == tau) return grid.coordinate(0, j);
  const double frac = (tau - v[j - 1]) / (v[j] - v[j - 1]);
  const double left = grid.coordinate(0, j - 1);
  return std::min(left + frac * grid.mesh(0), grid.coordinate(0, j));
}

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, const std::string& where) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw DataError(where + ": cannot parse '" + std::string(s) + "' as a finite number");
  }
  return v;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return cells;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace detail

/// One row per node: x1..xd,value in lexicographic node order.
inline void write_csv(std::ostream& os, const GridField& field) {
  const TensorGrid& grid = field.grid();
  for (std::size_t k = 0; k < grid.dim(); ++k) os << 'x' << (k + 1) << ',';
  os << "value\n";
  for (std::size_t i = 0; i < field.size(); ++i) {
    const auto x = grid.node(i);
    for (double c : x) os << detail::format_double(c) << ',';
    os << detail::format_double(field[i]) << '\n';
  }
}

/// Inverse of write_csv. The grid is recovered from the first and last rows;
/// every row's coordinates must match the reconstructed node.
inline GridField read_csv_field(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw DataError("grid field CSV: missing header");
  const auto header = detail::split_csv_line(detail::trim(line));
  if (header.size() < 2 || detail::trim(header.back()) != "value") {
    throw DataError("grid field CSV: header must be x1,...,xd,value");
  }
  const std::size_t d = header.size() - 1;
  std::vector<std::vector<double>> coords;
  std::vector<double> values;
  std::size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != d + 1) throw DataError("grid field CSV: row " + std::to_string(row) + " has wrong column count");
    std::vector<double> x(d);
    for (std::size_t k = 0; k < d; ++k) x[k] = detail::parse_double(cells[k], "row " + std::to_string(row));
    coords.push_back(std::move(x));
    values.push_back(detail::parse_double(cells[d], "row " + std::to_string(row)));
  }
  const auto nodes = static_cast<std::size_t>(std::llround(std::pow(static_cast<double>(values.size()), 1.0 / static_cast<double>(d))));
  std::size_t total = 1;
  for (std::size_t k = 0; k < d; ++k) total *= nodes;
  if (nodes < 2 || total != values.size()) throw DataError("grid field CSV: row count is not L^d");
  TensorGrid grid(coords.front(), coords.back(), nodes);
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (grid.node(i) != coords[i]) throw DataError("grid field CSV: row " + std::to_string(i + 2) + " is not node " + std::to_string(i));
  }
  return GridField(std::move(grid), std::move(values));
}

}  // namespace interpband
