#pragma once

// Equally spaced tensor grids, cell location and the grid-size rule.
//
// Indices are zero-based: nodes on an axis are 0..L-1 and cells 0..L-2.
// Node values are linearised lexicographically with the last axis fastest.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "interpband/error.hpp"
#include "interpband/numerics.hpp"

namespace interpband {

/// Largest supported dimension; keeps vertex enumeration on the stack.
inline constexpr std::size_t kMaxDim = 10;

/// L equally spaced nodes per axis over a hyper-rectangle. Endpoints are
/// fixed: node 0 is lo_k and node L-1 is hi_k exactly.
class TensorGrid {
 public:
  TensorGrid(Box region, std::size_t nodes_per_axis) : region_(std::move(region)), nodes_(nodes_per_axis) {
    detail::require<PreconditionError>(region_.dim() >= 1 && region_.dim() <= kMaxDim,
                                       "TensorGrid: dimension must be in [1, " + std::to_string(kMaxDim) + "]");
    detail::require<PreconditionError>(nodes_ >= 2, "TensorGrid: need at least 2 nodes per axis");
    mesh_.resize(dim());
    total_ = 1;
    for (std::size_t k = 0; k < dim(); ++k) {
      mesh_[k] = region_.width(k) / static_cast<double>(nodes_ - 1);
      total_ *= nodes_;
    }
  }

  TensorGrid(std::vector<double> lo, std::vector<double> hi, std::size_t nodes_per_axis)
      : TensorGrid(Box(std::move(lo), std::move(hi)), nodes_per_axis) {}

  std::size_t dim() const { return region_.dim(); }
  std::size_t nodes_per_axis() const { return nodes_; }
  std::size_t node_count() const { return total_; }
  const Box& region() const { return region_; }
  double lo(std::size_t k) const { return region_.lo[k]; }
  double hi(std::size_t k) const { return region_.hi[k]; }
  double mesh(std::size_t k) const { return mesh_[k]; }

  /// Coordinate of node i on axis k.
  double coordinate(std::size_t k, std::size_t i) const {
    if (i + 1 == nodes_) return region_.hi[k];
    return region_.lo[k] + static_cast<double>(i) * mesh_[k];
  }

  std::vector<double> node(std::span<const std::size_t> index) const {
    detail::require<PreconditionError>(index.size() == dim(), "node: index has wrong dimension");
    std::vector<double> x(dim());
    for (std::size_t k = 0; k < dim(); ++k) {
      detail::require<DomainError>(index[k] < nodes_, "node: index " + std::to_string(index[k]) + " out of range on axis " +
                                                          std::to_string(k));
      x[k] = coordinate(k, index[k]);
    }
    return x;
  }

  std::vector<double> node(std::size_t linear) const { return node(multi_index(linear)); }

  std::size_t linear_index(std::span<const std::size_t> index) const {
    std::size_t lin = 0;
    for (std::size_t k = 0; k < dim(); ++k) lin = lin * nodes_ + index[k];
    return lin;
  }

  std::vector<std::size_t> multi_index(std::size_t linear) const {
    std::vector<std::size_t> idx(dim());
    for (std::size_t k = dim(); k-- > 0;) {
      idx[k] = linear % nodes_;
      linear /= nodes_;
    }
    return idx;
  }

  /// Stride of axis k in the linearised node order.
  std::size_t stride(std::size_t k) const {
    std::size_t s = 1;
    for (std::size_t j = k + 1; j < dim(); ++j) s *= nodes_;
    return s;
  }

  friend bool operator==(const TensorGrid& a, const TensorGrid& b) {
    return a.nodes_ == b.nodes_ && a.region_.lo == b.region_.lo && a.region_.hi == b.region_.hi;
  }

 private:
  Box region_;
  std::size_t nodes_;
  std::vector<double> mesh_;
  std::size_t total_ = 1;
};

/// Cell index and local coordinate in [0,1] per axis.
struct CellLocation {
  std::vector<std::size_t> cell;
  std::vector<double> offset;
};

namespace detail {

// Cell index and offset on one axis. Nodes map to offset exactly 0 (or 1 for
// the last node); the right endpoint belongs to the last cell.
inline void locate_axis(const TensorGrid& grid, std::size_t k, double x, std::size_t& cell, double& offset) {
  const std::size_t last_cell = grid.nodes_per_axis() - 2;
  const double t = (x - grid.lo(k)) / grid.mesh(k);
  std::size_t i = t <= 0.0 ? 0 : std::min(static_cast<std::size_t>(std::floor(t)), last_cell);
  while (i < last_cell && x >= grid.coordinate(k, i + 1)) ++i;
  while (i > 0 && x < grid.coordinate(k, i)) --i;
  cell = i;
  const double left = grid.coordinate(k, i);
  const double right = grid.coordinate(k, i + 1);
  if (x == left) {
    offset = 0.0;
  } else if (x == right) {
    offset = 1.0;
  } else {
    offset = std::clamp((x - left) / grid.mesh(k), 0.0, 1.0);
  }
}

inline void check_in_domain(const TensorGrid& grid, std::span<const double> x) {
  if (x.size() != grid.dim()) {
    throw PreconditionError("point has dimension " + std::to_string(x.size()) + ", grid has " +
                            std::to_string(grid.dim()));
  }
  for (std::size_t k = 0; k < grid.dim(); ++k) {
    if (!(x[k] >= grid.lo(k) && x[k] <= grid.hi(k))) {
      throw DomainError("point outside grid region on axis " + std::to_string(k) + ": " + std::to_string(x[k]) +
                        " not in [" + std::to_string(grid.lo(k)) + ", " + std::to_string(grid.hi(k)) + "]");
    }
  }
}

}  // namespace detail

/// Locates x in the grid. Throws DomainError outside the region; no
/// extrapolation.
inline CellLocation locate(const TensorGrid& grid, std::span<const double> x) {
  detail::check_in_domain(grid, x);
  CellLocation loc{std::vector<std::size_t>(grid.dim()), std::vector<double>(grid.dim())};
  for (std::size_t k = 0; k < grid.dim(); ++k) detail::locate_axis(grid, k, x[k], loc.cell[k], loc.offset[k]);
  return loc;
}

/// Grid-size rule: max(ceil(a * width * n^b), 2).
inline std::size_t grid_rule(double a, double b, double width, std::size_t n) {
  detail::require<PreconditionError>(a > 0.0 && width > 0.0 && n >= 1 && std::isfinite(b),
                                     "grid_rule: need a > 0, width > 0, n >= 1");
  const double raw = std::ceil(a * width * std::pow(static_cast<double>(n), b));
  return std::max<std::size_t>(static_cast<std::size_t>(raw), 2);
}

/// Interpolation-error bound sqrt(r_n) d C^2 / (8 (L-1)^2) for targets with
/// second partials bounded by C on a region of width at most sqrt(C).
inline double curvature_bound(double r_n, std::size_t d, double C, std::size_t L) {
  detail::require<PreconditionError>(L >= 2, "curvature_bound: L must be >= 2");
  detail::require<PreconditionError>(r_n > 0.0 && d >= 1 && C >= 0.0, "curvature_bound: need r_n > 0, d >= 1, C >= 0");
  const double cells = static_cast<double>(L - 1);
  return std::sqrt(r_n) * static_cast<double>(d) * C * C / (8.0 * cells * cells);
}

struct RateDiagnostic {
  double ratio;  ///< L / r_n^{1/4}; must diverge for the bias to vanish
  double bound;  ///< curvature_bound(r_n, d, C, L)
};

inline RateDiagnostic rate_diagnostic(std::size_t L, double r_n, std::size_t d, double C) {
  detail::require<PreconditionError>(L >= 2 && r_n > 0.0, "rate_diagnostic: need L >= 2 and r_n > 0");
  return {static_cast<double>(L) * std::pow(r_n, -0.25), curvature_bound(r_n, d, C, L)};
}

}  // namespace interpband
