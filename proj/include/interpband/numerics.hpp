#pragma once

// Scalar numerics shared by the rest of the library: normal and bivariate
// normal distribution functions, empirical quantiles, bisection and
// tensor-product trapezoid quadrature on probe lattices.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "interpband/error.hpp"

namespace interpband {

/// Axis-aligned hyper-rectangle prod_k [lo_k, hi_k].
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  Box() = default;
  Box(std::vector<double> lower, std::vector<double> upper) : lo(std::move(lower)), hi(std::move(upper)) {
    detail::require<PreconditionError>(!lo.empty() && lo.size() == hi.size(),
                                       "Box: lo and hi must be nonempty and of equal length");
    for (std::size_t k = 0; k < lo.size(); ++k) {
      detail::require<PreconditionError>(std::isfinite(lo[k]) && std::isfinite(hi[k]) && lo[k] < hi[k],
                                         "Box: need finite lo_k < hi_k on axis " + std::to_string(k));
    }
  }

  std::size_t dim() const { return lo.size(); }
  double width(std::size_t k) const { return hi[k] - lo[k]; }

  /// Lebesgue measure.
  double measure() const {
    double m = 1.0;
    for (std::size_t k = 0; k < dim(); ++k) m *= width(k);
    return m;
  }

  bool contains(std::span<const double> x) const {
    if (x.size() != dim()) return false;
    for (std::size_t k = 0; k < dim(); ++k) {
      if (!(x[k] >= lo[k] && x[k] <= hi[k])) return false;
    }
    return true;
  }
};

/// Equally spaced evaluation lattice used for sup / integral statements over
/// a region. Point j on axis k is lo_k + j (hi_k - lo_k)/(count_k - 1); the
/// last point is hi_k exactly.
class ProbeGrid {
 public:
  ProbeGrid(Box region, std::vector<std::size_t> counts) : region_(std::move(region)), counts_(std::move(counts)) {
    detail::require<PreconditionError>(counts_.size() == region_.dim(),
                                       "ProbeGrid: one point count per axis required");
    for (std::size_t c : counts_) {
      detail::require<PreconditionError>(c >= 2, "ProbeGrid: need at least 2 points per axis");
    }
  }

  /// Same count on every axis.
  ProbeGrid(Box region, std::size_t count_per_axis)
      : ProbeGrid(region, std::vector<std::size_t>(region.dim(), count_per_axis)) {}

  const Box& region() const { return region_; }
  std::size_t dim() const { return region_.dim(); }
  std::size_t count(std::size_t k) const { return counts_[k]; }
  const std::vector<std::size_t>& counts() const { return counts_; }

  std::size_t size() const {
    std::size_t n = 1;
    for (std::size_t c : counts_) n *= c;
    return n;
  }

  double coordinate(std::size_t k, std::size_t j) const {
    if (j + 1 == counts_[k]) return region_.hi[k];
    const double step = region_.width(k) / static_cast<double>(counts_[k] - 1);
    return region_.lo[k] + static_cast<double>(j) * step;
  }

  /// Visits every lattice point in lexicographic order (last axis fastest).
  /// The visitor receives (point, index vector).
  template <class Visitor>
  void for_each(Visitor&& visit) const {
    const std::size_t d = dim();
    std::vector<std::size_t> idx(d, 0);
    std::vector<double> x(d);
    for (std::size_t k = 0; k < d; ++k) x[k] = coordinate(k, 0);
    const std::size_t total = size();
    for (std::size_t n = 0; n < total; ++n) {
      visit(std::span<const double>(x), std::span<const std::size_t>(idx));
      for (std::size_t k = d; k-- > 0;) {
        if (++idx[k] < counts_[k]) {
          x[k] = coordinate(k, idx[k]);
          break;
        }
        idx[k] = 0;
        x[k] = coordinate(k, 0);
      }
    }
  }

 private:
  Box region_;
  std::vector<std::size_t> counts_;
};

namespace detail {

inline constexpr double kInvSqrt2 = 0.70710678118654752440;

/// ceil(v) that forgives representation noise just above an integer, so
/// that e.g. 0.95 * 100 maps to rank 95.
inline std::size_t ceil_rank(double v) {
  const double nearest = std::round(v);
  if (std::abs(v - nearest) <= 1e-9 * std::max(1.0, std::abs(v))) return static_cast<std::size_t>(std::max(0.0, nearest));
  return static_cast<std::size_t>(std::max(0.0, std::ceil(v)));
}

// Rational approximation of the lower-half normal quantile (p <= 0.5).
inline double quantile_guess(double p) {
  static constexpr std::array<double, 6> a = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                              1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr std::array<double, 5> b = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                              6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr std::array<double, 6> c = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                              -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr std::array<double, 4> d = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                              3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace detail

/// Standard normal distribution function.
inline double std_normal_cdf(double x) { return 0.5 * std::erfc(-x * detail::kInvSqrt2); }

/// Standard normal quantile. Rational starting value refined by Halley steps
/// against std_normal_cdf; upper half computed by symmetry.
inline double std_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("std_normal_quantile: p must lie in (0,1), got " + std::to_string(p));
  }
  if (p > 0.5) return -std_normal_quantile(1.0 - p);
  if (p == 0.5) return 0.0;
  double x = detail::quantile_guess(p);
  for (int it = 0; it < 2; ++it) {
    const double e = std_normal_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

/// Phi^{-1}(0.75) - Phi^{-1}(0.25): interquartile range of N(0,1).
inline double normal_iqr() {
  static const double value = std_normal_quantile(0.75) - std_normal_quantile(0.25);
  return value;
}

/// P(Z1 <= x1, Z2 <= x2) for a standard bivariate normal with correlation
/// rho. Genz's refinement of the Drezner-Wesolowsky single-integral method
/// with fixed Gauss-Legendre orders (6/12/20 by |rho|); deterministic and
/// accurate to roughly 1e-15.
inline double binormal_lower_cdf(double x1, double x2, double rho) {
  if (!(rho > -1.0 && rho < 1.0)) {
    throw DomainError("binormal_lower_cdf: rho must lie in (-1,1), got " + std::to_string(rho));
  }
  // Upper-orthant probability P(Z1 > h, Z2 > k) evaluated at (h,k) = (-x1,-x2).
  const double h0 = -x1;
  const double k0 = -x2;
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (h0 == inf || k0 == inf) return 0.0;
  if (h0 == -inf) return k0 == -inf ? 1.0 : std_normal_cdf(-k0);
  if (k0 == -inf) return std_normal_cdf(-h0);
  if (rho == 0.0) return std_normal_cdf(-h0) * std_normal_cdf(-k0);

  static constexpr double w6[] = {0.1713244923791705, 0.3607615730481384, 0.4679139345726904};
  static constexpr double x6[] = {0.9324695142031522, 0.6612093864662647, 0.2386191860831970};
  static constexpr double w12[] = {0.04717533638651177, 0.1069393259953183, 0.1600783285433464,
                                   0.2031674267230659,  0.2334925365383547, 0.2491470458134029};
  static constexpr double x12[] = {0.9815606342467191, 0.9041172563704750, 0.7699026741943050,
                                   0.5873179542866171, 0.3678314989981802, 0.1252334085114692};
  static constexpr double w20[] = {0.01761400713915212, 0.04060142980038694, 0.06267204833410906, 0.08327674157670475,
                                   0.1019301198172404,  0.1181945319615184,  0.1316886384491766,  0.1420961093183821,
                                   0.1491729864726037,  0.1527533871307259};
  static constexpr double x20[] = {0.9931285991850949, 0.9639719272779138, 0.9122344282513259, 0.8391169718222188,
                                   0.7463319064601508, 0.6360536807265150, 0.5108670019508271, 0.3737060887154196,
                                   0.2277858511416451, 0.07652652113349733};

  std::span<const double> w, xg;
  const double ar = std::abs(rho);
  if (ar < 0.3) {
    w = w6;
    xg = x6;
  } else if (ar < 0.75) {
    w = w12;
    xg = x12;
  } else {
    w = w20;
    xg = x20;
  }

  constexpr double two_pi = 2.0 * std::numbers::pi;
  double h = h0, k = k0;
  double hk = h * k;
  double bvn = 0.0;
  if (ar < 0.925) {
    const double hs = 0.5 * (h * h + k * k);
    const double asr = 0.5 * std::asin(rho);
    for (std::size_t i = 0; i < w.size(); ++i) {
      for (double sgn : {-1.0, 1.0}) {
        const double sn = std::sin(asr * (1.0 + sgn * xg[i]));
        bvn += w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
      }
    }
    bvn = bvn * asr / two_pi + std_normal_cdf(-h) * std_normal_cdf(-k);
  } else {
    if (rho < 0.0) {
      k = -k;
      hk = -hk;
    }
    const double as = 1.0 - rho * rho;
    double a = std::sqrt(as);
    const double bs = (h - k) * (h - k);
    const double c = (4.0 - hk) / 8.0;
    const double d = (12.0 - hk) / 80.0;
    double asr = -0.5 * (bs / as + hk);
    if (asr > -100.0) bvn = a * std::exp(asr) * (1.0 - c * (bs - as) * (1.0 - d * bs) / 3.0 + c * d * as * as);
    if (hk > -100.0) {
      const double b = std::sqrt(bs);
      const double sp = std::sqrt(two_pi) * std_normal_cdf(-b / a);
      bvn -= std::exp(-0.5 * hk) * sp * b * (1.0 - c * bs * (1.0 - d * bs) / 3.0);
    }
    a *= 0.5;
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      for (double sgn : {-1.0, 1.0}) {
        const double xs = std::pow(a * (1.0 + sgn * xg[i]), 2);
        const double asr_i = -0.5 * (bs / xs + hk);
        if (asr_i > -100.0) {
          const double sp = 1.0 + c * xs * (1.0 + 5.0 * d * xs);
          const double rs = std::sqrt(1.0 - xs);
          const double ep = std::exp(-0.5 * hk * xs / ((1.0 + rs) * (1.0 + rs))) / rs;
          acc += w[i] * std::exp(asr_i) * (sp - ep);
        }
      }
    }
    bvn = (a * acc - bvn) / two_pi;
    if (rho > 0.0) {
      bvn += std_normal_cdf(-std::max(h, k));
    } else if (h >= k) {
      bvn = -bvn;
    } else {
      const double band = h < 0.0 ? std_normal_cdf(k) - std_normal_cdf(h) : std_normal_cdf(-h) - std_normal_cdf(-k);
      bvn = band - bvn;
    }
  }
  return std::clamp(bvn, 0.0, 1.0);
}

/// k-th order statistic with k = ceil(p m): the left-continuous inverse of
/// the empirical distribution function.
inline double empirical_quantile(std::span<const double> sample, double p) {
  detail::require<DomainError>(!sample.empty(), "empirical_quantile: empty sample");
  detail::require<DomainError>(p > 0.0 && p < 1.0, "empirical_quantile: p must lie in (0,1)");
  const std::size_t m = sample.size();
  const std::size_t k = std::clamp<std::size_t>(detail::ceil_rank(p * static_cast<double>(m)), 1, m);
  std::vector<double> copy(sample.begin(), sample.end());
  std::nth_element(copy.begin(), copy.begin() + static_cast<std::ptrdiff_t>(k - 1), copy.end());
  return copy[k - 1];
}

/// Bisection on a sign-changing bracket; returns the midpoint of a final
/// bracket no wider than tol.
template <class F>
double bisect(F&& f, double lo, double hi, double tol) {
  detail::require<PreconditionError>(tol > 0.0, "bisect: tol must be positive");
  if (lo > hi) std::swap(lo, hi);
  double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo < 0.0) == (fhi < 0.0)) {
    std::ostringstream msg;
    msg << "bisect: no sign change on bracket [" << lo << ", " << hi << "] (f = " << flo << ", " << fhi << ")";
    throw BracketError(msg.str());
  }
  while (hi - lo > tol) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return lo + 0.5 * (hi - lo);
}

/// Tensor-product composite trapezoid rule over the probe lattice.
/// f is called with a std::span<const double> point.
template <class F>
double trapezoid_integral(F&& f, const ProbeGrid& probe) {
  const std::size_t d = probe.dim();
  std::vector<double> step(d);
  for (std::size_t k = 0; k < d; ++k) {
    step[k] = probe.region().width(k) / static_cast<double>(probe.count(k) - 1);
  }
  double sum = 0.0;
  probe.for_each([&](std::span<const double> x, std::span<const std::size_t> idx) {
    double w = 1.0;
    for (std::size_t k = 0; k < d; ++k) {
      const bool end = idx[k] == 0 || idx[k] + 1 == probe.count(k);
      w *= end ? 0.5 * step[k] : step[k];
    }
    sum += w * f(x);
  });
  return sum;
}

}  // namespace interpband
