#pragma once

// Growth of the maximum coefficient M_n.
//
// M_n ~ e^{K n} with K ~ 0.19861, and M_n / M_{n-1} -> e^K. Ratios and roots
// are evaluated in MPFR arithmetic; asymptotic fits use the basis
// {1, 1/n, 1/n^2, ...} solved by column-pivoted QR.
//
// The integral of prod_{j<=n} 4 sin^2(pi j z) over [0, 1] equals the sum of
// the squared coefficients of (q;q)_n, which gives it an exact check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <type_traits>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/eigen.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include "qpoch/engine.hpp"
#include "qpoch/store.hpp"

namespace qpoch {

using Real = boost::multiprecision::mpfr_float;

inline constexpr unsigned kDefaultDigits = 50;
inline constexpr double kSudlerK = 0.19861;

/// Decimal digits for high-precision output: QPOCH_PRECISION or 50.
unsigned precision_digits();

/// Sets the default MPFR precision (decimal digits) for its lifetime.
class ScopedPrecision {
 public:
  explicit ScopedPrecision(unsigned digits);
  ~ScopedPrecision();
  ScopedPrecision(const ScopedPrecision&) = delete;
  ScopedPrecision& operator=(const ScopedPrecision&) = delete;

 private:
  unsigned saved_;
};

Real to_real(const BigInt& value);

/// M_n / M_{n-1}. Throws std::out_of_range when either record is missing.
Real successive_ratio(const RecordLog& records, Index n);

/// M_n^{1/n} for n >= 1.
Real nth_root(const RecordLog& records, Index n);

enum class Quantity { ratio, root, log_max_over_n };

std::string to_string(Quantity q);
Quantity parse_quantity(const std::string& s);

template <typename Scalar>
struct AsymptoticFit {
  std::string quantity;
  std::vector<Scalar> coefficients;  // a0, a1, ...
  Index n_start = 0;
  Index n_step = 0;
  Index n_count = 0;
  Scalar residual = 0;

  const Scalar& limit() const { return coefficients.front(); }
};

/// Least squares a0 + a1/n + ... + a_{terms-1}/n^{terms-1} through (n, value)
/// samples. Throws std::invalid_argument for terms outside 2..4, too few
/// samples, duplicate n, or a rank-deficient system.
template <typename Scalar>
AsymptoticFit<Scalar> fit_series(std::span<const std::pair<Scalar, Scalar>> samples, int terms) {
  if (terms < 2 || terms > 4) throw std::invalid_argument("fit_series: terms must be 2..4");
  if (samples.size() < static_cast<std::size_t>(terms)) {
    throw std::invalid_argument("fit_series: need at least as many samples as terms");
  }
  std::vector<Scalar> ns;
  for (const auto& s : samples) ns.push_back(s.first);
  std::sort(ns.begin(), ns.end());
  if (std::adjacent_find(ns.begin(), ns.end()) != ns.end()) {
    throw std::invalid_argument("fit_series: duplicate n makes the system singular");
  }

  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const auto rows = static_cast<Eigen::Index>(samples.size());
  Matrix basis(rows, terms);
  Vector values(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Scalar inv = Scalar(1) / samples[i].first;
    Scalar power = 1;
    for (int k = 0; k < terms; ++k) {
      basis(i, k) = power;
      power *= inv;
    }
    values(i) = samples[i].second;
  }
  const auto qr = basis.colPivHouseholderQr();
  if (qr.rank() < terms) throw std::invalid_argument("fit_series: singular system");
  const Vector coeffs = qr.solve(values);

  AsymptoticFit<Scalar> fit;
  fit.coefficients.assign(coeffs.data(), coeffs.data() + terms);
  fit.residual = (basis * coeffs - values).norm();
  fit.n_count = samples.size();
  return fit;
}

/// Samples of the quantity at n = start, start + step, ... and their fit.
AsymptoticFit<Real> fit_quantity(const RecordLog& records, Quantity q, Index start, Index step,
                                 Index count, int terms);

inline constexpr Index kMaxIntegralN = 64;
inline constexpr Index kMaxPanels = Index(1) << 22;

/// Minimum panel count for a given n.
constexpr Index min_panels(Index n) { return 64 * n * n; }

namespace detail {

template <typename Scalar>
Scalar pairwise_sum(std::span<const Scalar> v) {
  if (v.size() <= 8) {
    Scalar s = 0;
    for (const auto& x : v) s += x;
    return s;
  }
  const auto half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

}  // namespace detail

/// Composite midpoint estimate of int_0^1 prod_{j=1}^n 4 sin^2(pi j z) dz
/// with max(subdivisions, 64 n^2) panels. Throws std::length_error when n
/// exceeds 64 or the panel count exceeds the budget.
template <typename Scalar = double>
Scalar kotesovec_integral(Index n, Index subdivisions = 0) {
  if (n == 0) throw std::invalid_argument("kotesovec_integral: n must be positive");
  if (n > kMaxIntegralN) throw std::length_error("kotesovec_integral: n above quadrature budget");
  const Index panels = std::max(subdivisions, min_panels(n));
  if (panels > kMaxPanels) throw std::length_error("kotesovec_integral: too many panels");

  const Scalar pi = boost::math::constants::pi<Scalar>();
  const Scalar width = Scalar(1) / Scalar(panels);
  std::vector<Scalar> values(panels);
  auto fill = [&](Index lo, Index hi) {
    using std::sin;
    for (Index k = lo; k < hi; ++k) {
      const Scalar z = (Scalar(k) + Scalar(0.5)) * width;
      Scalar f = 1;
      for (Index j = 1; j <= n; ++j) {
        const Scalar s = sin(pi * Scalar(j) * z);
        f *= 4 * s * s;
      }
      values[k] = f;
    }
  };

  // MPFR precision defaults are per thread, so only native floats fan out.
  const unsigned workers =
      std::is_floating_point_v<Scalar> ? std::max(1u, std::thread::hardware_concurrency()) : 1u;
  if (workers == 1) {
    fill(0, panels);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back(fill, panels * w / workers, panels * (w + 1) / workers);
    }
  }
  // Fixed tree order: the result does not depend on the thread count.
  return detail::pairwise_sum<Scalar>(values) * width;
}

struct GrowthEstimates {
  Index n_max = 0;
  Real k_from_max;    // ln(M_N) / N
  Real k_from_ratio;  // ln of the fitted ratio limit
  Real ratio_at_nmax;
  Real root_at_nmax;
  AsymptoticFit<Real> ratio_fit;
};

/// Throws std::invalid_argument for an empty log or one that ends below n = 2.
GrowthEstimates growth_constant(const RecordLog& records);

}  // namespace qpoch
