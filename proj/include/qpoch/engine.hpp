#pragma once

// Incremental expansion of the finite q-Pochhammer products
//
//   (q;q)_n = (1-q)(1-q^2)...(1-q^n) = sum_i a_{n,i} q^i
//
// Only the lower half a_{n,0..floor(n(n+1)/4)} is stored; the upper half is
// implied by the palindromic relation a_{n,i} = (-1)^n a_{n,n(n+1)/2-i}.
// Multiplying by (1-q^n) is the coefficient-level update
// a_{n,i} = a_{n-1,i} - a_{n-1,i-n}.

#include <cstdint>
#include <vector>

#include <gmpxx.h>

namespace qpoch {

using BigInt = mpz_class;
using Index = std::uint64_t;

struct MaxRecord;

/// Degree n(n+1)/2 of (q;q)_n.
constexpr Index degree(Index n) noexcept { return n * (n + 1) / 2; }

/// Highest stored exponent floor(n(n+1)/4).
constexpr Index half_top(Index n) noexcept { return degree(n) / 2; }

/// Lower half of the coefficients of (q;q)_n.
struct HalfPoly {
  Index n = 0;
  std::vector<BigInt> coeffs{BigInt(1)};

  friend bool operator==(const HalfPoly& a, const HalfPoly& b) {
    return a.n == b.n && a.coeffs == b.coeffs;
  }
};

/// Literal expansion of (q;q)_n, all n(n+1)/2 + 1 coefficients.
struct FullPoly {
  Index n = 0;
  std::vector<BigInt> coeffs{BigInt(1)};
};

inline constexpr Index kDefaultNaiveCap = 2000;

HalfPoly init_identity();

/// Coefficient of q^i in (q;q)_infinity: (-1)^k when i = k(3k-1)/2 for some
/// integer k, else 0.
int pentagonal_coefficient(Index i);

/// Advances p from (q;q)_{n-1} to (q;q)_n in place, using one array.
void step_in_place(HalfPoly& p);

HalfPoly step(HalfPoly p);

/// step_in_place with the maximum tracked during the sweep.
MaxRecord step_and_scan(HalfPoly& p);

/// Double-buffered step: every entry of the result is computed from the
/// untouched source, and the index range is split among `workers` threads.
/// Bit-identical to step(). Throws std::invalid_argument for workers == 0.
HalfPoly step_parallel(const HalfPoly& p, unsigned workers);

/// Long-running form of step_parallel. Keeps two coefficient buffers alive
/// and swaps their roles after each step so big integers are reused.
class ParallelStepper {
 public:
  ParallelStepper(HalfPoly start, unsigned workers);

  /// Computes the next polynomial and returns its maximum record.
  MaxRecord advance();

  const HalfPoly& current() const noexcept { return front_; }
  HalfPoly release() && { return std::move(front_); }
  unsigned workers() const noexcept { return workers_; }

 private:
  HalfPoly front_;
  HalfPoly back_;
  unsigned workers_;
};

/// a_{n,i} for any 0 <= i <= n(n+1)/2. Throws std::out_of_range otherwise.
BigInt coefficient(const HalfPoly& p, Index i);

/// The implied full coefficient list.
std::vector<BigInt> full_coefficients(const HalfPoly& p);

/// Multiplies by (1 - q^{n+1}) with a plain full-array convolution.
FullPoly naive_next(const FullPoly& p);

/// Schoolbook expansion of (q;q)_n with no symmetry. Test oracle.
/// Throws std::invalid_argument when n > cap.
FullPoly naive_expand(Index n, Index cap = kDefaultNaiveCap);

/// Sum of a_{n,i}^2 over the full polynomial.
BigInt sum_of_squares(const HalfPoly& p);

/// First index i <= min(limit, n, top) where coeffs[i] differs from the
/// pentagonal series, or -1 if none.
std::int64_t first_prefix_violation(const HalfPoly& p, Index limit);

}  // namespace qpoch
