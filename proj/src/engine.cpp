#include "qpoch/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <thread>

#include "qpoch/scanner.hpp"

namespace qpoch {

namespace {

Index isqrt(Index x) {
  auto r = static_cast<Index>(std::sqrt(static_cast<long double>(x)));
  while (r * r > x) --r;
  while ((r + 1) * (r + 1) <= x) ++r;
  return r;
}

// Writes a_{n,i} of the successor of `src` into `out`, reading only `src`.
// Used where the source buffer must stay immutable.
void successor_entry(const HalfPoly& src, Index i, mpz_ptr out) {
  const Index n = src.n + 1;
  const Index old_top = src.coeffs.size() - 1;
  const Index old_deg = degree(src.n);
  const bool negate_mirror = (src.n % 2) == 1;

  if (i <= old_top) {
    mpz_set(out, src.coeffs[i].get_mpz_t());
  } else if (i <= old_deg) {
    const auto* mirrored = src.coeffs[old_deg - i].get_mpz_t();
    negate_mirror ? mpz_neg(out, mirrored) : mpz_set(out, mirrored);
  } else {
    mpz_set_ui(out, 0);
  }
  if (i >= n) {
    // i - n never exceeds the old stored half.
    mpz_sub(out, out, src.coeffs[i - n].get_mpz_t());
  }
}

void check_workers(unsigned workers) {
  if (workers == 0) throw std::invalid_argument("step_parallel: workers must be positive");
}

// Fills dst (already sized to the new half) from src, splitting [0, size)
// into contiguous blocks, one per worker. Returns the merged maximum.
MaxTracker parallel_fill(const HalfPoly& src, HalfPoly& dst, unsigned workers) {
  const Index n = src.n + 1;
  const Index size = dst.coeffs.size();
  const Index blocks = std::min<Index>(workers, size);
  std::vector<MaxTracker> partial(blocks, MaxTracker(n));

  auto work = [&](Index b) {
    const Index lo = size * b / blocks;
    const Index hi = size * (b + 1) / blocks;
    for (Index i = lo; i < hi; ++i) {
      auto* out = dst.coeffs[i].get_mpz_t();
      successor_entry(src, i, out);
      partial[b].offer(i, out);
    }
  };

  if (blocks <= 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(blocks - 1);
    for (Index b = 1; b < blocks; ++b) pool.emplace_back(work, b);
    work(0);
  }  // join before merging

  MaxTracker merged(n);
  for (const auto& t : partial) merged.merge(t);
  dst.n = n;
  return merged;
}

template <typename Visit>
void step_impl(HalfPoly& p, Visit&& visit) {
  const Index n = p.n + 1;
  const Index old_top = half_top(p.n);
  const Index old_deg = degree(p.n);
  const Index new_top = half_top(n);
  const bool negate_mirror = (p.n % 2) == 1;
  auto& a = p.coeffs;

  a.resize(new_top + 1);

  // Fresh tail: the old values there come from the mirrored lower half, and
  // every read lands at an index <= old_top that is still untouched.
  for (Index i = old_top + 1; i <= new_top; ++i) {
    auto* out = a[i].get_mpz_t();
    if (i <= old_deg) {
      const auto* mirrored = a[old_deg - i].get_mpz_t();
      negate_mirror ? mpz_neg(out, mirrored) : mpz_set(out, mirrored);
    }
    if (i >= n) mpz_sub(out, out, a[i - n].get_mpz_t());
    visit(i, out);
  }

  // Shared region, downward so a[i - n] is still a_{n-1,i-n} when read.
  for (Index i = old_top + 1; i-- > n;) {
    auto* out = a[i].get_mpz_t();
    mpz_sub(out, out, a[i - n].get_mpz_t());
    visit(i, out);
  }

  // Pentagonal prefix is untouched.
  const Index prefix_end = std::min<Index>(n, old_top + 1);
  for (Index i = 0; i < prefix_end; ++i) visit(i, a[i].get_mpz_t());

  p.n = n;
}

}  // namespace

HalfPoly init_identity() { return HalfPoly{}; }

int pentagonal_coefficient(Index i) {
  // i = k(3k-1)/2  <=>  24 i + 1 = (6k - 1)^2
  const Index d = 24 * i + 1;
  const Index s = isqrt(d);
  if (s * s != d) return 0;
  Index k = 0;
  if (s % 6 == 5) {
    k = (s + 1) / 6;
  } else if (s % 6 == 1) {
    k = (s - 1) / 6;
  } else {
    return 0;
  }
  return (k % 2 == 0) ? 1 : -1;
}

void step_in_place(HalfPoly& p) {
  step_impl(p, [](Index, mpz_srcptr) {});
}

HalfPoly step(HalfPoly p) {
  step_in_place(p);
  return p;
}

MaxRecord step_and_scan(HalfPoly& p) {
  MaxTracker tracker(p.n + 1);
  step_impl(p, [&](Index i, mpz_srcptr v) { tracker.offer(i, v); });
  return tracker.record();
}

HalfPoly step_parallel(const HalfPoly& p, unsigned workers) {
  check_workers(workers);
  HalfPoly out;
  out.coeffs.resize(half_top(p.n + 1) + 1);
  parallel_fill(p, out, workers);
  return out;
}

ParallelStepper::ParallelStepper(HalfPoly start, unsigned workers)
    : front_(std::move(start)), workers_(workers) {
  check_workers(workers);
  back_.coeffs.clear();
}

MaxRecord ParallelStepper::advance() {
  const Index n = front_.n + 1;
  back_.coeffs.resize(half_top(n) + 1);
  const MaxTracker tracker = parallel_fill(front_, back_, workers_);
  std::swap(front_, back_);
  return tracker.record();
}

BigInt coefficient(const HalfPoly& p, Index i) {
  const Index deg = degree(p.n);
  if (i > deg) {
    throw std::out_of_range("coefficient: exponent " + std::to_string(i) +
                            " outside [0, " + std::to_string(deg) + "]");
  }
  if (i < p.coeffs.size()) return p.coeffs[i];
  BigInt v = p.coeffs[deg - i];
  if (p.n % 2 == 1) v = -v;
  return v;
}

std::vector<BigInt> full_coefficients(const HalfPoly& p) {
  const Index deg = degree(p.n);
  std::vector<BigInt> out(deg + 1);
  for (Index i = 0; i <= deg; ++i) out[i] = coefficient(p, i);
  return out;
}

FullPoly naive_next(const FullPoly& p) {
  const Index k = p.n + 1;
  // Factor 1 - q^k as a dense coefficient list.
  std::vector<long> factor(k + 1, 0);
  factor[0] = 1;
  factor[k] = -1;

  FullPoly out;
  out.n = k;
  out.coeffs.assign(p.coeffs.size() + k, BigInt(0));
  for (Index j = 0; j < factor.size(); ++j) {
    if (factor[j] == 0) continue;
    for (Index i = 0; i < p.coeffs.size(); ++i) {
      out.coeffs[i + j] += p.coeffs[i] * factor[j];
    }
  }
  return out;
}

FullPoly naive_expand(Index n, Index cap) {
  if (n > cap) {
    throw std::invalid_argument("naive_expand: n = " + std::to_string(n) +
                                " exceeds cap " + std::to_string(cap));
  }
  FullPoly p;
  while (p.n < n) p = naive_next(p);
  return p;
}

BigInt sum_of_squares(const HalfPoly& p) {
  const Index deg = degree(p.n);
  BigInt total = 0;
  BigInt sq;
  for (Index i = 0; i < p.coeffs.size(); ++i) {
    sq = p.coeffs[i] * p.coeffs[i];
    total += (2 * i == deg) ? sq : BigInt(2 * sq);
  }
  return total;
}

std::int64_t first_prefix_violation(const HalfPoly& p, Index limit) {
  const Index end = std::min({limit, p.n, Index(p.coeffs.size() - 1)});
  for (Index i = 0; i <= end; ++i) {
    if (p.coeffs[i] != pentagonal_coefficient(i)) return static_cast<std::int64_t>(i);
  }
  return -1;
}

}  // namespace qpoch
