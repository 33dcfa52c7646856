#include "qpoch/scanner.hpp"

#include <algorithm>

namespace qpoch {

void MaxTracker::offer(Index i, mpz_srcptr value) {
  // A self-mirrored middle index appears once in the full polynomial.
  const Index weight = (2 * i == degree_) ? 1 : 2;
  if (!seen_) {
    mpz_set(best_.get_mpz_t(), value);
    loc_ = i;
    hits_ = weight;
    seen_ = true;
    return;
  }
  const int cmp = mpz_cmpabs(value, best_.get_mpz_t());
  if (cmp > 0) {
    mpz_set(best_.get_mpz_t(), value);
    loc_ = i;
    hits_ = weight;
  } else if (cmp == 0) {
    hits_ += weight;
    if (i < loc_) {
      mpz_set(best_.get_mpz_t(), value);
      loc_ = i;
    }
  }
}

void MaxTracker::merge(const MaxTracker& other) {
  if (!other.seen_) return;
  if (!seen_) {
    *this = other;
    return;
  }
  const int cmp = mpz_cmpabs(other.best_.get_mpz_t(), best_.get_mpz_t());
  if (cmp > 0) {
    best_ = other.best_;
    loc_ = other.loc_;
    hits_ = other.hits_;
  } else if (cmp == 0) {
    hits_ += other.hits_;
    if (other.loc_ < loc_) {
      best_ = other.best_;
      loc_ = other.loc_;
    }
  }
}

MaxRecord MaxTracker::record() const {
  MaxRecord r;
  r.n = n_;
  r.max_abs = abs(best_);
  r.first_loc = loc_;
  r.occurrences = hits_;
  r.sign_at_first = sgn(best_) < 0 ? -1 : 1;
  return r;
}

MaxRecord scan(const HalfPoly& p) {
  MaxTracker tracker(p.n);
  for (Index i = 0; i < p.coeffs.size(); ++i) tracker.offer(i, p.coeffs[i]);
  return tracker.record();
}

std::vector<Index> all_max_locations(const HalfPoly& p) {
  const MaxRecord r = scan(p);
  const Index deg = degree(p.n);
  std::vector<Index> out;
  for (Index i = 0; i < p.coeffs.size(); ++i) {
    if (mpz_cmpabs(p.coeffs[i].get_mpz_t(), r.max_abs.get_mpz_t()) == 0) {
      out.push_back(i);
      if (2 * i != deg) out.push_back(deg - i);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace qpoch
