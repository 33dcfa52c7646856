#pragma once

#include <vector>

#include "qpoch/engine.hpp"

namespace qpoch {

/// Summary of the largest |a_{n,i}| of one polynomial.
struct MaxRecord {
  Index n = 0;
  BigInt max_abs = 0;
  Index first_loc = 0;    // L(n), lowest exponent reaching max_abs
  Index occurrences = 0;  // over the full polynomial
  int sign_at_first = 1;

  friend bool operator==(const MaxRecord& a, const MaxRecord& b) {
    return a.n == b.n && a.max_abs == b.max_abs && a.first_loc == b.first_loc &&
           a.occurrences == b.occurrences && a.sign_at_first == b.sign_at_first;
  }
};

/// Running maximum over half-array entries of (q;q)_n. Offers may arrive in
/// any order and partial trackers merge deterministically: the largest
/// magnitude wins and ties keep the smallest index.
class MaxTracker {
 public:
  explicit MaxTracker(Index n) : n_(n), degree_(degree(n)) {}

  void offer(Index i, const BigInt& value) { offer(i, value.get_mpz_t()); }
  void offer(Index i, mpz_srcptr value);
  void merge(const MaxTracker& other);

  MaxRecord record() const;

 private:
  Index n_;
  Index degree_;
  BigInt best_ = 0;  // signed value at loc_
  Index loc_ = 0;
  Index hits_ = 0;
  bool seen_ = false;
};

MaxRecord scan(const HalfPoly& p);

/// Every exponent in [0, n(n+1)/2] whose coefficient has magnitude M_n.
std::vector<Index> all_max_locations(const HalfPoly& p);

}  // namespace qpoch
