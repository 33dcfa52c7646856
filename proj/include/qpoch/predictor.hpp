#pragma once

// Location of the maximum coefficient without expanding the polynomial.
//
// Even n >= 34: L(n) = floor(n(n+1)/4).
// Odd n: L(n) = n(n+1)/4 - D_n, where D_n is carried from a seed D_m of the
// same residue class by summing the model's E values between m and n.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qpoch/analysis.hpp"
#include "qpoch/codec.hpp"
#include "qpoch/store.hpp"

namespace qpoch {

inline constexpr std::int64_t kWordStride = 5700;       // 75 letters x 76
inline constexpr std::int64_t kPeriod = 62624;
inline constexpr std::int64_t kPeriodESum = 19787;
inline constexpr std::int64_t kShortWordCorrection = 76;

/// n -> 2 D_n, per residue class.
class SeedTable {
 public:
  /// The published seed values D_n (halves as printed), doubled on load.
  static SeedTable published();

  void insert(std::int64_t n, std::int64_t twice_d) { seeds_[n] = twice_d; }
  const std::map<std::int64_t, std::int64_t>& entries() const noexcept { return seeds_; }
  /// Seeds of one residue class.
  std::map<std::int64_t, std::int64_t> of_class(OddClass klass) const;

 private:
  std::map<std::int64_t, std::int64_t> seeds_;
};

/// Throws std::invalid_argument for odd n or n < 34.
std::int64_t predict_even(std::int64_t n);

enum class PredictionSource { formula, model };

struct Prediction {
  std::int64_t n = 0;
  std::int64_t location = 0;
  std::int64_t twice_d = 0;  // odd n only
  PredictionSource source = PredictionSource::formula;
};

/// Predicts odd L(n) from the nearest same-class seed at or below n, or the
/// nearest one above when none is below, chaining E values from the model.
/// Reusable across many queries; E values are synthesised once per class.
class LocationPredictor {
 public:
  LocationPredictor(SeedTable seeds, const PerturbationModel& model, std::int64_t n_max);

  /// The range runs to n_max or the largest seed, whichever is higher.
  /// Throws std::invalid_argument below the stream start or past the range.
  Prediction predict(std::int64_t n) const;

 private:
  SeedTable seeds_;
  std::int64_t n_max_;
  std::map<OddClass, ESeries> expected_;
};

std::int64_t predict_odd(std::int64_t n, const SeedTable& seeds,
                         const PerturbationModel& model = PerturbationModel::standard());

/// Offset from the class base (5909 or 391) to the start of word r of
/// period k: 5700 r + 62624 k - 76 [r = 11] for n = 1 (mod 4) and
/// 5700 r + 62624 k - 76 [r >= 7] for n = 3 (mod 4).
/// Throws std::out_of_range unless 0 <= r <= 10 and k >= 0.
std::int64_t word_start_offset(std::int64_t k, std::int64_t r, OddClass klass);

struct Mismatch {
  std::int64_t n = 0;
  std::int64_t predicted = 0;
  std::int64_t recorded = 0;
  PredictionSource source = PredictionSource::formula;
};

struct CrossValidation {
  std::size_t checked = 0;
  std::vector<Mismatch> mismatches;
  bool ok() const noexcept { return mismatches.empty(); }
};

/// Compares every predictable n of the log against its recorded L(n).
CrossValidation cross_validate(const RecordLog& records, const SeedTable& seeds,
                               const PerturbationModel& model = PerturbationModel::standard());

struct SeedAnomaly {
  std::int64_t n = 0;
  std::int64_t table_twice_d = 0;
  std::int64_t chained_twice_d = 0;  // from the first seed of the class
};

/// Seeds that disagree with the value chained through the model from the
/// smallest seed of their class.
std::vector<SeedAnomaly> seed_anomalies(const SeedTable& seeds,
                                        const PerturbationModel& model = PerturbationModel::standard());

std::string to_string(PredictionSource s);

}  // namespace qpoch
