#pragma once

// Letter/word encoding of the E-sequence of each odd residue class.
//
// A letter is a fixed run of 19 consecutive E values (each 1 or 2) taken at
// n, n+4, ..., n+72, so one letter spans 76 in n. Letters group into words
// that start with 'a'; a word is a^f0 b^f1 ... t^f19 and is identified by its
// frequency vector f = base + perturbation.

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "qpoch/analysis.hpp"

namespace qpoch {

inline constexpr int kAlphabetSize = 20;
inline constexpr int kLetterLength = 19;
inline constexpr std::int64_t kLetterSpan = 4 * kLetterLength;  // 76
inline constexpr int kPeriodRows = 11;

using FrequencyVector = Eigen::Matrix<int, kAlphabetSize, 1>;

struct Letter {
  char symbol;
  std::array<std::uint8_t, kLetterLength> digits;

  int twos() const;
  std::string pattern() const;
};

std::span<const Letter, kAlphabetSize> alphabet();

/// Throws std::out_of_range for symbols outside a..t.
const Letter& letter(char symbol);

/// First n of the tokenised stream: 209 for n = 1 (mod 4), 391 for n = 3.
std::int64_t stream_start(OddClass klass);

class UnknownLetter : public std::runtime_error {
 public:
  UnknownLetter(std::int64_t start_n, std::array<std::int64_t, kLetterLength> window);
  std::int64_t start_n() const noexcept { return start_n_; }
  const std::array<std::int64_t, kLetterLength>& window() const noexcept { return window_; }

 private:
  std::int64_t start_n_;
  std::array<std::int64_t, kLetterLength> window_;
};

/// Maps consecutive 19-grams E_{s}, E_{s+4}, ..., E_{s+72} (s = start,
/// start+76, ...) to letters and returns their symbols. Stops at the first
/// incomplete window. start_n must lie in klass.
std::string tokenize(const ESeries& e, OddClass klass, std::int64_t start_n);
std::string tokenize(const ESeries& e, OddClass klass);

struct WordRow {
  std::vector<std::pair<char, int>> runs;
  FrequencyVector frequency = FrequencyVector::Zero();

  int letter_count() const { return frequency.sum(); }
  /// "a^1 b^3 c^4 ..."
  std::string to_string() const;
};

/// Splits before every 'a' and run-length encodes each word.
/// Throws std::invalid_argument if a non-empty stream does not start with 'a'.
std::vector<WordRow> segment_words(std::string_view letters);

/// Letters of the word with the given frequencies, in alphabet order.
std::string word_letters(const FrequencyVector& frequency);

struct PerturbationModel {
  FrequencyVector base;
  std::array<FrequencyVector, kPeriodRows> u;  // n = 1 (mod 4)
  std::array<FrequencyVector, kPeriodRows> v;  // n = 3 (mod 4)
  FrequencyVector class1_outlier;              // first n = 1 (mod 4) word

  static const PerturbationModel& standard();

  const std::array<FrequencyVector, kPeriodRows>& rows(OddClass klass) const {
    return klass == OddClass::one ? u : v;
  }
  /// Frequency vector of the word at 0-based position `word` of the stream.
  FrequencyVector word_frequency(OddClass klass, std::int64_t word) const;
  /// Letters in one period of the class.
  int period_letters(OddClass klass) const;
  /// Span in n of one period (letters x 76).
  std::int64_t period_span(OddClass klass) const;
  /// Sum of E over one period.
  std::int64_t period_e_sum(OddClass klass) const;
};

/// 1..11 for period rows, 0 for the class-1 outlier.
struct RowClass {
  int index = 0;
  bool outlier() const noexcept { return index == 0; }
};

class UnclassifiedRow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

RowClass classify_row(const WordRow& w, OddClass klass,
                      const PerturbationModel& model = PerturbationModel::standard());

/// Letter symbols the model predicts from the stream start, enough to cover
/// n up to n_hi.
std::string expected_letters(OddClass klass, std::int64_t n_hi,
                             const PerturbationModel& model = PerturbationModel::standard());

/// Predicted E_n for every n = klass (mod 4) in [n_lo, n_hi].
/// Throws std::invalid_argument when n_lo is below the stream start.
ESeries expected_e(OddClass klass, std::int64_t n_lo, std::int64_t n_hi,
                   const PerturbationModel& model = PerturbationModel::standard());

}  // namespace qpoch
