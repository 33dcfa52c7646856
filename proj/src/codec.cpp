#include "qpoch/codec.hpp"

#include <algorithm>
#include <initializer_list>

namespace qpoch {

namespace {

constexpr std::array<std::string_view, kAlphabetSize> kPatterns = {
    "2112111211121112112",  // a
    "1112111211121112112",  // b
    "1112111211121121112",  // c
    "1112111211211121112",  // d
    "1112112111211121112",  // e
    "1121112111211121112",  // f
    "1121112111211121121",  // g
    "1121112111211211121",  // h
    "1121112112111211121",  // i
    "1121121112111211121",  // j
    "1211121112111211121",  // k
    "1211121112111211211",  // l
    "1211121112112111211",  // m
    "1211121121112111211",  // n
    "1211211121112111211",  // o
    "2111211121112111211",  // p
    "2111211121112112111",  // q
    "2111211121121112111",  // r
    "2111211211121112111",  // s
    "2112111211121112111",  // t
};

std::array<Letter, kAlphabetSize> build_alphabet() {
  std::array<Letter, kAlphabetSize> out{};
  for (int k = 0; k < kAlphabetSize; ++k) {
    out[k].symbol = static_cast<char>('a' + k);
    for (int j = 0; j < kLetterLength; ++j) {
      out[k].digits[j] = static_cast<std::uint8_t>(kPatterns[k][j] - '0');
    }
  }
  return out;
}

FrequencyVector unit_sum(std::initializer_list<int> positions) {
  FrequencyVector v = FrequencyVector::Zero();
  for (int p : positions) v(p) = 1;
  return v;
}

PerturbationModel build_model() {
  PerturbationModel m;
  m.base << 1, 3, 4, 4, 4, 3, 4, 4, 4, 4, 3, 4, 4, 4, 4, 3, 4, 4, 4, 3;
  // Positions of the 1's, 0 = a ... 19 = t.
  m.u = {unit_sum({1, 8, 14}),  unit_sum({2, 8, 15}),  unit_sum({2, 9, 15}),
         unit_sum({3, 9, 16}),  unit_sum({3, 10, 17}), unit_sum({4, 11, 17}),
         unit_sum({5, 11, 18}), unit_sum({5, 12, 18}), unit_sum({6, 12, 19}),
         unit_sum({6, 13, 19}), unit_sum({7, 13})};
  m.v = {unit_sum({3, 10, 16}), unit_sum({4, 10, 17}), unit_sum({4, 11, 18}),
         unit_sum({5, 12, 18}), unit_sum({6, 12, 19}), unit_sum({6, 13, 19}),
         unit_sum({7, 13}),     unit_sum({1, 7, 14}),  unit_sum({1, 8, 15}),
         unit_sum({2, 9, 15}),  unit_sum({3, 9, 16})};
  m.class1_outlier = m.base + unit_sum({1, 7, 14});
  return m;
}

std::int64_t floor_mod(std::int64_t a, std::int64_t m) { return ((a % m) + m) % m; }

}  // namespace

int Letter::twos() const {
  return static_cast<int>(std::count(digits.begin(), digits.end(), 2));
}

std::string Letter::pattern() const {
  std::string s;
  for (auto d : digits) s.push_back(static_cast<char>('0' + d));
  return s;
}

std::span<const Letter, kAlphabetSize> alphabet() {
  static const auto table = build_alphabet();
  return table;
}

const Letter& letter(char symbol) {
  if (symbol < 'a' || symbol >= 'a' + kAlphabetSize) {
    throw std::out_of_range(std::string("letter: no letter '") + symbol + "'");
  }
  return alphabet()[symbol - 'a'];
}

std::int64_t stream_start(OddClass klass) { return klass == OddClass::one ? 209 : 391; }

UnknownLetter::UnknownLetter(std::int64_t start_n, std::array<std::int64_t, kLetterLength> window)
    : std::runtime_error([&] {
        std::string w;
        for (auto v : window) w += std::to_string(v);
        return "tokenize: window " + w + " starting at n = " + std::to_string(start_n) +
               " is not a letter";
      }()),
      start_n_(start_n),
      window_(window) {}

std::string tokenize(const ESeries& e, OddClass klass, std::int64_t start_n) {
  if (odd_class(start_n) != klass) {
    throw std::invalid_argument("tokenize: start n = " + std::to_string(start_n) +
                                " is not in the requested residue class");
  }
  std::string out;
  for (std::int64_t s = start_n;; s += kLetterSpan) {
    std::array<std::int64_t, kLetterLength> window{};
    for (int j = 0; j < kLetterLength; ++j) {
      auto it = e.find(s + 4 * j);
      if (it == e.end()) return out;
      window[j] = it->second;
    }
    const auto letters = alphabet();
    auto hit = std::find_if(letters.begin(), letters.end(), [&](const Letter& l) {
      return std::equal(window.begin(), window.end(), l.digits.begin(),
                        [](std::int64_t a, std::uint8_t b) { return a == b; });
    });
    if (hit == letters.end()) throw UnknownLetter(s, window);
    out.push_back(hit->symbol);
  }
}

std::string tokenize(const ESeries& e, OddClass klass) {
  return tokenize(e, klass, stream_start(klass));
}

std::string WordRow::to_string() const {
  std::string s;
  for (const auto& [symbol, count] : runs) {
    if (!s.empty()) s += ' ';
    s += symbol;
    s += '^';
    s += std::to_string(count);
  }
  return s;
}

std::vector<WordRow> segment_words(std::string_view letters) {
  std::vector<WordRow> words;
  if (letters.empty()) return words;
  if (letters.front() != 'a') {
    throw std::invalid_argument("segment_words: stream must start with 'a'");
  }
  for (char c : letters) {
    if (c == 'a') words.emplace_back();
    auto& w = words.back();
    if (!w.runs.empty() && w.runs.back().first == c) {
      ++w.runs.back().second;
    } else {
      w.runs.emplace_back(c, 1);
    }
    ++w.frequency(letter(c).symbol - 'a');
  }
  return words;
}

std::string word_letters(const FrequencyVector& frequency) {
  std::string s;
  for (int k = 0; k < kAlphabetSize; ++k) s.append(frequency(k), static_cast<char>('a' + k));
  return s;
}

const PerturbationModel& PerturbationModel::standard() {
  static const PerturbationModel model = build_model();
  return model;
}

FrequencyVector PerturbationModel::word_frequency(OddClass klass, std::int64_t word) const {
  if (klass == OddClass::one) {
    if (word == 0) return class1_outlier;
    return base + u[floor_mod(word - 1, kPeriodRows)];
  }
  return base + v[floor_mod(word, kPeriodRows)];
}

int PerturbationModel::period_letters(OddClass klass) const {
  int total = 0;
  for (const auto& p : rows(klass)) total += (base + p).sum();
  return total;
}

std::int64_t PerturbationModel::period_span(OddClass klass) const {
  return static_cast<std::int64_t>(period_letters(klass)) * kLetterSpan;
}

std::int64_t PerturbationModel::period_e_sum(OddClass klass) const {
  std::int64_t total = 0;
  for (const auto& p : rows(klass)) {
    for (char c : word_letters(base + p)) {
      const auto& l = letter(c);
      total += kLetterLength + l.twos();  // digits are 1 or 2
    }
  }
  return total;
}

RowClass classify_row(const WordRow& w, OddClass klass, const PerturbationModel& model) {
  if (klass == OddClass::one && w.frequency == model.class1_outlier) return RowClass{0};
  const auto& rows = model.rows(klass);
  for (int j = 0; j < kPeriodRows; ++j) {
    if (w.frequency == model.base + rows[j]) return RowClass{j + 1};
  }
  throw UnclassifiedRow("classify_row: word " + w.to_string() + " matches no perturbation vector");
}

std::string expected_letters(OddClass klass, std::int64_t n_hi, const PerturbationModel& model) {
  const auto start = stream_start(klass);
  std::string out;
  for (std::int64_t word = 0; start + kLetterSpan * static_cast<std::int64_t>(out.size()) <= n_hi;
       ++word) {
    out += word_letters(model.word_frequency(klass, word));
  }
  return out;
}

ESeries expected_e(OddClass klass, std::int64_t n_lo, std::int64_t n_hi,
                   const PerturbationModel& model) {
  const auto start = stream_start(klass);
  if (n_lo < start) {
    throw std::invalid_argument("expected_e: n = " + std::to_string(n_lo) +
                                " is below the stream start " + std::to_string(start));
  }
  ESeries out;
  if (n_hi < n_lo) return out;
  const std::string letters = expected_letters(klass, n_hi, model);
  for (std::size_t k = 0; k < letters.size(); ++k) {
    const auto& l = letter(letters[k]);
    const auto base_n = start + kLetterSpan * static_cast<std::int64_t>(k);
    for (int j = 0; j < kLetterLength; ++j) {
      const auto n = base_n + 4 * j;
      if (n >= n_lo && n <= n_hi) out[n] = l.digits[j];
    }
  }
  return out;
}

}  // namespace qpoch
