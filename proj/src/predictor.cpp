#include "qpoch/predictor.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace qpoch {

namespace {

struct PublishedSeed {
  std::int64_t n;
  double d;
};

// As printed, including D_34409 = 9675.5, which does not chain from its
// neighbours; seed_anomalies() reports it.
constexpr PublishedSeed kPublished[] = {
    {5909, 1867.5},   {11609, 3668.5},  {17309, 5469.5},  {23009, 7270.5},
    {28709, 9071.5},  {34409, 9675.5},  {40109, 12673.5}, {45809, 14474.5},
    {51509, 16275.5}, {57209, 18076.5}, {62833, 19853.5},
    {391, 124},       {6091, 1925},     {11791, 3726},    {17491, 5527},
    {23191, 7328},    {28891, 9129},    {34591, 10930},   {40215, 12707},
    {45915, 14508},   {51615, 16309},   {57315, 18110},
};

std::int64_t twice_degree(std::int64_t n) { return n * (n + 1) / 2; }

// Running sums of E per class so range sums are O(log n).
std::map<std::int64_t, std::int64_t> prefix_sums(const ESeries& e) {
  std::map<std::int64_t, std::int64_t> out;
  std::int64_t acc = 0;
  for (const auto& [n, v] : e) out[n] = (acc += v);
  return out;
}

std::int64_t cumulative_at(const std::map<std::int64_t, std::int64_t>& cum, std::int64_t n) {
  auto it = cum.upper_bound(n);
  if (it == cum.begin()) return 0;
  return std::prev(it)->second;
}

}  // namespace

SeedTable SeedTable::published() {
  SeedTable t;
  for (const auto& s : kPublished) t.insert(s.n, std::llround(2 * s.d));
  return t;
}

std::map<std::int64_t, std::int64_t> SeedTable::of_class(OddClass klass) const {
  std::map<std::int64_t, std::int64_t> out;
  for (const auto& [n, twice] : seeds_) {
    if (n % 2 != 0 && odd_class(n) == klass) out.emplace(n, twice);
  }
  return out;
}

std::int64_t predict_even(std::int64_t n) {
  if (n % 2 != 0 || n < kFirstEvenRule) {
    throw std::invalid_argument("predict_even: needs even n >= 34, got " + std::to_string(n));
  }
  return n * (n + 1) / 4;
}

LocationPredictor::LocationPredictor(SeedTable seeds, const PerturbationModel& model,
                                     std::int64_t n_max)
    : seeds_(std::move(seeds)), n_max_(n_max) {
  for (const auto& [n, twice] : seeds_.entries()) n_max_ = std::max(n_max_, n);
  for (auto klass : {OddClass::one, OddClass::three}) {
    expected_[klass] = prefix_sums(expected_e(klass, stream_start(klass), n_max_, model));
  }
}

Prediction LocationPredictor::predict(std::int64_t n) const {
  if (n % 2 == 0) return Prediction{n, predict_even(n), 0, PredictionSource::formula};

  const OddClass klass = odd_class(n);
  const auto seeds = seeds_.of_class(klass);
  if (seeds.empty()) throw std::invalid_argument("predict_odd: no seed for the residue class");

  Prediction p;
  p.n = n;
  if (auto hit = seeds.find(n); hit != seeds.end()) {
    p.twice_d = hit->second;
    p.source = PredictionSource::formula;
  } else {
    if (n < stream_start(klass) || n > n_max_) {
      throw std::invalid_argument("predict_odd: n = " + std::to_string(n) +
                                  " is outside the model range");
    }
    auto above = seeds.upper_bound(n);
    const auto& [m, twice_m] = (above == seeds.begin()) ? *above : *std::prev(above);
    const auto& cum = expected_.at(klass);
    // D_n - D_m = sum of E over (m, n], signed by direction
    const auto delta = cumulative_at(cum, n) - cumulative_at(cum, m);
    p.twice_d = twice_m + 2 * delta;
    p.source = PredictionSource::model;
  }
  const auto twice_l = twice_degree(n) - p.twice_d;
  if (twice_l % 2 != 0) {
    throw std::logic_error("predict_odd: non-integral location for n = " + std::to_string(n));
  }
  p.location = twice_l / 2;
  return p;
}

std::int64_t predict_odd(std::int64_t n, const SeedTable& seeds, const PerturbationModel& model) {
  if (n % 2 == 0) throw std::invalid_argument("predict_odd: n must be odd");
  return LocationPredictor(seeds, model, n).predict(n).location;
}

std::int64_t word_start_offset(std::int64_t k, std::int64_t r, OddClass klass) {
  if (r < 0 || r > 10 || k < 0) {
    throw std::out_of_range("word_start_offset: need k >= 0 and 0 <= r <= 10");
  }
  // The r = 11 correction never fires in range; kept to match the formula.
  const bool short_before =
      klass == OddClass::one ? (r == 11) : (r >= 7);
  return kWordStride * r + kPeriod * k - (short_before ? kShortWordCorrection : 0);
}

CrossValidation cross_validate(const RecordLog& records, const SeedTable& seeds,
                               const PerturbationModel& model) {
  CrossValidation out;
  if (records.empty()) return out;
  const LocationPredictor predictor(seeds, model, static_cast<std::int64_t>(records.last_n()));
  for (const auto& r : records.rows()) {
    const auto n = static_cast<std::int64_t>(r.n);
    Prediction p;
    try {
      p = predictor.predict(n);
    } catch (const std::invalid_argument&) {
      continue;
    }
    ++out.checked;
    if (p.location != static_cast<std::int64_t>(r.first_loc)) {
      out.mismatches.push_back({n, p.location, static_cast<std::int64_t>(r.first_loc), p.source});
    }
  }
  return out;
}

std::vector<SeedAnomaly> seed_anomalies(const SeedTable& seeds, const PerturbationModel& model) {
  std::vector<SeedAnomaly> out;
  for (auto klass : {OddClass::one, OddClass::three}) {
    const auto table = seeds.of_class(klass);
    if (table.size() < 2) continue;
    const auto cum = prefix_sums(expected_e(klass, stream_start(klass), table.rbegin()->first, model));
    const auto& [m, twice_m] = *table.begin();
    for (auto it = std::next(table.begin()); it != table.end(); ++it) {
      const auto& [n, twice_n] = *it;
      const auto chained = twice_m + 2 * (cumulative_at(cum, n) - cumulative_at(cum, m));
      if (chained != twice_n) out.push_back({n, twice_n, chained});
    }
  }
  return out;
}

std::string to_string(PredictionSource s) {
  return s == PredictionSource::formula ? "formula" : "model";
}

}  // namespace qpoch
