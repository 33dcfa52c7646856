#include "qpoch/asymptotics.hpp"

#include <cstdlib>

namespace qpoch {

namespace {

const MaxRecord& require(const RecordLog& records, Index n) {
  const MaxRecord* r = records.find(n);
  if (r == nullptr) throw std::out_of_range("no record for n = " + std::to_string(n));
  return *r;
}

Real sample(const RecordLog& records, Quantity q, Index n) {
  switch (q) {
    case Quantity::ratio:
      return successive_ratio(records, n);
    case Quantity::root:
      return nth_root(records, n);
    case Quantity::log_max_over_n:
      return Real(log(to_real(require(records, n).max_abs))) / Real(n);
  }
  throw std::logic_error("unknown quantity");
}

}  // namespace

unsigned precision_digits() {
  if (const char* env = std::getenv("QPOCH_PRECISION")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 10 && v <= 10000) return static_cast<unsigned>(v);
  }
  return kDefaultDigits;
}

ScopedPrecision::ScopedPrecision(unsigned digits) : saved_(Real::default_precision()) {
  Real::default_precision(digits);
}

ScopedPrecision::~ScopedPrecision() { Real::default_precision(saved_); }

Real to_real(const BigInt& value) {
  Real out;
  mpfr_set_z(out.backend().data(), value.get_mpz_t(), MPFR_RNDN);
  return out;
}

Real successive_ratio(const RecordLog& records, Index n) {
  if (n == 0) throw std::out_of_range("successive_ratio: needs n >= 1");
  const auto& cur = require(records, n);
  const auto& prev = require(records, n - 1);
  return Real(to_real(cur.max_abs) / to_real(prev.max_abs));
}

Real nth_root(const RecordLog& records, Index n) {
  if (n == 0) throw std::out_of_range("nth_root: needs n >= 1");
  const auto& r = require(records, n);
  return Real(exp(log(to_real(r.max_abs)) / Real(n)));
}

std::string to_string(Quantity q) {
  switch (q) {
    case Quantity::ratio:
      return "ratio";
    case Quantity::root:
      return "root";
    case Quantity::log_max_over_n:
      return "logM_over_n";
  }
  return "?";
}

Quantity parse_quantity(const std::string& s) {
  if (s == "ratio") return Quantity::ratio;
  if (s == "root") return Quantity::root;
  if (s == "logM_over_n") return Quantity::log_max_over_n;
  throw std::invalid_argument("unknown quantity '" + s + "'");
}

AsymptoticFit<Real> fit_quantity(const RecordLog& records, Quantity q, Index start, Index step,
                                 Index count, int terms) {
  if (step == 0) throw std::invalid_argument("fit_quantity: step must be positive");
  std::vector<std::pair<Real, Real>> samples;
  for (Index k = 0; k < count; ++k) {
    const Index n = start + k * step;
    samples.emplace_back(Real(n), sample(records, q, n));
  }
  auto fit = fit_series<Real>(samples, terms);
  fit.quantity = to_string(q);
  fit.n_start = start;
  fit.n_step = step;
  return fit;
}

GrowthEstimates growth_constant(const RecordLog& records) {
  if (records.empty() || records.last_n() < 2) {
    throw std::invalid_argument("growth_constant: needs records up to at least n = 2");
  }
  GrowthEstimates g;
  const Index big_n = records.last_n();
  g.n_max = big_n;
  g.k_from_max = log(to_real(require(records, big_n).max_abs)) / Real(big_n);
  g.ratio_at_nmax = successive_ratio(records, big_n);
  g.root_at_nmax = nth_root(records, big_n);

  // Nine ratio samples over the upper half of the log, three terms.
  constexpr Index kSamples = 9;
  const Index step = big_n / 16;
  if (step > 0 && big_n - (kSamples - 1) * step > records.first_n()) {
    g.ratio_fit = fit_quantity(records, Quantity::ratio, big_n - (kSamples - 1) * step, step,
                               kSamples, 3);
    g.k_from_ratio = log(g.ratio_fit.limit());
  } else {
    g.k_from_ratio = log(g.ratio_at_nmax);
  }
  return g;
}

}  // namespace qpoch
