#include "qpoch/analysis.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace qpoch {

namespace {

std::int64_t as_signed(Index v) { return static_cast<std::int64_t>(v); }

std::optional<std::int64_t> parse_optional(const std::string& s) {
  if (s.empty()) return std::nullopt;
  std::size_t used = 0;
  const auto v = std::stoll(s, &used);
  if (used != s.size()) throw std::invalid_argument("analysis csv: bad integer '" + s + "'");
  return v;
}

}  // namespace

OddClass odd_class(std::int64_t n) {
  const auto r = ((n % 4) + 4) % 4;
  if (r == 1) return OddClass::one;
  if (r == 3) return OddClass::three;
  throw std::invalid_argument("odd_class: n = " + std::to_string(n) + " is even");
}

std::string format_half(std::int64_t twice) {
  if (twice % 2 == 0) return std::to_string(twice / 2);
  return std::to_string(twice) + "/2";
}

DValue d_value(const MaxRecord& r) {
  if (r.n % 2 == 0 || as_signed(r.n) < kFirstD) {
    throw std::invalid_argument("d_value: D is defined for odd n >= 35, got n = " +
                                std::to_string(r.n));
  }
  // 2 D_n = n(n+1)/2 - 2 L(n)
  return DValue{as_signed(degree(r.n)) - 2 * as_signed(r.first_loc), r.occurrences != 2};
}

DSeries d_series(const RecordLog& records) {
  DSeries d;
  for (const auto& r : records.rows()) {
    if (r.n % 2 == 1 && as_signed(r.n) >= kFirstD) d[as_signed(r.n)] = d_value(r).twice;
  }
  return d;
}

namespace {

// stride 4: (2D_n - 2D_{n-4}) / 2 ; stride 2: 2D_n - 2D_{n-2}
ESeries difference_series(const DSeries& d, std::int64_t stride, bool halve) {
  ESeries out;
  for (const auto& [n, twice] : d) {
    auto prev = d.find(n - stride);
    if (prev == d.end()) continue;
    const auto diff = twice - prev->second;
    out[n] = halve ? diff / 2 : diff;
  }
  return out;
}

}  // namespace

ESeries e_series(const DSeries& d) { return difference_series(d, 4, true); }

ESeries e_tilde_series(const DSeries& d) { return difference_series(d, 2, false); }

std::string ValidationReport::flags_for(Index n) const {
  std::string out;
  for (const auto& v : violations) {
    if (v.n != n) continue;
    if (!out.empty()) out += ';';
    out += v.rule;
  }
  return out;
}

ValidationReport validate(const RecordLog& records) {
  ValidationReport report;
  auto flag = [&](Index n, std::string rule, std::string detail) {
    report.violations.push_back({n, std::move(rule), std::move(detail)});
  };

  for (const auto& r : records.rows()) {
    const auto n = as_signed(r.n);
    if (n % 2 == 0) {
      if (n < kFirstEvenRule) continue;
      ++report.checked;
      if (r.first_loc != half_top(r.n)) {
        flag(r.n, "even_location",
             "L = " + std::to_string(r.first_loc) + ", expected " + std::to_string(half_top(r.n)));
      }
      continue;
    }
    if (n < kFirstD) continue;
    ++report.checked;
    if (r.occurrences != 2) {
      flag(r.n, "multiplicity", "maximum occurs " + std::to_string(r.occurrences) + " times");
    }
    // L < n(n+1)/4 in both classes; the lower copy is +M for n = 1 and -M
    // for n = 3 (mod 4), which puts the positive maximum above the middle.
    const bool lower = 4 * r.first_loc < r.n * (r.n + 1);
    const int want_sign = odd_class(n) == OddClass::one ? 1 : -1;
    if (!lower || r.sign_at_first != want_sign) {
      flag(r.n, "side_sign",
           "L = " + std::to_string(r.first_loc) + " sign " + std::to_string(r.sign_at_first));
    }
    const auto twice = d_value(r).twice;
    const bool half_integral = (twice % 2) != 0;
    if (half_integral != (odd_class(n) == OddClass::one)) {
      flag(r.n, "d_parity", "2D = " + std::to_string(twice));
    }
  }

  const DSeries d = d_series(records);
  for (const auto& [n, twice] : d) {
    auto prev = d.find(n - 4);
    if (prev != d.end() && n >= kFirstE) {
      const auto diff = twice - prev->second;
      if (diff % 2 != 0) {
        flag(n, "e_integral", "2E = " + std::to_string(diff));
      } else {
        const auto e = diff / 2;
        if (e < 0 || e > 2) flag(n, "e_range", "E = " + std::to_string(e));
        else if (n >= kFirstPositiveE && e == 0) flag(n, "e_positive", "E = 0");
      }
    }
    auto prev2 = d.find(n - 2);
    if (prev2 != d.end() && n >= kFirstPositiveE) {
      const auto et = twice - prev2->second;
      if (et != 1 && et != 3) flag(n, "e_tilde", "Et = " + std::to_string(et));
    }
  }

  std::stable_sort(report.violations.begin(), report.violations.end(),
                   [](const Violation& a, const Violation& b) { return a.n < b.n; });
  return report;
}

std::vector<AnalysisRow> analysis_rows(const RecordLog& records, const ValidationReport& report) {
  const DSeries d = d_series(records);
  const ESeries e = e_series(d);
  const ESeries et = e_tilde_series(d);
  std::vector<AnalysisRow> rows;
  for (const auto& [n, twice] : d) {
    AnalysisRow row;
    row.n = n;
    row.two_d = twice;
    if (auto it = e.find(n); it != e.end()) row.e = it->second;
    if (auto it = et.find(n); it != et.end()) row.e_tilde = it->second;
    row.flags = report.flags_for(static_cast<Index>(n));
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_analysis_csv(std::ostream& out, const std::vector<AnalysisRow>& rows) {
  out << "n,two_D,E,E_tilde,flags\n";
  for (const auto& r : rows) {
    out << r.n << ',' << r.two_d << ',';
    if (r.e) out << *r.e;
    out << ',';
    if (r.e_tilde) out << *r.e_tilde;
    out << ',' << r.flags << '\n';
  }
}

std::vector<AnalysisRow> read_analysis_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "n,two_D,E,E_tilde,flags") {
    throw std::invalid_argument("analysis csv: missing header");
  }
  std::vector<AnalysisRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) f.push_back(field);
    while (f.size() < 5) f.emplace_back();
    if (f.size() != 5) throw std::invalid_argument("analysis csv: bad row '" + line + "'");
    AnalysisRow r;
    r.n = parse_optional(f[0]).value_or(0);
    r.two_d = parse_optional(f[1]).value_or(0);
    if (f[0].empty() || f[1].empty()) throw std::invalid_argument("analysis csv: bad row '" + line + "'");
    r.e = parse_optional(f[2]);
    r.e_tilde = parse_optional(f[3]);
    r.flags = f[4];
    rows.push_back(std::move(r));
  }
  return rows;
}

ESeries e_from_rows(const std::vector<AnalysisRow>& rows) {
  ESeries e;
  for (const auto& r : rows) {
    if (r.e) e[r.n] = *r.e;
  }
  return e;
}

}  // namespace qpoch
