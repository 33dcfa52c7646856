#pragma once

// Location offsets of the maximum for odd n.
//
//   D_n = n(n+1)/4 - L(n)        (half-integral when n = 1 mod 4)
//   E_n = D_n - D_{n-4}
//   Et_n = 2 (D_n - D_{n-2})
//
// D is kept doubled so every quantity here is an exact integer.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qpoch/scanner.hpp"
#include "qpoch/store.hpp"

namespace qpoch {

enum class OddClass : int { one = 1, three = 3 };

/// Residue class of an odd n modulo 4. Throws std::invalid_argument for even n.
OddClass odd_class(std::int64_t n);

/// n -> 2 D_n
using DSeries = std::map<std::int64_t, std::int64_t>;
/// n -> E_n (or Et_n)
using ESeries = std::map<std::int64_t, std::int64_t>;

inline constexpr std::int64_t kFirstD = 35;
inline constexpr std::int64_t kFirstE = 39;
inline constexpr std::int64_t kFirstPositiveE = 61;
inline constexpr std::int64_t kFirstEvenRule = 34;

/// "124" or "3735/2".
std::string format_half(std::int64_t twice);

struct DValue {
  std::int64_t twice = 0;
  bool irregular_multiplicity = false;  // occurrences != 2
};

/// Throws std::invalid_argument for even n or n < 35.
DValue d_value(const MaxRecord& r);

DSeries d_series(const RecordLog& records);

/// E_n for every odd n whose D_{n-4} is present.
ESeries e_series(const DSeries& d);

/// Et_n for every odd n whose D_{n-2} is present.
ESeries e_tilde_series(const DSeries& d);

struct Violation {
  Index n = 0;
  std::string rule;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;
  std::size_t checked = 0;

  bool ok() const noexcept { return violations.empty(); }
  /// Rule names for one n, ';'-joined; empty when clean.
  std::string flags_for(Index n) const;
};

/// Checks the even-n location rule, the odd-n side/sign/multiplicity rule,
/// the D parity rule, E_n in {0,1,2}, E_n > 0 and Et_n in {1,3}.
ValidationReport validate(const RecordLog& records);

/// Rows of the analysis CSV (n,two_D,E,E_tilde,flags).
struct AnalysisRow {
  std::int64_t n = 0;
  std::int64_t two_d = 0;
  std::optional<std::int64_t> e;
  std::optional<std::int64_t> e_tilde;
  std::string flags;
};

std::vector<AnalysisRow> analysis_rows(const RecordLog& records, const ValidationReport& report);
void write_analysis_csv(std::ostream& out, const std::vector<AnalysisRow>& rows);
std::vector<AnalysisRow> read_analysis_csv(std::istream& in);

/// E column of the analysis rows, both residue classes.
ESeries e_from_rows(const std::vector<AnalysisRow>& rows);

}  // namespace qpoch
