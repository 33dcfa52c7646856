#pragma once

// Checkpoint files and record logs.
//
// Checkpoint layout, all integers little-endian:
//   "QPNB" | u32 version | u64 n | u64 count
//   count x ( i8 sign | u32 byte_len | byte_len magnitude bytes, LSB first )
//   u64 CRC-64/XZ over every preceding byte
//
// Record log: CSV with header n,max_abs,first_loc,occurrences,sign.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qpoch/engine.hpp"
#include "qpoch/scanner.hpp"

namespace qpoch {

inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr Index kPrefixSpotCheck = 10000;

class StoreError : public std::runtime_error {
 public:
  enum class Kind { io, bad_magic, version, truncated, checksum, prefix, malformed, gap };

  StoreError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

std::uint64_t crc64(std::span<const std::byte> bytes);

std::vector<std::byte> encode_checkpoint(const HalfPoly& p);
HalfPoly decode_checkpoint(std::span<const std::byte> bytes);

/// Writes to a sibling temporary, fsyncs, then renames over `path`.
void save_checkpoint(const HalfPoly& p, const std::filesystem::path& path);
HalfPoly load_checkpoint(const std::filesystem::path& path);

/// Contiguous, strictly increasing run of MaxRecords.
class RecordLog {
 public:
  RecordLog() = default;

  /// Throws StoreError(gap) unless r.n == last_n() + 1 (any n when empty).
  void append(MaxRecord r);
  void truncate_after(Index n);

  bool empty() const noexcept { return rows_.empty(); }
  std::size_t size() const noexcept { return rows_.size(); }
  Index first_n() const { return rows_.front().n; }
  Index last_n() const { return rows_.back().n; }

  /// nullptr when n is outside the log.
  const MaxRecord* find(Index n) const noexcept;
  const std::vector<MaxRecord>& rows() const noexcept { return rows_; }

  friend bool operator==(const RecordLog&, const RecordLog&) = default;

 private:
  std::vector<MaxRecord> rows_;
};

inline constexpr const char* kRecordHeader = "n,max_abs,first_loc,occurrences,sign";

std::string format_record(const MaxRecord& r);
MaxRecord parse_record(const std::string& line);

void write_records(std::ostream& out, const RecordLog& log);
RecordLog read_records(std::istream& in);

void write_records(const std::filesystem::path& path, const RecordLog& log);
RecordLog read_records(const std::filesystem::path& path);

/// Appends rows to a CSV log on disk, creating it with a header if needed.
/// The first new row must continue the file's last n.
void append_records(const std::filesystem::path& path, std::span<const MaxRecord> records);

/// Last n recorded in a CSV log, or -1 when the file is missing or has no rows.
std::int64_t last_record_n(const std::filesystem::path& path);

}  // namespace qpoch
