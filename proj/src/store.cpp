#include "qpoch/store.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <boost/crc.hpp>
#include <fcntl.h>
#include <unistd.h>

namespace qpoch {

namespace {

using Crc64Xz = boost::crc_optimal<64, 0x42F0E1EBA9EA3693ULL, 0xFFFFFFFFFFFFFFFFULL,
                                   0xFFFFFFFFFFFFFFFFULL, true, true>;

constexpr char kMagic[4] = {'Q', 'P', 'N', 'B'};

template <typename T>
void put_le(std::vector<std::byte>& out, T value) {
  for (std::size_t k = 0; k < sizeof(T); ++k) {
    out.push_back(static_cast<std::byte>((static_cast<std::uint64_t>(value) >> (8 * k)) & 0xFF));
  }
}

class Reader {
 public:
  explicit Reader(std::span<const std::byte> bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    std::uint64_t v = 0;
    for (std::size_t k = 0; k < sizeof(T); ++k) {
      v |= static_cast<std::uint64_t>(bytes_[pos_ + k]) << (8 * k);
    }
    pos_ += sizeof(T);
    return static_cast<T>(v);
  }

  std::span<const std::byte> take(std::size_t len) {
    need(len);
    auto s = bytes_.subspan(pos_, len);
    pos_ += len;
    return s;
  }

  std::size_t position() const noexcept { return pos_; }

 private:
  void need(std::size_t len) const {
    if (len > bytes_.size() - pos_) {
      throw StoreError(StoreError::Kind::truncated, "checkpoint: unexpected end of payload");
    }
  }

  std::span<const std::byte> bytes_;
  std::size_t pos_ = 0;
};

[[noreturn]] void io_error(const std::string& what) {
  throw StoreError(StoreError::Kind::io, what + ": " + std::strerror(errno));
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

Index parse_index(const std::string& s, const char* what) {
  if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    throw StoreError(StoreError::Kind::malformed, std::string("record: bad ") + what + " '" + s + "'");
  }
  return std::stoull(s);
}

}  // namespace

std::uint64_t crc64(std::span<const std::byte> bytes) {
  Crc64Xz crc;
  crc.process_bytes(bytes.data(), bytes.size());
  return crc.checksum();
}

std::vector<std::byte> encode_checkpoint(const HalfPoly& p) {
  std::vector<std::byte> out;
  for (char c : kMagic) out.push_back(static_cast<std::byte>(c));
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint64_t>(out, p.n);
  put_le<std::uint64_t>(out, p.coeffs.size());

  std::vector<unsigned char> magnitude;
  for (const BigInt& c : p.coeffs) {
    const int sign = sgn(c);
    out.push_back(static_cast<std::byte>(static_cast<std::int8_t>(sign)));
    std::size_t len = 0;
    if (sign != 0) {
      magnitude.resize(mpz_sizeinbase(c.get_mpz_t(), 256));
      mpz_export(magnitude.data(), &len, -1, 1, -1, 0, c.get_mpz_t());
    }
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(len));
    for (std::size_t k = 0; k < len; ++k) out.push_back(static_cast<std::byte>(magnitude[k]));
  }
  put_le<std::uint64_t>(out, crc64(out));
  return out;
}

HalfPoly decode_checkpoint(std::span<const std::byte> bytes) {
  Reader in(bytes);
  auto magic = in.take(4);
  if (std::memcmp(magic.data(), kMagic, 4) != 0) {
    throw StoreError(StoreError::Kind::bad_magic, "checkpoint: bad magic");
  }
  const auto version = in.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw StoreError(StoreError::Kind::version,
                     "checkpoint: unsupported version " + std::to_string(version));
  }
  if (bytes.size() < 8 + in.position()) {
    throw StoreError(StoreError::Kind::truncated, "checkpoint: unexpected end of payload");
  }
  const std::size_t body_end = bytes.size() - 8;
  const auto body = bytes.first(body_end);
  Reader tail(bytes.subspan(body_end));
  if (tail.get<std::uint64_t>() != crc64(body)) {
    throw StoreError(StoreError::Kind::checksum, "checkpoint: checksum mismatch");
  }

  Reader r(body);
  r.take(4);
  r.get<std::uint32_t>();
  HalfPoly p;
  p.n = r.get<std::uint64_t>();
  const auto count = r.get<std::uint64_t>();
  if (count != half_top(p.n) + 1) {
    throw StoreError(StoreError::Kind::malformed,
                     "checkpoint: count " + std::to_string(count) + " does not match n = " +
                         std::to_string(p.n));
  }
  p.coeffs.assign(count, BigInt(0));
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto sign = static_cast<std::int8_t>(r.get<std::uint8_t>());
    const auto len = r.get<std::uint32_t>();
    if (sign < -1 || sign > 1 || (sign == 0) != (len == 0)) {
      throw StoreError(StoreError::Kind::malformed,
                       "checkpoint: bad sign/length at entry " + std::to_string(i));
    }
    auto mag = r.take(len);
    auto* z = p.coeffs[i].get_mpz_t();
    if (len > 0) mpz_import(z, len, -1, 1, -1, 0, mag.data());
    if (sign < 0) mpz_neg(z, z);
  }
  if (r.position() != body.size()) {
    throw StoreError(StoreError::Kind::malformed, "checkpoint: trailing bytes before checksum");
  }
  if (auto bad = first_prefix_violation(p, kPrefixSpotCheck); bad >= 0) {
    throw StoreError(StoreError::Kind::prefix, "checkpoint: coefficient " + std::to_string(bad) +
                                                   " breaks the pentagonal prefix");
  }
  return p;
}

void save_checkpoint(const HalfPoly& p, const std::filesystem::path& path) {
  const auto bytes = encode_checkpoint(p);
  auto tmp = path;
  tmp += ".tmp";

  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  if (fd < 0) io_error("cannot create " + tmp.string());
  std::size_t written = 0;
  while (written < bytes.size()) {
    const auto w = ::write(fd, bytes.data() + written, bytes.size() - written);
    if (w < 0) {
      if (errno == EINTR) continue;
      ::close(fd);
      io_error("write failed for " + tmp.string());
    }
    written += static_cast<std::size_t>(w);
  }
  if (::fsync(fd) != 0) {
    ::close(fd);
    io_error("fsync failed for " + tmp.string());
  }
  if (::close(fd) != 0) io_error("close failed for " + tmp.string());

  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw StoreError(StoreError::Kind::io, "rename to " + path.string() + ": " + ec.message());
}

HalfPoly load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StoreError(StoreError::Kind::io, "cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  std::vector<std::byte> bytes(size);
  if (!in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size))) {
    throw StoreError(StoreError::Kind::io, "cannot read " + path.string());
  }
  return decode_checkpoint(bytes);
}

// --- record logs -----------------------------------------------------------

void RecordLog::append(MaxRecord r) {
  if (!rows_.empty() && r.n != rows_.back().n + 1) {
    throw StoreError(StoreError::Kind::gap, "record log: n = " + std::to_string(r.n) +
                                                " does not follow " + std::to_string(rows_.back().n));
  }
  rows_.push_back(std::move(r));
}

void RecordLog::truncate_after(Index n) {
  while (!rows_.empty() && rows_.back().n > n) rows_.pop_back();
}

const MaxRecord* RecordLog::find(Index n) const noexcept {
  if (rows_.empty() || n < first_n() || n > last_n()) return nullptr;
  return &rows_[n - first_n()];
}

std::string format_record(const MaxRecord& r) {
  return std::to_string(r.n) + ',' + r.max_abs.get_str() + ',' + std::to_string(r.first_loc) +
         ',' + std::to_string(r.occurrences) + ',' + std::to_string(r.sign_at_first);
}

MaxRecord parse_record(const std::string& line) {
  const auto f = split_csv(line);
  if (f.size() != 5) {
    throw StoreError(StoreError::Kind::malformed, "record: expected 5 fields in '" + line + "'");
  }
  MaxRecord r;
  r.n = parse_index(f[0], "n");
  if (f[1].empty() || r.max_abs.set_str(f[1], 10) != 0 || r.max_abs <= 0) {
    throw StoreError(StoreError::Kind::malformed, "record: bad max_abs '" + f[1] + "'");
  }
  r.first_loc = parse_index(f[2], "first_loc");
  r.occurrences = parse_index(f[3], "occurrences");
  if (f[4] == "1") {
    r.sign_at_first = 1;
  } else if (f[4] == "-1") {
    r.sign_at_first = -1;
  } else {
    throw StoreError(StoreError::Kind::malformed, "record: bad sign '" + f[4] + "'");
  }
  return r;
}

void write_records(std::ostream& out, const RecordLog& log) {
  out << kRecordHeader << '\n';
  for (const auto& r : log.rows()) out << format_record(r) << '\n';
}

RecordLog read_records(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kRecordHeader) {
    throw StoreError(StoreError::Kind::malformed, "record log: missing header");
  }
  RecordLog log;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    log.append(parse_record(line));
  }
  return log;
}

void write_records(const std::filesystem::path& path, const RecordLog& log) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw StoreError(StoreError::Kind::io, "cannot write " + path.string());
  write_records(out, log);
  if (!out.flush()) throw StoreError(StoreError::Kind::io, "write failed for " + path.string());
}

RecordLog read_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw StoreError(StoreError::Kind::io, "cannot open " + path.string());
  return read_records(in);
}

std::int64_t last_record_n(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return -1;
  in.seekg(0, std::ios::end);
  const std::streamoff size = in.tellg();
  // Rows are short; scan back far enough to see a whole one.
  std::streamoff back = std::min<std::streamoff>(size, 8192);
  std::string tail;
  for (;;) {
    in.seekg(size - back);
    tail.assign(static_cast<std::size_t>(back), '\0');
    in.read(tail.data(), back);
    const auto trimmed = tail.find_last_not_of("\r\n");
    if (trimmed == std::string::npos) {
      if (back == size) return -1;
    } else {
      const auto start = tail.rfind('\n', trimmed);
      if (start != std::string::npos || back == size) {
        const std::string line =
            tail.substr(start == std::string::npos ? 0 : start + 1,
                        trimmed - (start == std::string::npos ? 0 : start + 1) + 1);
        if (line == kRecordHeader) return -1;
        return static_cast<std::int64_t>(parse_record(line).n);
      }
    }
    if (back == size) return -1;
    back = std::min<std::streamoff>(size, back * 2);
  }
}

void append_records(const std::filesystem::path& path, std::span<const MaxRecord> records) {
  if (records.empty()) return;
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  if (!fresh) {
    const auto last = last_record_n(path);
    if (last >= 0 && records.front().n != static_cast<Index>(last) + 1) {
      throw StoreError(StoreError::Kind::gap, "record log: n = " + std::to_string(records.front().n) +
                                                  " does not follow " + std::to_string(last));
    }
  }
  for (std::size_t k = 1; k < records.size(); ++k) {
    if (records[k].n != records[k - 1].n + 1) {
      throw StoreError(StoreError::Kind::gap, "record log: n = " + std::to_string(records[k].n) +
                                                  " does not follow " + std::to_string(records[k - 1].n));
    }
  }
  std::ofstream out(path, std::ios::app);
  if (!out) throw StoreError(StoreError::Kind::io, "cannot append to " + path.string());
  if (fresh) out << kRecordHeader << '\n';
  for (const auto& r : records) out << format_record(r) << '\n';
  if (!out.flush()) throw StoreError(StoreError::Kind::io, "write failed for " + path.string());
}

}  // namespace qpoch
