#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "cli.hpp"
#include "qpoch/engine.hpp"
#include "qpoch/store.hpp"

using namespace qpoch;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = qpoch::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// One straight run to 1600, shared by the cases below.
struct Workspace {
  fs::path dir;
  Workspace() {
    dir = fs::temp_directory_path() / ("qpoch_cli_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    const auto r = invoke({"compute", "--to", "1600", "--records", s("r1600.csv"), "--checkpoint-dir",
                        s("ck"), "--checkpoint-every", "1000"});
    REQUIRE(r.code == 0);
  }
  ~Workspace() { fs::remove_all(dir); }
  std::string s(const std::string& name) const { return (dir / name).string(); }
};

Workspace& ws() {
  static Workspace w;
  return w;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("compute writes one record per n") {
  auto& w = ws();
  const auto r = invoke({"compute", "--to", "300", "--records", w.s("r300.csv")});
  CHECK(r.code == 0);
  CHECK(r.err.find("steps/s=") != std::string::npos);
  const RecordLog log = read_records(fs::path(w.s("r300.csv")));
  CHECK(log.first_n() == 1);
  CHECK(log.last_n() == 300);
  CHECK(log.find(30)->max_abs == 34);
  CHECK(log.find(33)->first_loc == 270);
  CHECK(fs::exists(w.dir / "ck" / "ckpt_1000"));
  CHECK(fs::exists(w.dir / "ck" / "ckpt_1600"));
}

TEST_CASE("threaded compute is byte-identical") {
  auto& w = ws();
  REQUIRE(invoke({"compute", "--to", "300", "--records", w.s("t1.csv")}).code == 0);
  REQUIRE(invoke({"compute", "--to", "300", "--records", w.s("t8.csv"), "--threads", "8"}).code == 0);
  CHECK(slurp(w.s("t1.csv")) == slurp(w.s("t8.csv")));
}

TEST_CASE("resume from a checkpoint matches a straight run") {
  auto& w = ws();
  const auto straight = lines(slurp(w.s("r1600.csv")));
  // The resumed log starts as a copy that runs past the checkpoint.
  fs::copy_file(w.s("r1600.csv"), w.s("resume.csv"), fs::copy_options::overwrite_existing);
  const auto r = invoke({"compute", "--to", "1200", "--from", w.s("ck/ckpt_1000"), "--records",
                      w.s("resume.csv"), "--checkpoint-dir", w.s("ck2")});
  REQUIRE(r.code == 0);
  const auto resumed = lines(slurp(w.s("resume.csv")));
  REQUIRE(resumed.size() == 1201);
  CHECK(std::equal(resumed.begin(), resumed.end(), straight.begin()));

  HalfPoly p = init_identity();
  while (p.n < 1200) step_in_place(p);
  CHECK(load_checkpoint(w.dir / "ck2" / "ckpt_1200") == p);
}

TEST_CASE("resume rejects a target at or below the checkpoint") {
  auto& w = ws();
  const auto r = invoke({"compute", "--to", "900", "--from", w.s("ck/ckpt_1000")});
  CHECK(r.code == 2);
  CHECK(invoke({"compute", "--to", "10", "--threads", "0"}).code == 2);
}

TEST_CASE("verify") {
  auto& w = ws();
  CHECK(invoke({"verify", w.s("ck/ckpt_1000")}).code == 0);

  auto bytes = slurp(w.s("ck/ckpt_1000"));
  bytes[bytes.size() / 3] ^= 0x01;
  std::ofstream(w.s("flipped"), std::ios::binary) << bytes;
  const auto flipped = invoke({"verify", w.s("flipped")});
  CHECK(flipped.code == 1);
  CHECK(flipped.err.find("checksum") != std::string::npos);

  HalfPoly bad = load_checkpoint(w.dir / "ck" / "ckpt_1000");
  bad.coeffs[40] += 1;
  save_checkpoint(bad, w.dir / "bad_prefix");
  const auto prefix = invoke({"verify", w.s("bad_prefix")});
  CHECK(prefix.code == 1);
  CHECK(prefix.err.find("coefficient 40") != std::string::npos);

  CHECK(invoke({"verify", w.s("missing")}).code == 2);
}

TEST_CASE("analyze is clean and idempotent") {
  auto& w = ws();
  const auto a = invoke({"analyze", "--records", w.s("r1600.csv"), "--out", w.s("a.csv")});
  CHECK(a.code == 0);
  CHECK(a.err.find(" 0 violations") != std::string::npos);
  const auto first = slurp(w.s("a.csv"));
  REQUIRE(invoke({"analyze", "--records", w.s("r1600.csv"), "--out", w.s("a.csv")}).code == 0);
  CHECK(slurp(w.s("a.csv")) == first);
  CHECK(first.rfind("n,two_D,E,E_tilde,flags\n35,", 0) == 0);

  const auto stdout_run = invoke({"analyze", "--records", w.s("r1600.csv")});
  CHECK(stdout_run.out == first);
}

TEST_CASE("analyze reports violations with exit 1") {
  auto& w = ws();
  RecordLog log = read_records(fs::path(w.s("r300.csv")));
  RecordLog broken;
  for (auto r : log.rows()) {
    if (r.n == 100) r.first_loc += 2;
    broken.append(r);
  }
  write_records(fs::path(w.s("broken.csv")), broken);
  const auto r = invoke({"analyze", "--records", w.s("broken.csv")});
  CHECK(r.code == 1);
  CHECK(r.err.find("violation n=100 even_location") != std::string::npos);
}

TEST_CASE("encode") {
  auto& w = ws();
  REQUIRE(invoke({"analyze", "--records", w.s("r1600.csv"), "--out", w.s("a.csv")}).code == 0);
  const auto three = invoke({"encode", "--class", "3", "--analysis", w.s("a.csv"), "--csv", w.s("w3.csv")});
  CHECK(three.code == 0);
  CHECK(three.out.rfind("a^1 b^3 c^4 d^5", 0) == 0);
  const auto csv = lines(slurp(w.s("w3.csv")));
  REQUIRE(csv.size() == 2);
  CHECK(csv[0] == "word_index,class,perturbation_index,letter_counts");
  CHECK(csv[1].rfind("0,3,partial,1;3;4;5", 0) == 0);

  const auto one = invoke({"encode", "--class", "1", "--records", w.s("r1600.csv")});
  CHECK(one.code == 0);
  CHECK(one.out.rfind("a^1 b^4 c^4 d^4 e^4", 0) == 0);

  CHECK(invoke({"encode", "--class", "2", "--records", w.s("r1600.csv")}).code == 2);
  CHECK(invoke({"encode", "--class", "3"}).code == 2);
}

TEST_CASE("predict") {
  auto& w = ws();
  const auto r = invoke({"predict", "--n", "391", "--records", w.s("r1600.csv")});
  CHECK(r.code == 0);
  CHECK(r.out == "n,predicted_L,source,verified\n391,38194,formula,true\n");

  const auto range = invoke({"predict", "--range", "1000", "1003", "--records", w.s("r1600.csv")});
  CHECK(range.code == 0);
  CHECK(lines(range.out).size() == 5);
  CHECK(range.out.find("1000,250250,formula,true") != std::string::npos);

  const auto cv = invoke({"predict", "--cross-validate", "--records", w.s("r1600.csv")});
  CHECK(cv.code == 0);
  CHECK(cv.err.find("seed anomaly: D_34409") != std::string::npos);
  CHECK(cv.err.find(" 0 mismatches") != std::string::npos);

  CHECK(invoke({"predict", "--n", "101"}).code == 2);
  CHECK(invoke({"predict"}).code == 2);
}

TEST_CASE("fit and growth emit JSON") {
  auto& w = ws();
  const auto fit = invoke({"fit", "--records", w.s("r1600.csv"), "--quantity", "ratio", "--start",
                        "1000", "--step", "50", "--count", "9"});
  CHECK(fit.code == 0);
  CHECK(fit.out.find("\"quantity\": \"ratio\"") != std::string::npos);
  CHECK(fit.out.find("\"coefficients\"") != std::string::npos);
  CHECK(fit.out.find("\"precision_digits\": 50") != std::string::npos);
  CHECK(invoke({"fit", "--records", w.s("r1600.csv"), "--quantity", "bogus"}).code == 2);
  CHECK(invoke({"fit", "--records", w.s("r1600.csv"), "--start", "1590", "--step", "50"}).code == 2);

  const auto growth = invoke({"growth", "--records", w.s("r1600.csv")});
  CHECK(growth.code == 0);
  CHECK(growth.out.find("\"K_from_max\": \"0.19") != std::string::npos);
}

TEST_CASE("kotesovec and coeffs") {
  const auto k = invoke({"kotesovec", "--n", "4"});
  CHECK(k.code == 0);
  CHECK(k.out.find("exact=10\n") != std::string::npos);
  CHECK(invoke({"kotesovec", "--n", "65"}).code == 2);

  const auto c = invoke({"coeffs", "--n", "4"});
  CHECK(c.out == "i,a\n0,1\n1,-1\n2,-1\n3,0\n4,0\n5,2\n6,0\n7,0\n8,-1\n9,-1\n10,1\n");
}

TEST_CASE("usage errors") {
  CHECK(invoke({}).code == 2);
  CHECK(invoke({"frobnicate"}).code == 2);
  CHECK(invoke({"compute"}).code == 2);
  CHECK(invoke({"analyze", "--records", "/nonexistent.csv"}).code == 2);
  CHECK(invoke({"--help"}).code == 0);
}

TEST_CASE("executable exit codes") {
  CHECK(std::system((std::string(QPOCH_CLI_PATH) + " verify /nonexistent >/dev/null 2>&1").c_str()) != 0);
  CHECK(std::system((std::string(QPOCH_CLI_PATH) + " coeffs --n 3 >/dev/null").c_str()) == 0);
}
