#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "qpoch/analysis.hpp"
#include "qpoch/asymptotics.hpp"
#include "qpoch/codec.hpp"
#include "qpoch/predictor.hpp"
#include "qpoch/scanner.hpp"
#include "qpoch/store.hpp"

namespace qpoch::cli {

namespace fs = std::filesystem;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string real_str(const Real& x, unsigned digits) {
  return x.str(static_cast<std::streamsize>(digits), std::ios_base::fmtflags(0));
}

RecordLog load_records(const fs::path& path) {
  if (!fs::exists(path)) throw UsageError("records file " + path.string() + " not found");
  return read_records(path);
}

// Records from the log up to and including n; the file is rewritten so a
// resumed run continues it without a gap.
void prepare_records_for_resume(const fs::path& path, Index n) {
  if (!fs::exists(path)) return;
  RecordLog log = read_records(path);
  if (!log.empty() && log.last_n() < n) {
    throw UsageError("records in " + path.string() + " stop at n = " +
                     std::to_string(log.last_n()) + ", before the checkpoint at n = " +
                     std::to_string(n));
  }
  log.truncate_after(n);
  write_records(path, log);
}

// --- compute ---------------------------------------------------------------

int do_compute(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.threads == 0) throw UsageError("--threads must be at least 1");
  if (cfg.checkpoint_every == 0) throw UsageError("--checkpoint-every must be positive");

  HalfPoly start = cfg.resume_from ? load_checkpoint(*cfg.resume_from) : init_identity();
  if (cfg.target_n <= start.n) {
    throw UsageError("--to " + std::to_string(cfg.target_n) + " must exceed the start n = " +
                     std::to_string(start.n));
  }
  if (cfg.records_path) {
    if (cfg.resume_from) {
      prepare_records_for_resume(*cfg.records_path, start.n);
    } else {
      write_records(*cfg.records_path, RecordLog{});
    }
  }
  if (cfg.checkpoint_dir) fs::create_directories(*cfg.checkpoint_dir);

  const Index first = start.n + 1;
  std::vector<MaxRecord> pending;
  auto flush = [&] {
    if (cfg.records_path && !pending.empty()) append_records(*cfg.records_path, pending);
    pending.clear();
  };

  // Serial runs keep one array; threaded runs double-buffer.
  std::optional<HalfPoly> serial;
  std::optional<ParallelStepper> parallel;
  if (cfg.threads > 1) {
    parallel.emplace(std::move(start), cfg.threads);
  } else {
    serial.emplace(std::move(start));
  }
  auto current = [&]() -> const HalfPoly& { return serial ? *serial : parallel->current(); };

  using Clock = std::chrono::steady_clock;
  auto window_start = Clock::now();
  MaxRecord last;
  for (Index n = first; n <= cfg.target_n; ++n) {
    last = serial ? step_and_scan(*serial) : parallel->advance();
    pending.push_back(last);

    if (cfg.progress_every > 0 && n % cfg.progress_every == 0) {
      flush();
      const auto now = Clock::now();
      const double secs = std::chrono::duration<double>(now - window_start).count();
      window_start = now;
      err << "[compute] n=" << n << " M_n digits=" << last.max_abs.get_str().size()
          << " L=" << last.first_loc << " steps/s="
          << (secs > 0 ? static_cast<double>(cfg.progress_every) / secs : 0.0) << '\n';
    }
    if (cfg.checkpoint_dir && (n % cfg.checkpoint_every == 0 || n == cfg.target_n)) {
      flush();
      save_checkpoint(current(), checkpoint_name(*cfg.checkpoint_dir, n));
    }
  }
  flush();
  out << "computed n=" << first << ".." << cfg.target_n << " M_" << cfg.target_n << '='
      << last.max_abs.get_str() << " L=" << last.first_loc << '\n';
  return kOk;
}

// --- verify ----------------------------------------------------------------

int do_verify(const fs::path& path, std::ostream& out, std::ostream& err) {
  try {
    const HalfPoly p = load_checkpoint(path);
    out << "ok: " << path.string() << " n=" << p.n << " entries=" << p.coeffs.size() << '\n';
    return kOk;
  } catch (const StoreError& e) {
    err << "verify failed: " << e.what() << '\n';
    return e.kind() == StoreError::Kind::io ? kUsage : kViolations;
  }
}

// --- analyze ---------------------------------------------------------------

int do_analyze(const fs::path& records_path, const std::optional<fs::path>& out_path,
               std::ostream& out, std::ostream& err) {
  const RecordLog log = load_records(records_path);
  const ValidationReport report = validate(log);
  const auto rows = analysis_rows(log, report);
  if (out_path) {
    std::ofstream f(*out_path);
    if (!f) throw UsageError("cannot write " + out_path->string());
    write_analysis_csv(f, rows);
  } else {
    write_analysis_csv(out, rows);
  }
  for (const auto& v : report.violations) {
    err << "violation n=" << v.n << " " << v.rule << ": " << v.detail << '\n';
  }
  err << "[analyze] checked " << report.checked << " records, " << report.violations.size()
      << " violations\n";
  return report.ok() ? kOk : kViolations;
}

// --- encode ----------------------------------------------------------------

ESeries e_input(const std::optional<fs::path>& analysis, const std::optional<fs::path>& records) {
  if (analysis) {
    std::ifstream f(*analysis);
    if (!f) throw UsageError("cannot open " + analysis->string());
    return e_from_rows(read_analysis_csv(f));
  }
  if (records) return e_series(d_series(load_records(*records)));
  throw UsageError("encode needs --analysis or --records");
}

int do_encode(int klass_number, const std::optional<fs::path>& analysis,
              const std::optional<fs::path>& records, std::optional<std::int64_t> start,
              const std::optional<fs::path>& csv_path, std::ostream& out, std::ostream& err) {
  if (klass_number != 1 && klass_number != 3) throw UsageError("--class must be 1 or 3");
  const auto klass = static_cast<OddClass>(klass_number);
  const ESeries e = e_input(analysis, records);

  std::string letters;
  try {
    letters = tokenize(e, klass, start.value_or(stream_start(klass)));
  } catch (const UnknownLetter& ex) {
    err << ex.what() << '\n';
    return kViolations;
  }

  int status = kOk;
  std::vector<WordRow> words;
  try {
    words = segment_words(letters);
  } catch (const std::invalid_argument& ex) {
    err << ex.what() << '\n';
    return kViolations;
  }

  std::ofstream csv;
  if (csv_path) {
    csv.open(*csv_path);
    if (!csv) throw UsageError("cannot write " + csv_path->string());
    csv << "word_index,class,perturbation_index,letter_counts\n";
  }
  for (std::size_t w = 0; w < words.size(); ++w) {
    const bool partial = (w + 1 == words.size());
    std::string index;
    if (partial) {
      index = "partial";
    } else {
      try {
        const RowClass rc = classify_row(words[w], klass);
        index = rc.outlier() ? "outlier" : std::to_string(rc.index);
      } catch (const UnclassifiedRow& ex) {
        err << ex.what() << '\n';
        index = "unclassified";
        status = kViolations;
      }
    }
    out << words[w].to_string() << (partial ? " ..." : "") << '\n';
    if (csv_path) {
      csv << w << ',' << klass_number << ',' << index << ',';
      for (int k = 0; k < kAlphabetSize; ++k) csv << (k ? ";" : "") << words[w].frequency(k);
      csv << '\n';
    }
  }

  if (!start || *start == stream_start(klass)) {
    const auto expected = expected_letters(klass, stream_start(klass) + kLetterSpan *
                                                      static_cast<std::int64_t>(letters.size()));
    if (expected.compare(0, letters.size(), letters) != 0) {
      err << "[encode] letter stream departs from the periodic model\n";
      status = kViolations;
    }
  }
  err << "[encode] class " << klass_number << ": " << letters.size() << " letters, "
      << words.size() << " words\n";
  return status;
}

// --- predict ---------------------------------------------------------------

int do_predict(const std::vector<std::int64_t>& ns, const std::vector<std::int64_t>& range,
               const std::optional<fs::path>& records_path, bool cross, std::ostream& out,
               std::ostream& err) {
  std::optional<RecordLog> log;
  if (records_path) log = load_records(*records_path);
  const SeedTable seeds = SeedTable::published();
  int status = kOk;

  std::vector<std::int64_t> queries = ns;
  if (range.size() == 2) {
    for (auto n = range[0]; n <= range[1]; ++n) queries.push_back(n);
  }
  if (!queries.empty()) {
    const auto n_max = *std::max_element(queries.begin(), queries.end());
    const LocationPredictor predictor(seeds, PerturbationModel::standard(), n_max);
    bool class_one = false;
    out << "n,predicted_L,source,verified\n";
    for (auto n : queries) {
      Prediction p;
      try {
        p = predictor.predict(n);
      } catch (const std::invalid_argument& ex) {
        throw UsageError(ex.what());
      }
      class_one = class_one || (n % 4 == 1);
      std::string verified = "untested";
      if (log) {
        if (const auto* r = log->find(static_cast<Index>(n))) {
          const bool ok = static_cast<std::int64_t>(r->first_loc) == p.location;
          verified = ok ? "true" : "false";
          if (!ok) status = kViolations;
        }
      }
      out << n << ',' << p.location << ',' << to_string(p.source) << ',' << verified << '\n';
    }
    if (class_one) {
      err << "note: the n = 1 (mod 4) closed form uses period 62624 on both sides; the "
             "left-hand side 5909 + 68324k is read as 5909 + 62624k\n";
    }
  }

  if (cross) {
    if (!log) throw UsageError("--cross-validate needs --records");
    const auto cv = cross_validate(*log, seeds);
    for (const auto& m : cv.mismatches) {
      err << "mismatch n=" << m.n << " predicted=" << m.predicted << " recorded=" << m.recorded
          << " (" << to_string(m.source) << ")\n";
    }
    for (const auto& a : seed_anomalies(seeds)) {
      err << "seed anomaly: D_" << a.n << " = " << format_half(a.table_twice_d)
          << " in the table, model chain gives " << format_half(a.chained_twice_d) << '\n';
    }
    err << "[predict] cross-validated " << cv.checked << " records, " << cv.mismatches.size()
        << " mismatches\n";
    if (!cv.ok()) status = kViolations;
  }
  if (queries.empty() && !cross) throw UsageError("predict needs --n, --range or --cross-validate");
  return status;
}

// --- fit / growth ----------------------------------------------------------

nlohmann::json fit_json(const AsymptoticFit<Real>& fit, unsigned digits) {
  nlohmann::json j;
  j["quantity"] = fit.quantity;
  j["window"] = {{"start", fit.n_start}, {"step", fit.n_step}, {"count", fit.n_count}};
  auto coeffs = nlohmann::json::array();
  for (const auto& c : fit.coefficients) coeffs.push_back(real_str(c, digits));
  j["coefficients"] = coeffs;
  j["residual"] = real_str(fit.residual, 6);
  return j;
}

int do_fit(const fs::path& records_path, const std::string& quantity, std::optional<Index> start,
           std::optional<Index> step, Index count, int terms, std::ostream& out) {
  const RecordLog log = load_records(records_path);
  const unsigned digits = precision_digits();
  ScopedPrecision precision(digits + 10);
  if (log.empty()) throw UsageError("empty records");
  const Index big_n = log.last_n();
  const Index st = step.value_or(std::max<Index>(1, big_n / 16));
  if (!start && big_n < (count - 1) * st + 2) throw UsageError("records too short for the window");
  const Index s0 = start.value_or(big_n - (count - 1) * st);
  AsymptoticFit<Real> fit;
  try {
    fit = fit_quantity(log, parse_quantity(quantity), s0, st, count, terms);
  } catch (const std::exception& ex) {
    throw UsageError(ex.what());
  }
  nlohmann::json j = fit_json(fit, digits);
  j["precision_digits"] = digits;
  out << j.dump(2) << '\n';
  return kOk;
}

int do_growth(const fs::path& records_path, std::ostream& out) {
  const RecordLog log = load_records(records_path);
  const unsigned digits = precision_digits();
  ScopedPrecision precision(digits + 10);
  const GrowthEstimates g = growth_constant(log);
  nlohmann::json j;
  j["n_max"] = g.n_max;
  j["K_from_max"] = real_str(g.k_from_max, digits);
  j["K_from_ratio"] = real_str(g.k_from_ratio, digits);
  j["ratio_at_nmax"] = real_str(g.ratio_at_nmax, digits);
  j["root_at_nmax"] = real_str(g.root_at_nmax, digits);
  j["K_reference"] = kSudlerK;
  if (!g.ratio_fit.coefficients.empty()) j["ratio_fit"] = fit_json(g.ratio_fit, digits);
  out << j.dump(2) << '\n';
  return kOk;
}

// --- kotesovec / coeffs ----------------------------------------------------

int do_kotesovec(Index n, Index panels, std::ostream& out) {
  double estimate = 0;
  try {
    estimate = kotesovec_integral<double>(n, panels);
  } catch (const std::exception& ex) {
    throw UsageError(ex.what());
  }
  HalfPoly p;
  while (p.n < n) step_in_place(p);
  const BigInt exact = sum_of_squares(p);
  const double exact_d = exact.get_d();
  const double gap = std::abs(estimate - exact_d) / exact_d;
  std::ostringstream line;
  line.precision(17);
  line << "n=" << n << '\n'
       << "panels=" << std::max(panels, min_panels(n)) << '\n'
       << "estimate=" << estimate << '\n'
       << "exact=" << exact.get_str() << '\n'
       << "relative_gap=" << gap << '\n';
  out << line.str();
  return gap <= 1e-6 ? kOk : kViolations;
}

int do_coeffs(Index n, std::optional<Index> lo, std::optional<Index> hi, std::ostream& out) {
  HalfPoly p;
  while (p.n < n) step_in_place(p);
  const Index top = hi.value_or(degree(n));
  if (top > degree(n)) throw UsageError("--hi beyond the degree");
  out << "i,a\n";
  for (Index i = lo.value_or(0); i <= top; ++i) out << i << ',' << coefficient(p, i) << '\n';
  return kOk;
}

}  // namespace

fs::path checkpoint_name(const fs::path& dir, Index n) { return dir / ("ckpt_" + std::to_string(n)); }

int cmd_compute(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    return do_compute(cfg, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const StoreError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Coefficients of (1-q)(1-q^2)...(1-q^n) and the location of their maximum"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::optional<std::string> from, ckdir, records_out;
  auto* compute = app.add_subcommand("compute", "Expand step by step and record the maxima");
  compute->add_option("--to", cfg.target_n, "Last n to compute")->required();
  compute->add_option("--records", records_out, "Record log CSV");
  compute->add_option("--from", from, "Resume from a checkpoint file");
  compute->add_option("--checkpoint-dir", ckdir, "Directory for ckpt_<n> files");
  compute->add_option("--checkpoint-every", cfg.checkpoint_every, "Steps between checkpoints")
      ->capture_default_str();
  compute->add_option("--threads", cfg.threads, "Worker threads")->capture_default_str();
  compute->add_option("--progress-every", cfg.progress_every, "Steps between progress lines")
      ->capture_default_str();

  std::string verify_path;
  auto* verify = app.add_subcommand("verify", "Check a checkpoint file");
  verify->add_option("path", verify_path)->required();

  std::string records;
  std::optional<std::string> analysis_out;
  auto* analyze = app.add_subcommand("analyze", "D/E series and conjecture checks");
  analyze->add_option("--records", records)->required();
  analyze->add_option("--out", analysis_out, "Analysis CSV (default stdout)");

  int klass = 0;
  std::optional<std::string> analysis_in, encode_records, words_csv;
  std::optional<std::int64_t> encode_start;
  auto* encode = app.add_subcommand("encode", "Letter/word encoding of an E stream");
  encode->add_option("--class", klass, "1 or 3")->required();
  encode->add_option("--analysis", analysis_in, "Analysis CSV");
  encode->add_option("--records", encode_records, "Record log CSV");
  encode->add_option("--start", encode_start, "First n of the stream");
  encode->add_option("--csv", words_csv, "Word CSV output");

  std::vector<std::int64_t> predict_ns, predict_range;
  std::optional<std::string> predict_records;
  bool cross = false;
  auto* predict = app.add_subcommand("predict", "Predicted location L(n)");
  predict->add_option("--n", predict_ns, "n values");
  predict->add_option("--range", predict_range, "lo hi")->expected(2);
  predict->add_option("--records", predict_records, "Record log for verification");
  predict->add_flag("--cross-validate", cross, "Check every record");

  std::string quantity = "ratio";
  std::optional<Index> fit_start, fit_step;
  Index fit_count = 9;
  int fit_terms = 3;
  auto* fit = app.add_subcommand("fit", "Fit a0 + a1/n + a2/n^2 + ... to ratios or roots");
  fit->add_option("--records", records)->required();
  fit->add_option("--quantity", quantity, "ratio | root | logM_over_n")->capture_default_str();
  fit->add_option("--start", fit_start);
  fit->add_option("--step", fit_step);
  fit->add_option("--count", fit_count)->capture_default_str();
  fit->add_option("--terms", fit_terms)->capture_default_str();

  auto* growth = app.add_subcommand("growth", "Estimates of the growth constant K");
  growth->add_option("--records", records)->required();

  Index kn = 0, panels = 0;
  auto* kotesovec = app.add_subcommand("kotesovec", "Quadrature of prod 4 sin^2 vs Parseval");
  kotesovec->add_option("--n", kn)->required();
  kotesovec->add_option("--panels", panels);

  Index cn = 0;
  std::optional<Index> clo, chi;
  auto* coeffs = app.add_subcommand("coeffs", "Coefficient list i,a_{n,i} (plot data)");
  coeffs->add_option("--n", cn)->required();
  coeffs->add_option("--lo", clo);
  coeffs->add_option("--hi", chi);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*compute) {
      if (records_out) cfg.records_path = *records_out;
      if (from) cfg.resume_from = *from;
      if (ckdir) cfg.checkpoint_dir = *ckdir;
      return do_compute(cfg, out, err);
    }
    if (*verify) return do_verify(verify_path, out, err);
    if (*analyze) {
      std::optional<fs::path> o;
      if (analysis_out) o = *analysis_out;
      return do_analyze(records, o, out, err);
    }
    if (*encode) {
      std::optional<fs::path> a, r, c;
      if (analysis_in) a = *analysis_in;
      if (encode_records) r = *encode_records;
      if (words_csv) c = *words_csv;
      return do_encode(klass, a, r, encode_start, c, out, err);
    }
    if (*predict) {
      std::optional<fs::path> r;
      if (predict_records) r = *predict_records;
      return do_predict(predict_ns, predict_range, r, cross, out, err);
    }
    if (*fit) return do_fit(records, quantity, fit_start, fit_step, fit_count, fit_terms, out);
    if (*growth) return do_growth(records, out);
    if (*kotesovec) return do_kotesovec(kn, panels, out);
    if (*coeffs) return do_coeffs(cn, clo, chi, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const StoreError& e) {
    err << "error: " << e.what() << '\n';
    return e.kind() == StoreError::Kind::io ? kUsage : kViolations;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace qpoch::cli
