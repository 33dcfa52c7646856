#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qpoch/engine.hpp"

namespace qpoch::cli {

enum ExitCode : int { kOk = 0, kViolations = 1, kUsage = 2 };

struct RunConfig {
  Index target_n = 0;
  std::optional<std::filesystem::path> checkpoint_dir;
  Index checkpoint_every = 1000;
  std::optional<std::filesystem::path> records_path;
  unsigned threads = 1;
  std::optional<std::filesystem::path> resume_from;
  Index progress_every = 100;
};

std::filesystem::path checkpoint_name(const std::filesystem::path& dir, Index n);

int cmd_compute(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Entry point shared by the executable and the tests; args exclude argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qpoch::cli
