#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nllt/fourier.hpp"
#include "nllt/io.hpp"
#include "nllt/simulate.hpp"

namespace nllt {

/// Report JSON plus the CSV files a command produced (file name -> contents).
struct CommandResult {
  nlohmann::json report;
  std::map<std::string, std::string> files;
};

struct AnalyzeOptions {
  int max_lag = 20;
};

struct SimulateOptions {
  std::optional<std::size_t> horizon;
  std::optional<std::size_t> samples;
  std::optional<std::uint64_t> seed;
  unsigned workers = 1;
  /// Reference variance for the KS statistic; var(S_N)/N of the batch when unset.
  std::optional<double> sigma2;
};

struct LltOptions {
  std::optional<std::size_t> horizon;
  std::optional<std::size_t> samples;
  std::optional<std::uint64_t> seed;
  unsigned workers = 1;
  std::optional<double> sigma2;
  double half_width = 0.5;
};

struct CfScanOptions {
  std::optional<std::vector<double>> theta_grid;
  std::optional<std::vector<std::size_t>> n_grid;
  CfMode mode = CfMode::Exact;
  std::optional<std::size_t> samples;
  std::optional<std::uint64_t> seed;
  unsigned workers = 1;
  std::optional<int> block_length;
  FitWindows windows;
};

inline constexpr std::size_t kDefaultHorizon = 256;
inline constexpr std::size_t kDefaultSamples = 100'000;
inline constexpr std::uint64_t kDefaultSeed = 1;

CommandResult cmd_analyze(const InstanceFile& instance, const AnalyzeOptions& options = {});
CommandResult cmd_simulate(const InstanceFile& instance, const SimulateOptions& options = {});
CommandResult cmd_llt(const InstanceFile& instance, const LltOptions& options = {});
CommandResult cmd_cf_scan(const InstanceFile& instance, const CfScanOptions& options = {});

/// Writes every CSV plus report.json into the directory.
void write_outputs(const CommandResult& result, const std::filesystem::path& directory);

/// CSV layouts, one line per file; shown by the CLI help.
const char* csv_column_help();

}  // namespace nllt
