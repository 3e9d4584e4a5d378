#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nllt/chain.hpp"
#include "nllt/lattice.hpp"
#include "nllt/observable.hpp"

namespace nllt {

inline constexpr const char* kToolVersion = "0.1.0";

struct InstanceDefaults {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  std::optional<std::size_t> horizon;
  std::optional<std::vector<double>> theta_grid;
  std::optional<std::vector<std::size_t>> n_grid;
};

/// A parsed instance file: chain, raw (uncentered) observable and defaults.
struct InstanceFile {
  std::string name;
  std::string digest;
  FiniteChain chain;
  Observable observable;
  InstanceDefaults defaults;
};

/// FNV-1a 64 over the canonical dump (sorted keys, no whitespace), as 16 hex digits.
std::string content_digest(const nlohmann::json& document);

/// Parses an instance document. Errors are ParseError (or the validation
/// error of the offending module) with messages naming the field, e.g.
/// "chain.transition[1]: ...".
InstanceFile parse_instance(const nlohmann::json& document);
/// Parses JSON text; syntax errors report line and column.
InstanceFile parse_instance_text(const std::string& text);
InstanceFile load_instance(const std::filesystem::path& path);

/// Shortest decimal that round-trips (max 17 significant digits).
std::string format_double(double value);

nlohmann::json lattice_json(const LatticeClassification& classification, const FiniteChain& chain);
nlohmann::json mixing_json(const MixingProfile& profile);

/// "a,b,c" lists and "start:stop:step" ranges (inclusive of stop within 1e-9).
std::vector<double> parse_real_grid(const std::string& text);
std::vector<std::size_t> parse_count_grid(const std::string& text);

void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace nllt
