#include "nllt/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "nllt/error.hpp"

namespace nllt {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::ParseError, where + ": " + what);
}

const json& require(const json& object, const char* key, const std::string& where) {
  if (!object.is_object()) fail(where, "expected an object");
  auto it = object.find(key);
  if (it == object.end()) fail(where, std::string("missing field \"") + key + "\"");
  return *it;
}

double number_at(const json& value, const std::string& where) {
  if (value.is_number()) return value.get<double>();
  if (value.is_string()) {
    try {
      return Rational::parse(value.get<std::string>()).to_double();
    } catch (const Error& e) {
      fail(where, e.detail());
    }
  }
  fail(where, "expected a number or a rational string");
}

std::string label_at(const json& value, const std::string& where) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_integer()) return std::to_string(value.get<long long>());
  if (value.is_number()) return format_double(value.get<double>());
  fail(where, "state label must be a string or a number");
}

std::size_t count_at(const json& value, const std::string& where) {
  if (!value.is_number_integer() || value.get<long long>() < 0) fail(where, "expected a non-negative integer");
  return value.get<std::size_t>();
}

FiniteChain parse_chain(const json& node) {
  const std::string where = "chain";
  const json& states = require(node, "states", where);
  if (!states.is_array()) fail(where + ".states", "expected an array");
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < states.size(); ++i) {
    labels.push_back(label_at(states[i], where + ".states[" + std::to_string(i) + "]"));
  }
  const std::size_t s = labels.size();
  if (s < 2) fail(where + ".states", "need at least 2 states");

  const json& rows = require(node, "transition", where);
  if (!rows.is_array()) fail(where + ".transition", "expected an array of rows");
  if (rows.size() != s) {
    fail(where + ".transition", "has " + std::to_string(rows.size()) + " rows, expected " + std::to_string(s));
  }
  Matrix transition(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s));
  for (std::size_t i = 0; i < s; ++i) {
    const std::string row_where = where + ".transition[" + std::to_string(i) + "]";
    const json& row = rows[i];
    if (!row.is_array()) fail(row_where, "expected an array");
    if (row.size() != s) {
      fail(row_where, "has " + std::to_string(row.size()) + " entries, expected " + std::to_string(s));
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < s; ++j) {
      const double p = number_at(row[j], row_where + "[" + std::to_string(j) + "]");
      if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
        fail(row_where + "[" + std::to_string(j) + "]", "entry " + format_double(p) + " outside [0, 1]");
      }
      transition(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = p;
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw Error(ErrorCode::NonStochastic, row_where + ": row sums to " + format_double(sum));
    }
  }

  std::optional<Vector> stationary;
  if (auto it = node.find("stationary"); it != node.end() && !it->is_null()) {
    if (!it->is_array() || it->size() != s) fail(where + ".stationary", "expected " + std::to_string(s) + " entries");
    Vector mu(static_cast<Eigen::Index>(s));
    for (std::size_t i = 0; i < s; ++i) {
      mu(static_cast<Eigen::Index>(i)) = number_at((*it)[i], where + ".stationary[" + std::to_string(i) + "]");
    }
    stationary = mu;
  }
  try {
    return validate_chain(transition, labels, stationary);
  } catch (const Error& e) {
    throw Error(e.code(), std::string("chain: ") + e.detail());
  }
}

Observable parse_observable(const json& node, const FiniteChain& chain, std::optional<int> top_ell) {
  const std::string where = "observable";
  const json& ell_node = require(node, "ell", where);
  if (!ell_node.is_number_integer() || ell_node.get<int>() < 1) fail(where + ".ell", "expected an integer >= 1");
  const int ell = ell_node.get<int>();
  if (top_ell && *top_ell != ell) {
    fail("ell", "top-level ell " + std::to_string(*top_ell) + " differs from observable.ell " + std::to_string(ell));
  }
  std::size_t expected = 0;
  try {
    expected = table_size(chain.size(), ell);
  } catch (const Error& e) {
    throw Error(e.code(), where + ": " + e.detail());
  }

  std::vector<std::optional<QSqrt2>> exact;
  if (auto it = node.find("exact_values"); it != node.end() && !it->is_null()) {
    if (!it->is_array()) fail(where + ".exact_values", "expected an array");
    if (it->size() != expected) {
      throw Error(ErrorCode::LengthMismatch, where + ".exact_values: has " + std::to_string(it->size()) +
                                                 " entries, expected S^ell = " + std::to_string(expected));
    }
    for (std::size_t i = 0; i < it->size(); ++i) {
      const json& entry = (*it)[i];
      const std::string entry_where = where + ".exact_values[" + std::to_string(i) + "]";
      if (entry.is_null()) {
        exact.emplace_back();
      } else if (entry.is_string()) {
        try {
          exact.emplace_back(QSqrt2::parse(entry.get<std::string>()));
        } catch (const Error& e) {
          fail(entry_where, e.detail());
        }
      } else if (entry.is_number_integer()) {
        exact.emplace_back(QSqrt2(entry.get<std::int64_t>()));
      } else {
        fail(entry_where, "expected a string such as \"p/q\" or \"a+b*sqrt2\", or null");
      }
    }
  }

  std::vector<double> values;
  if (auto it = node.find("values"); it != node.end()) {
    if (!it->is_array()) fail(where + ".values", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const json& entry = (*it)[i];
      const std::string entry_where = where + ".values[" + std::to_string(i) + "]";
      if (!entry.is_number()) fail(entry_where, "expected a number");
      values.push_back(entry.get<double>());
    }
  } else if (!exact.empty()) {
    for (std::size_t i = 0; i < exact.size(); ++i) {
      if (!exact[i]) fail(where + ".exact_values[" + std::to_string(i) + "]", "null entry with no float values");
      values.push_back(exact[i]->to_double());
    }
  } else {
    fail(where, "missing field \"values\"");
  }
  if (values.size() != expected) {
    throw Error(ErrorCode::LengthMismatch, where + ".values: has " + std::to_string(values.size()) +
                                               " entries, expected S^ell = " + std::to_string(expected));
  }
  try {
    return build_observable(ell, std::move(values), std::move(exact), chain);
  } catch (const Error& e) {
    throw Error(e.code(), where + ": " + e.detail());
  }
}

InstanceDefaults parse_defaults(const json& node) {
  InstanceDefaults out;
  const std::string where = "defaults";
  if (!node.is_object()) fail(where, "expected an object");
  if (auto it = node.find("seed"); it != node.end()) {
    if (!it->is_number_unsigned() && !(it->is_number_integer() && it->get<long long>() >= 0)) {
      fail(where + ".seed", "expected a non-negative integer");
    }
    out.seed = it->get<std::uint64_t>();
  }
  if (auto it = node.find("samples"); it != node.end()) out.samples = count_at(*it, where + ".samples");
  if (auto it = node.find("horizon"); it != node.end()) out.horizon = count_at(*it, where + ".horizon");
  if (auto it = node.find("theta_grid"); it != node.end()) {
    if (!it->is_array()) fail(where + ".theta_grid", "expected an array");
    std::vector<double> grid;
    for (std::size_t i = 0; i < it->size(); ++i) grid.push_back(number_at((*it)[i], where + ".theta_grid[" + std::to_string(i) + "]"));
    out.theta_grid = grid;
  }
  if (auto it = node.find("n_grid"); it != node.end()) {
    if (!it->is_array()) fail(where + ".n_grid", "expected an array");
    std::vector<std::size_t> grid;
    for (std::size_t i = 0; i < it->size(); ++i) grid.push_back(count_at((*it)[i], where + ".n_grid[" + std::to_string(i) + "]"));
    out.n_grid = grid;
  }
  return out;
}

}  // namespace

std::string content_digest(const json& document) {
  const std::string canonical = document.dump();
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex;
  out.width(16);
  out.fill('0');
  out << hash;
  return out.str();
}

InstanceFile parse_instance(const json& document) {
  if (!document.is_object()) fail("instance", "top level must be an object");
  std::optional<int> top_ell;
  if (auto it = document.find("ell"); it != document.end()) {
    if (!it->is_number_integer() || it->get<int>() < 1) fail("ell", "expected an integer >= 1");
    top_ell = it->get<int>();
  }
  FiniteChain chain = parse_chain(require(document, "chain", "instance"));
  Observable observable = parse_observable(require(document, "observable", "instance"), chain, top_ell);
  InstanceFile out{"", content_digest(document), std::move(chain), std::move(observable), {}};
  if (auto it = document.find("name"); it != document.end()) {
    if (!it->is_string()) fail("name", "expected a string");
    out.name = it->get<std::string>();
  }
  if (auto it = document.find("defaults"); it != document.end()) out.defaults = parse_defaults(*it);
  return out;
}

InstanceFile parse_instance_text(const std::string& text) {
  json document;
  try {
    document = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw Error(ErrorCode::ParseError,
                "line " + std::to_string(line) + ", column " + std::to_string(column) + ": invalid JSON");
  }
  return parse_instance(document);
}

InstanceFile load_instance(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_instance_text(buffer.str());
  } catch (const Error& e) {
    throw Error(e.code(), path.filename().string() + ": " + e.detail());
  }
}

std::string format_double(double value) {
  if (value == 0.0) return "0";
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

json lattice_json(const LatticeClassification& c, const FiniteChain& chain) {
  json out;
  out["kind"] = to_string(c.kind);
  out["heuristic"] = c.heuristic;
  if (c.exact_h) {
    out["h"] = c.exact_h->is_rational() ? c.exact_h->rational_part().str() : c.exact_h->str();
  } else if (c.h) {
    auto r = recognize_rational(*c.h, 100'000, 1e-12);
    out["h"] = r ? r->str() : format_double(*c.h);
  } else {
    out["h"] = nullptr;
  }
  out["h_value"] = c.h ? json(*c.h) : json(nullptr);
  out["irrational_span"] = c.irrational_span;
  if (c.witness) {
    json w = json::array();
    for (int x : *c.witness) w.push_back(chain.labels()[static_cast<std::size_t>(x)]);
    out["witness"] = w;
  } else {
    out["witness"] = nullptr;
  }
  out["diagnostic"] = c.diagnostic;
  json prefixes = json::array();
  for (const auto& ps : c.per_prefix) {
    json p;
    json labels = json::array();
    for (int x : ps.prefix) labels.push_back(chain.labels()[static_cast<std::size_t>(x)]);
    p["prefix"] = labels;
    p["mass"] = ps.mass;
    p["span"] = ps.exact_span ? json(ps.exact_span->str()) : ps.span ? json(*ps.span) : json(nullptr);
    p["unbounded"] = ps.unbounded;
    p["empty"] = ps.empty;
    p["span_in_values_lattice"] = ps.span_in_values_lattice;
    prefixes.push_back(p);
  }
  out["per_prefix"] = prefixes;
  return out;
}

json mixing_json(const MixingProfile& profile) {
  auto table = [](const std::map<int, double>& m) {
    json t = json::object();
    for (const auto& [k, v] : m) t[std::to_string(k)] = v;
    return t;
  };
  json out;
  out["ell"] = profile.ell;
  out["psi"] = table(profile.psi);
  out["delta"] = table(profile.delta);
  out["rho"] = table(profile.rho);
  if (profile.doeblin) {
    out["doeblin"] = {{"n0", profile.doeblin->n0}, {"gamma", profile.doeblin->gamma}, {"reference", "stationary"}};
  } else {
    out["doeblin"] = nullptr;
  }
  if (profile.psi_decay) {
    out["psi_decay"] = {{"rate", profile.psi_decay->rate},
                        {"alpha", profile.psi_decay->alpha},
                        {"vanishes", profile.psi_decay->vanishes}};
  }
  out["rho_ell_below_one"] = profile.correlation_condition;
  out["delta_ell_below_one"] = profile.contraction_condition;
  out["overlap"] = {{"rows", profile.overlap.rows},
                    {"columns", profile.overlap.columns},
                    {"row_overlap", profile.overlap.row_overlap},
                    {"column_overlap", profile.overlap.column_overlap},
                    {"positivity_exponent", profile.overlap.positivity_exponent
                                                ? json(*profile.overlap.positivity_exponent)
                                                : json(nullptr)}};
  return out;
}

std::vector<double> parse_real_grid(const std::string& text) {
  auto parse_one = [&](const std::string& token) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size() || token.empty() || !std::isfinite(v)) {
      throw Error(ErrorCode::ParseError, "grid \"" + text + "\": bad number \"" + token + "\"");
    }
    return v;
  };
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream in(text);
    for (std::string part; std::getline(in, part, ':');) parts.push_back(part);
    if (parts.size() != 3) throw Error(ErrorCode::ParseError, "range grid must be start:stop:step");
    const double start = parse_one(parts[0]), stop = parse_one(parts[1]), step = parse_one(parts[2]);
    if (!(step > 0.0) || stop < start) throw Error(ErrorCode::ParseError, "range grid needs step > 0 and stop >= start");
    for (std::size_t i = 0;; ++i) {
      const double v = start + static_cast<double>(i) * step;
      if (v > stop + 1e-9 * std::max(1.0, std::abs(stop))) break;
      out.push_back(v);
    }
    return out;
  }
  std::stringstream in(text);
  for (std::string token; std::getline(in, token, ',');) out.push_back(parse_one(token));
  if (out.empty()) throw Error(ErrorCode::ParseError, "empty grid");
  return out;
}

std::vector<std::size_t> parse_count_grid(const std::string& text) {
  std::vector<std::size_t> out;
  for (double v : parse_real_grid(text)) {
    if (v < 1.0 || v != std::floor(v)) {
      throw Error(ErrorCode::ParseError, "N grid \"" + text + "\" must hold positive integers");
    }
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
  out << contents;
}

}  // namespace nllt
