#include "nllt/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nllt/error.hpp"

namespace nllt {

namespace {

constexpr double kHeuristicTol = 1e-9;

enum class SpanShape { Bounded, Unbounded, Empty };

struct ExactSpan {
  SpanShape shape = SpanShape::Unbounded;
  QSqrt2 h;
};

// Largest h with every v_c - v_0 in hZ; these generate the same group as all
// pairwise differences.
ExactSpan exact_span_of(const std::vector<QSqrt2>& values) {
  ExactSpan out;
  std::optional<QSqrt2> ref;
  Rational g;
  for (std::size_t c = 1; c < values.size(); ++c) {
    const QSqrt2 d = values[c] - values[0];
    if (d.is_zero()) continue;
    if (!ref) {
      ref = d;
      g = Rational(1);
      continue;
    }
    const QSqrt2 ratio = d / *ref;
    if (!ratio.is_rational()) {
      out.shape = SpanShape::Empty;
      return out;
    }
    g = gcd(g, ratio.rational_part());
  }
  if (!ref) return out;
  out.shape = SpanShape::Bounded;
  out.h = abs(*ref) * QSqrt2(g);
  return out;
}

bool all_multiples(const std::vector<QSqrt2>& values, const QSqrt2& h) {
  return std::all_of(values.begin(), values.end(), [&](const QSqrt2& v) { return (v / h).is_integer(); });
}

bool all_multiples(const std::vector<double>& values, double h) {
  return std::all_of(values.begin(), values.end(), [&](double v) {
    const double q = v / h;
    return std::abs(q - std::round(q)) <= kHeuristicTol * std::max(1.0, std::abs(q));
  });
}

std::string prefix_str(const std::vector<int>& prefix, const FiniteChain& chain) {
  std::ostringstream out;
  out << "(";
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (i) out << ",";
    out << chain.labels()[static_cast<std::size_t>(prefix[i])];
  }
  out << ")";
  return out.str();
}

}  // namespace

const char* to_string(LatticeKind kind) {
  switch (kind) {
    case LatticeKind::Lattice: return "Lattice";
    case LatticeKind::NonLattice: return "NonLattice";
    case LatticeKind::Other: return "Other";
  }
  return "Other";
}

std::optional<double> float_span(const std::vector<double>& values, double tol, std::int64_t max_den) {
  double scale = 1.0;
  for (double v : values) scale = std::max(scale, std::abs(v));
  std::optional<double> ref;
  Rational g;
  for (double v : values) {
    if (std::abs(v) <= tol * scale) continue;
    if (!ref) {
      ref = v;
      g = Rational(1);
      continue;
    }
    auto ratio = recognize_rational(v / *ref, max_den, tol);
    if (!ratio) return std::nullopt;
    try {
      g = gcd(g, *ratio);
    } catch (const Error&) {
      return std::nullopt;
    }
  }
  if (!ref) return std::nullopt;
  return std::abs(*ref) * g.to_double();
}

LatticeClassification classify(const Observable& observable, const FiniteChain& chain) {
  const bool exact_centered = observable.exact_mean && observable.exact_mean->is_zero();
  if (std::abs(observable.mean) >= 1e-10 || (observable.exact_mean && !exact_centered)) {
    throw Error(ErrorCode::NotCentered, "classify requires a centered observable");
  }
  const std::size_t s = chain.size();
  const int prefix_arity = observable.ell - 1;
  const std::size_t prefixes = table_size(s, prefix_arity);

  // Representation must be uniform: all prefixes exact or none.
  bool any_exact = false, any_float = false;
  for (std::size_t p = 0; p < prefixes; ++p) {
    for (std::size_t c = 0; c < s; ++c) {
      const bool exact = observable.has_exact() && observable.exact_values[p * s + c].has_value();
      (exact ? any_exact : any_float) = true;
    }
  }
  if (any_exact && any_float) {
    throw Error(ErrorCode::MixedRepresentation, "observable mixes exact and float entries across prefixes");
  }
  const bool exact = any_exact;

  LatticeClassification out;
  out.heuristic = !exact;

  std::optional<QSqrt2> common_exact;
  std::optional<double> common_float;
  bool spans_agree = true;
  bool all_in_values_lattice = true;
  std::optional<std::size_t> first_unbounded, first_mismatch, first_outside;

  for (std::size_t p = 0; p < prefixes; ++p) {
    PrefixSpan ps;
    ps.prefix = tuple_of(p, s, prefix_arity);
    ps.mass = 1.0;
    for (int x : ps.prefix) ps.mass *= chain.stationary()(x);
    if (ps.mass <= 0.0) continue;

    if (exact) {
      std::vector<QSqrt2> row;
      for (std::size_t c = 0; c < s; ++c) row.push_back(*observable.exact_values[p * s + c]);
      const ExactSpan span = exact_span_of(row);
      ps.unbounded = span.shape == SpanShape::Unbounded;
      ps.empty = span.shape == SpanShape::Empty;
      if (span.shape == SpanShape::Bounded) {
        ps.exact_span = span.h;
        ps.span = span.h.to_double();
        ps.span_in_values_lattice = all_multiples(row, span.h);
        if (!common_exact) {
          common_exact = span.h;
        } else if (*common_exact != span.h) {
          spans_agree = false;
          if (!first_mismatch) first_mismatch = out.per_prefix.size();
        }
      }
    } else {
      std::vector<double> row(observable.values.begin() + static_cast<std::ptrdiff_t>(p * s),
                              observable.values.begin() + static_cast<std::ptrdiff_t>((p + 1) * s));
      std::vector<double> diffs;
      double scale = 1.0;
      for (double v : row) scale = std::max(scale, std::abs(v));
      bool constant = true;
      for (std::size_t c = 1; c < s; ++c) {
        diffs.push_back(row[c] - row[0]);
        if (std::abs(diffs.back()) > kHeuristicTol * scale) constant = false;
      }
      if (constant) {
        ps.unbounded = true;
      } else if (auto h = float_span(diffs, kHeuristicTol, 100'000)) {
        ps.span = *h;
        ps.span_in_values_lattice = all_multiples(row, *h);
        if (!common_float) {
          common_float = *h;
        } else if (std::abs(*common_float - *h) > kHeuristicTol * std::max(1.0, *h)) {
          spans_agree = false;
          if (!first_mismatch) first_mismatch = out.per_prefix.size();
        }
      } else {
        ps.empty = true;
      }
    }

    if (ps.empty && !out.witness) out.witness = ps.prefix;
    if (ps.unbounded && !first_unbounded) first_unbounded = out.per_prefix.size();
    if (ps.span && !ps.span_in_values_lattice) {
      all_in_values_lattice = false;
      if (!first_outside) first_outside = out.per_prefix.size();
    }
    out.per_prefix.push_back(std::move(ps));
  }

  if (out.witness) {
    out.kind = LatticeKind::NonLattice;
    out.diagnostic = "B empty at prefix " + prefix_str(*out.witness, chain);
    return out;
  }
  if (first_unbounded) {
    out.kind = LatticeKind::Other;
    const bool all_unbounded = std::all_of(out.per_prefix.begin(), out.per_prefix.end(),
                                           [](const PrefixSpan& ps) { return ps.unbounded; });
    out.diagnostic = all_unbounded ? "h(x̄) unbounded at every prefix: F(x̄,·) constant, F_ell vanishes"
                                   : "h(x̄) non-constant across prefixes: F(x̄,·) constant at prefix " +
                                         prefix_str(out.per_prefix[*first_unbounded].prefix, chain);
    return out;
  }
  if (!spans_agree) {
    out.kind = LatticeKind::Other;
    out.diagnostic = "h(x̄) non-constant across prefixes (first differing prefix " +
                     prefix_str(out.per_prefix[*first_mismatch].prefix, chain) + ")";
    return out;
  }
  if (!all_in_values_lattice) {
    out.kind = LatticeKind::Other;
    out.diagnostic = "h(x̄) ∉ A_x̄ at prefix " + prefix_str(out.per_prefix[*first_outside].prefix, chain);
    return out;
  }
  out.kind = LatticeKind::Lattice;
  if (exact) {
    out.exact_h = common_exact;
    out.h = common_exact->to_double();
    out.irrational_span = !common_exact->is_rational();
    if (out.irrational_span) out.diagnostic = "span is an irrational multiple of sqrt2";
  } else {
    out.h = common_float;
  }
  return out;
}

bool lattice_mesh_check(const LatticeClassification& classification, const EmpiricalDistribution& distribution) {
  if (classification.kind != LatticeKind::Lattice || !classification.h) {
    throw Error(ErrorCode::KindMismatch, "lattice_mesh_check requires a Lattice classification");
  }
  if (classification.exact_h && distribution.exact_support.size() == distribution.support.size() &&
      !distribution.support.empty()) {
    return all_multiples(distribution.exact_support, *classification.exact_h);
  }
  return all_multiples(distribution.support, *classification.h);
}

}  // namespace nllt
