#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ado/error.hpp"

namespace ado {

/// Values phi(h), phi(rh), phi(r^2 h), ... on a geometric mesh sequence,
/// coarsest first.
struct RefinementSeries {
  double r = 0.5;
  std::vector<double> h;
  std::vector<double> value;

  std::size_t size() const { return h.size(); }
};

inline void validate(const RefinementSeries& s) {
  if (!(s.r > 0.0 && s.r < 1.0))
    fail(ErrorCategory::InvalidArgument, "refinement factor must lie in (0, 1)");
  if (s.h.size() != s.value.size())
    fail(ErrorCategory::InvalidArgument, "series needs one value per mesh size");
  if (s.h.size() < 3) fail(ErrorCategory::InvalidArgument, "series needs at least 3 entries");
  if (!(s.h[0] > 0.0)) fail(ErrorCategory::InvalidArgument, "mesh sizes must be positive");
  for (std::size_t k = 1; k < s.h.size(); ++k) {
    const double want = s.h[0] * std::pow(s.r, static_cast<double>(k));
    if (std::abs(s.h[k] - want) > 1e-12 * want)
      fail(ErrorCategory::InvalidArgument,
           "mesh size " + std::to_string(k) + " breaks the geometric sequence h r^k");
  }
  for (double v : s.value)
    if (!std::isfinite(v)) fail(ErrorCategory::InvalidArgument, "series value not finite");
}

/// Builds a series from a mesh list, inferring r from the first two entries.
inline RefinementSeries make_series(std::vector<double> h, std::vector<double> value) {
  RefinementSeries s;
  if (h.size() >= 2 && h[0] != 0.0) s.r = h[1] / h[0];
  s.h = std::move(h);
  s.value = std::move(value);
  validate(s);
  return s;
}

/// Observed order from the triple starting at entry k.
inline double estimate_order(const RefinementSeries& s, std::size_t k) {
  validate(s);
  if (k + 2 >= s.size()) fail(ErrorCategory::InvalidArgument, "triple index out of range");
  const double coarse = s.value[k + 1] - s.value[k];
  const double fine = s.value[k + 2] - s.value[k + 1];
  if (coarse == 0.0)
    fail(ErrorCategory::Numerical, "stalled-convergence: phi(rh) equals phi(h) at triple " + std::to_string(k));
  const double ratio = fine / coarse;
  if (!(ratio > 0.0))
    fail(ErrorCategory::Numerical, "nonmonotone-series: differences change sign at triple " + std::to_string(k));
  return std::log(ratio) / std::log(s.r);
}

/// Headline order from the three finest entries.
inline double estimate_order(const RefinementSeries& s) {
  validate(s);
  return estimate_order(s, s.size() - 3);
}

/// Extrapolated limit from the finest pair phi(h_f / r), phi(h_f):
///   phi_ref = (phi(h_f) - r^p phi(h_f / r)) / (1 - r^p).
inline double extrapolate(const RefinementSeries& s, double p) {
  validate(s);
  if (!std::isfinite(p)) fail(ErrorCategory::InvalidArgument, "order must be finite");
  const double rp = std::pow(s.r, p);
  if (rp == 1.0) fail(ErrorCategory::Numerical, "degenerate-order: r^p = 1");
  const std::size_t n = s.size();
  return (s.value[n - 1] - rp * s.value[n - 2]) / (1.0 - rp);
}

struct TripleEstimate {
  std::size_t index = 0;  // first entry of the triple
  double p = 0.0;
  double phi_ref = 0.0;
  std::string error;      // set when the triple gives no order
};

/// Order and limit for every consecutive triple, each extrapolated from
/// its own finest pair.
inline std::vector<TripleEstimate> analyze(const RefinementSeries& s) {
  validate(s);
  std::vector<TripleEstimate> out;
  for (std::size_t k = 0; k + 2 < s.size(); ++k) {
    TripleEstimate t;
    t.index = k;
    try {
      t.p = estimate_order(s, k);
      RefinementSeries sub{s.r, {s.h[k], s.h[k + 1], s.h[k + 2]}, {s.value[k], s.value[k + 1], s.value[k + 2]}};
      t.phi_ref = extrapolate(sub, t.p);
    } catch (const Error& e) {
      t.p = t.phi_ref = std::nan("");
      t.error = e.what();
    }
    out.push_back(t);
  }
  return out;
}

}  // namespace ado
