#pragma once

#include "symqkd/families.hpp"
#include "symqkd/keyrate.hpp"

#include <atomic>
#include <functional>
#include <optional>
#include <thread>
#include <vector>

namespace symqkd {

enum class OptStatus { Converged, Boundary, Infeasible };

inline std::string status_name(OptStatus s) {
  switch (s) {
    case OptStatus::Converged: return "converged";
    case OptStatus::Boundary: return "boundary";
    case OptStatus::Infeasible: return "infeasible";
  }
  return "?";
}

struct OptimizationResult {
  double theta = 0.0;
  double r_min = 0.0;
  BellDiagonalState state;
  int iterations = 0;
  OptStatus status = OptStatus::Infeasible;
  std::vector<double> params;
};

using RateFunction = std::function<double(const BellDiagonalState&)>;

inline RateFunction closed_form_rate(std::vector<BasisLabel> labels) {
  return [labels = std::move(labels)](const BellDiagonalState& u) { return mub_rate_closed_form(u, labels).r; };
}

inline RateFunction engine_rate(ProtocolSpec protocol) {
  return [p = std::move(protocol)](const BellDiagonalState& u) { return sifted_rate(u, p).r; };
}

inline constexpr int kPrescanPoints = 64;
inline constexpr double kThetaTol = 1e-10;
inline constexpr double kTieTol = 1e-12;

/**
 * Minimizes the rate over a family with at most one free parameter. The
 * one-dimensional case scans 64 evenly spaced points first and then runs a
 * golden-section search on the bracket around the best grid point, so a
 * non-unimodal landscape cannot trap it in a far-away local minimum.
 */
inline OptimizationResult minimize_rate(const AttackFamily& f, const RateFunction& rate) {
  OptimizationResult res;
  if (f.n_free == 0) {
    res.state = f.at(0.0);
    res.r_min = rate(res.state);
    res.iterations = 1;
    res.status = OptStatus::Converged;
    res.params = f.params(0.0);
    return res;
  }
  if (f.n_free != 1) throw std::invalid_argument("minimize_rate: only 0 or 1 free parameters are supported");
  if (!(f.lo <= f.hi)) return res;

  int evals = 0;
  auto eval = [&](double t) {
    ++evals;
    return rate(f.at(t));
  };
  // Smaller parameter wins when values agree to tolerance.
  double best_t = f.lo;
  double best_r = eval(f.lo);
  auto consider = [&](double t, double r) {
    if (r < best_r - kTieTol || (std::abs(r - best_r) <= kTieTol && t < best_t)) {
      best_t = t;
      best_r = r;
    }
  };

  const double width = f.hi - f.lo;
  if (width > 0.0) {
    std::vector<double> grid(kPrescanPoints);
    int best_i = 0;
    for (int i = 0; i < kPrescanPoints; ++i) {
      grid[static_cast<std::size_t>(i)] = f.lo + width * i / (kPrescanPoints - 1);
      const double r = i == 0 ? best_r : eval(grid[static_cast<std::size_t>(i)]);
      if (r < best_r - kTieTol) best_i = i;
      consider(grid[static_cast<std::size_t>(i)], r);
    }
    double a = grid[static_cast<std::size_t>(std::max(0, best_i - 1))];
    double b = grid[static_cast<std::size_t>(std::min(kPrescanPoints - 1, best_i + 1))];
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = eval(c);
    double fd = eval(d);
    while (b - a > kThetaTol) {
      if (fc <= fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - invphi * (b - a);
        fc = eval(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + invphi * (b - a);
        fd = eval(d);
      }
    }
    consider(c, fc);
    consider(d, fd);
    const double mid = 0.5 * (a + b);
    consider(mid, eval(mid));
  }

  res.theta = best_t;
  res.r_min = best_r;
  res.state = f.at(best_t);
  res.iterations = evals;
  res.params = f.params(best_t);
  const double edge = 1e-8 * std::max(width, 1e-12);
  res.status = (best_t - f.lo <= edge || f.hi - best_t <= edge) ? OptStatus::Boundary : OptStatus::Converged;
  return res;
}

/// Root of a decreasing rate curve by bisection to 1e-8.
inline double threshold_q(const std::function<double(double)>& curve, double lo, double hi, double tol = 1e-8) {
  if (!(curve(lo) > 0.0 && curve(hi) < 0.0)) throw std::domain_error("threshold_q: no sign change on the interval");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const double fm = curve(mid);
    (fm > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// One row of a rate table.
struct RatePoint {
  double q = 0.0;
  double rate = 0.0;
  std::vector<std::pair<std::string, double>> params;
  std::string status;
  double closed_form_delta = std::numeric_limits<double>::quiet_NaN();
};

enum class Method { Analytic, Numeric, Engine };

inline Method parse_method(const std::string& s) {
  if (s == "analytic") return Method::Analytic;
  if (s == "numeric") return Method::Numeric;
  if (s == "engine") return Method::Engine;
  throw std::invalid_argument("unknown method '" + s + "'");
}

inline std::string method_name(Method m) {
  switch (m) {
    case Method::Analytic: return "analytic";
    case Method::Numeric: return "numeric";
    case Method::Engine: return "engine";
  }
  return "?";
}

/// Closed-form optimum where one exists and q lies in its validity range.
inline std::optional<double> scheme_closed_form(Scheme s, int d, double q) {
  try {
    if (s == Scheme::TwoMubs) return optimal_2mubs(d, q).r_min;
    if (s == Scheme::DPlusOneMubs) return optimal_d1mubs(d, q).r_min;
  } catch (const InfeasibleError&) {
  }
  return std::nullopt;
}

inline RatePoint point_from(const AttackFamily& f, const OptimizationResult& r, double q) {
  RatePoint p{q, r.r_min, {}, status_name(r.status)};
  for (std::size_t i = 0; i < f.probes.size(); ++i) p.params.emplace_back(f.probes[i].name, r.params[i]);
  return p;
}

/// Rate of a MUB scheme. Analytic uses the closed-form optimum where one
/// exists and falls back to the numeric search for d MUBs.
inline RatePoint scheme_rate(Scheme s, int d, double q, Method method) {
  if (method == Method::Analytic) {
    if (s == Scheme::TwoMubs) {
      const auto o = optimal_2mubs(d, q);
      return {q, o.r_min, {{"a", o.a}, {"b", o.b}, {"c", o.c}}, "closed-form"};
    }
    if (s == Scheme::DPlusOneMubs) {
      const auto o = optimal_d1mubs(d, q);
      return {q, o.r_min, {{"a", o.a}, {"b", o.b}}, "closed-form"};
    }
  }
  const AttackFamily f = scheme_family(s, d, q);
  const RateFunction rate = method == Method::Engine ? engine_rate(scheme_protocol(s, d)) : closed_form_rate(scheme_labels(s, d));
  const OptimizationResult r = minimize_rate(f, rate);
  if (r.status == OptStatus::Infeasible) throw InfeasibleError(range_message(f.name, q, f.lo, f.hi));
  RatePoint p = point_from(f, r, q);
  if (method == Method::Engine)
    if (const auto cf = scheme_closed_form(s, d, q)) p.closed_form_delta = p.rate - *cf;
  return p;
}

inline RatePoint qubit_rate(QubitKind kind, double q, int n, double theta) {
  const AttackFamily f = qubit_family(kind, q, n, theta);
  const OptimizationResult r = minimize_rate(f, engine_rate(qubit_protocol(kind, n, theta)));
  if (r.status == OptStatus::Infeasible) throw InfeasibleError(range_message(f.name, q, f.lo, f.hi));
  return point_from(f, r, q);
}

/// Evaluates `point` on every grid value, possibly in parallel; rows come back
/// in grid order. Infeasible points are recorded with status "infeasible".
inline std::vector<RatePoint> sweep(const std::function<RatePoint(double)>& point, const std::vector<double>& grid,
                                    unsigned threads = 0) {
  std::vector<RatePoint> rows(grid.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < grid.size(); i = next++) {
      try {
        rows[i] = point(grid[i]);
      } catch (const InfeasibleError&) {
        rows[i] = RatePoint{grid[i], std::numeric_limits<double>::quiet_NaN(), {}, "infeasible"};
      } catch (const std::exception& e) {
        rows[i] = RatePoint{grid[i], std::numeric_limits<double>::quiet_NaN(), {}, std::string("error: ") + e.what()};
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, grid.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return rows;
}

}  // namespace symqkd
