#include "fmmc/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "fmmc/error.hpp"
#include "fmmc/format.hpp"
#include "fmmc/parallel.hpp"

namespace fmmc {

namespace {

struct BladeRange {
  bool active = false;
  double hi = 0.0;
};

ParetoPoint make_point(const EquilibriumDistribution& pi, std::vector<double> qf,
                       const ClosedFormSolution& s) {
  ParetoPoint p;
  for (std::size_t i = 0; i < qf.size(); ++i) p.pf.push_back(qf[i] / pi[2 * i + 1]);
  p.qf = std::move(qf);
  p.slem = s.slem;
  p.regime = s.regime;
  return p;
}

bool within(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

// Objectives of a, each <= those of b, one of them strictly.
bool dominates(const ParetoPoint& a, const ParetoPoint& b, double tol) {
  bool strict = a.slem < b.slem - tol;
  if (a.slem > b.slem + tol) return false;
  for (std::size_t i = 0; i < a.qf.size(); ++i) {
    if (a.qf[i] > b.qf[i] + tol) return false;
    strict = strict || a.qf[i] < b.qf[i] - tol;
  }
  return strict;
}

bool duplicates(const ParetoPoint& a, const ParetoPoint& b, double tol) {
  if (!within(a.slem, b.slem, tol)) return false;
  for (std::size_t i = 0; i < a.qf.size(); ++i)
    if (!within(a.qf[i], b.qf[i], tol)) return false;
  return true;
}

std::vector<double> grid_axis(double hi, int n) {
  std::vector<double> axis;
  for (int k = 0; k < n; ++k) axis.push_back(hi * static_cast<double>(k) / (n - 1));
  axis.back() = hi;
  return axis;
}

}  // namespace

Frontier trace_frontier(const EquilibriumDistribution& pi, std::size_t m,
                        const FrontierOptions& opts) {
  if (opts.grid < 2) throw InvalidArgument("frontier grid needs at least 2 points per blade");
  if (pi.size() != 2 * m + 1) throw InvalidArgument("distribution size does not match m");

  const std::vector<double> zeros(m, 0.0);
  const ClosedFormSolution base = solve(pi, zeros, opts.solver);
  const double flat_tol = 10.0 * opts.solver.oracle.tol;

  std::vector<BladeRange> ranges(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double limit = std::min(pi[2 * i + 1], pi[2 * i + 2]);
    if (m == 1) {
      ranges[i] = {true, std::min(limit, m1_collapse_point(TriangleMasses::from_canonical(pi)))};
    } else if (base.qf_bounds[i].lo > 0.0) {
      ranges[i] = {true, std::min(limit, base.qf_bounds[i].lo)};
    }
  }

  // Confirm the inactive blades by sampling their feasible range with the
  // active blades at both ends of theirs.
  for (std::size_t i = 0; i < m; ++i) {
    if (ranges[i].active) continue;
    const double limit = std::min(pi[2 * i + 1], pi[2 * i + 2]);
    std::vector<std::vector<double>> probes;
    const bool any_active =
        std::any_of(ranges.begin(), ranges.end(), [](const BladeRange& r) { return r.active; });
    for (bool at_top : {false, true}) {
      if (at_top && !any_active) break;
      for (int k = 1; k <= opts.inactive_samples; ++k) {
        std::vector<double> qf = zeros;
        for (std::size_t j = 0; j < m; ++j)
          if (ranges[j].active && at_top) qf[j] = ranges[j].hi;
        qf[i] = limit * static_cast<double>(k) / opts.inactive_samples;
        probes.push_back(std::move(qf));
      }
    }
    const auto deltas = parallel_map(probes.size(), [&](std::size_t k) {
      std::vector<double> ref = probes[k];
      ref[i] = 0.0;
      return solve(pi, probes[k], opts.solver).slem - solve(pi, ref, opts.solver).slem;
    });
    for (double d : deltas) {
      if (d < -flat_tol) ranges[i] = {true, limit};
    }
  }

  Frontier f;
  std::vector<std::vector<double>> axes(m, std::vector<double>{0.0});
  for (std::size_t i = 0; i < m; ++i) {
    if (!ranges[i].active) continue;
    f.active_blades.push_back(i + 1);
    axes[i] = grid_axis(ranges[i].hi, opts.grid);
  }

  std::vector<std::vector<double>> grid{{}};
  for (const auto& axis : axes) {
    std::vector<std::vector<double>> next;
    for (const auto& prefix : grid) {
      for (double v : axis) {
        auto row = prefix;
        row.push_back(v);
        next.push_back(std::move(row));
      }
    }
    grid = std::move(next);
  }

  auto points = parallel_map(grid.size(), [&](std::size_t k) {
    return make_point(pi, grid[k], solve(pi, grid[k], opts.solver));
  });
  f.points = non_dominated_filter(points);
  std::stable_sort(f.points.begin(), f.points.end(),
                   [](const ParetoPoint& a, const ParetoPoint& b) {
                     if (a.slem != b.slem) return a.slem > b.slem;
                     return a.qf < b.qf;
                   });
  f.collapsed = f.points.size() == 1;
  return f;
}

std::vector<ParetoPoint> non_dominated_filter(const std::vector<ParetoPoint>& points,
                                              double tol) {
  std::vector<ParetoPoint> kept;
  for (std::size_t i = 0; i < points.size(); ++i) {
    bool drop = false;
    for (std::size_t j = 0; j < points.size() && !drop; ++j) {
      if (j == i) continue;
      if (dominates(points[j], points[i], tol)) {
        drop = true;
      } else if (duplicates(points[j], points[i], tol)) {
        drop = points[j].qf < points[i].qf || (points[j].qf == points[i].qf && j < i);
      }
    }
    if (!drop) kept.push_back(points[i]);
  }
  return kept;
}

const char* to_string(SegmentKind kind) {
  return kind == SegmentKind::Linear ? "linear" : "sqrt-quadratic";
}

double FrontierSegment::evaluate(double q) const {
  if (kind == SegmentKind::Linear) return coefficients[0] + coefficients[1] * q;
  const double v = coefficients[0] + coefficients[1] * q + coefficients[2] * q * q;
  return std::sqrt(std::max(0.0, v));
}

std::vector<FrontierSegment> frontier_curve_m1(const TriangleMasses& t) {
  const double c = t.center;
  const double sum = t.p1 + t.p2 + c;
  const double collapse = m1_collapse_point(t);
  const double threshold = m1_high_threshold(t);

  const double d = std::sqrt(t.p1 * t.p2 * (t.p1 + c) * (t.p2 + c));
  const FrontierSegment high{threshold, collapse, SegmentKind::Linear,
                             {t.p1 * t.p2 / d, -sum / d}, "m1-high", false};
  if (c * c >= t.p1 * t.p2) {
    FrontierSegment only = high;
    only.lo = 0.0;
    return {only};
  }

  const double b0 = 4.0 * t.p1 * t.p2 + c * (t.p1 + t.p2);
  const double low_limit = m1_low_limit(t);
  std::vector<FrontierSegment> out;
  if (low_limit > 0.0) {
    out.push_back({0.0, low_limit, SegmentKind::Linear,
                   {(4.0 * t.p1 * t.p2 - c * c) / b0, -4.0 * sum / b0}, "m1-low", false});
  }
  const bool same = std::fabs(t.p1 - t.p2) <= 1e-15 * std::max(t.p1, t.p2);
  if (!same && low_limit < threshold) {
    // q13 = x0 + x1 q, q23 = c - q13 and
    // s^2 = 1 - sum (q c + q13 q23) / (p1 p2 c).
    const double x0 = t.p1 * (c - t.p2) / (t.p1 - t.p2);
    const double x1 = (t.p1 + t.p2) / (t.p1 - t.p2);
    const double k = sum / (t.p1 * t.p2 * c);
    out.push_back({low_limit, threshold, SegmentKind::SqrtQuadratic,
                   {1.0 - k * (c * x0 - x0 * x0), -k * (c + c * x1 - 2.0 * x0 * x1), k * x1 * x1},
                   "m1-middle", true});
  }
  out.push_back(high);
  return out;
}

const FrontierSegment& m1_segment_at(const std::vector<FrontierSegment>& segments, double q) {
  for (auto it = segments.rbegin(); it != segments.rend(); ++it) {
    if (q >= it->lo && q <= it->hi) return *it;
  }
  throw InvalidArgument("q12 outside the frontier range");
}

void write_frontier_csv(std::ostream& out, const Frontier& frontier, std::size_t m) {
  out << "slem";
  for (std::size_t i = 1; i <= m; ++i) out << ",q_" << 2 * i - 1 << '_' << 2 * i;
  for (std::size_t i = 1; i <= m; ++i) out << ",p_" << 2 * i - 1 << '_' << 2 * i;
  out << ",regime\n";
  for (const ParetoPoint& p : frontier.points) {
    out << format_double(p.slem);
    for (double v : p.qf) out << ',' << format_double(v);
    for (double v : p.pf) out << ',' << format_double(v);
    out << ',' << to_string(p.regime.tag) << '\n';
  }
}

}  // namespace fmmc
