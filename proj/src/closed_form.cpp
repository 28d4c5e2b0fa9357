#include "fmmc/closed_form.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fmmc/error.hpp"
#include "fmmc/reduction.hpp"
#include "fmmc/spectral.hpp"

namespace fmmc {

namespace {

constexpr double kFormulaMatch = 1e-9;
constexpr double kSqrtSlack = 1e-14;
constexpr double kBoundaryRel = 1e-12;

double guarded_sqrt(double x) {
  if (x >= 0.0) return std::sqrt(x);
  if (x >= -kSqrtSlack) return 0.0;
  return std::numeric_limits<double>::quiet_NaN();
}

Candidate assemble(const EquilibriumDistribution& pi, const Topology& topology,
                   WeightAssignment q, double formula, std::string branch) {
  Candidate c;
  c.branch = std::move(branch);
  c.formula_slem = formula;
  c.q = std::move(q);
  bool finite = std::isfinite(formula);
  for (const auto& [key, w] : c.q.entries()) finite = finite && std::isfinite(w);
  if (!finite) return c;
  c.feasible = validate_chain(pi, c.q, topology).feasible();
  if (!c.feasible) return c;
  c.assembled_slem = slem(pi, c.q, topology).slem;
  c.valid = std::fabs(*c.assembled_slem - formula) <= kFormulaMatch;
  return c;
}

// q(0,j) = mu_i pi_j on both vertices of blade i, plus the fixed weights.
WeightAssignment ratio_weights(const EquilibriumDistribution& pi, const Topology& topology,
                               const std::vector<double>& mu, const std::vector<double>& qf) {
  WeightAssignment q;
  for (std::size_t i = 1; i <= topology.m(); ++i) {
    q.set(0, 2 * i - 1, mu[i - 1] * pi[2 * i - 1]);
    q.set(0, 2 * i, mu[i - 1] * pi[2 * i]);
  }
  set_friend_weights(topology, qf, q);
  return q;
}

double blade_mass(const EquilibriumDistribution& pi, std::size_t i) {
  return pi[2 * i - 1] + pi[2 * i];
}

double blade_min(const EquilibriumDistribution& pi, std::size_t i) {
  return std::min(pi[2 * i - 1], pi[2 * i]);
}

bool all_within(const std::vector<Interval>& bounds, const std::vector<double>& qf) {
  for (std::size_t i = 0; i < qf.size(); ++i) {
    const double tol = kBoundaryRel * std::max(1.0, std::fabs(bounds[i].hi));
    if (!bounds[i].contains(qf[i], tol)) return false;
  }
  return true;
}

void adopt_oracle(ClosedFormSolution& sol, const EquilibriumDistribution& pi,
                  const Topology& topology, const std::vector<double>& qf,
                  const ClosedFormOptions& opts,
                  const std::vector<const WeightAssignment*>& warm) {
  std::optional<OracleSolution> best;
  std::vector<const WeightAssignment*> starts = warm;
  if (starts.empty()) starts.push_back(nullptr);
  for (const WeightAssignment* w : starts) {
    OracleOptions o = opts.oracle;
    if (w != nullptr) o.warm_start = *w;
    OracleSolution r = minimize_slem(pi, topology, qf, o);
    if (!best || r.slem < best->slem) best = std::move(r);
  }
  sol.q_opt = best->q_opt;
  sol.slem = best->slem;
  sol.source = SolutionSource::Oracle;
  sol.branch = "oracle";
}

void finalize(ClosedFormSolution& sol, const EquilibriumDistribution& pi,
              const Topology& topology) {
  sol.kkt_residual = kkt_residual(pi, sol.q_opt, topology, sol.slem);
}

void require_size(const EquilibriumDistribution& pi, std::size_t m) {
  if (pi.size() != 2 * m + 1) {
    throw InvalidArgument("distribution has " + std::to_string(pi.size()) +
                          " entries, expected " + std::to_string(2 * m + 1));
  }
}

struct M2Branch {
  std::vector<double> mu;
  double s = 0.0;
};

M2Branch m2_regime1(double p0, double s1, double s2) {
  return {{p0 / (p0 + s1), p0 / (p0 + s2)},
          guarded_sqrt(s1 * s2 / ((p0 + s1) * (p0 + s2)))};
}

M2Branch m2_regime2(double p0, double s1, double s2) {
  const double a0 = p0 * (s1 + s2) + 4.0 * s1 * s2;
  return {{p0 * (p0 + 2.0 * s2) / a0, p0 * (p0 + 2.0 * s1) / a0},
          (4.0 * s1 * s2 - p0 * p0) / a0};
}

struct TriangleWeights {
  double q13 = 0.0;
  double q23 = 0.0;
  double s = 0.0;
};

TriangleWeights m1_high(const TriangleMasses& t, double q) {
  const double c = t.center;
  return {c * (t.p1 - q) / (t.p1 + c), c * (t.p2 - q) / (t.p2 + c),
          std::fabs(t.p1 * t.p2 - (t.p1 + t.p2 + c) * q) /
              guarded_sqrt(t.p1 * t.p2 * (t.p1 + c) * (t.p2 + c))};
}

TriangleWeights m1_low(const TriangleMasses& t, double q) {
  const double c = t.center;
  const double b0 = 4.0 * t.p1 * t.p2 + c * (t.p1 + t.p2);
  return {(t.p1 * c * (2.0 * t.p2 + c + 2.0 * q) - 2.0 * t.p2 * c * q) / b0,
          (t.p2 * c * (2.0 * t.p1 + c + 2.0 * q) - 2.0 * t.p1 * c * q) / b0,
          (4.0 * t.p1 * t.p2 - c * c - 4.0 * q * (t.p1 + t.p2 + c)) / b0};
}

WeightAssignment triangle_assignment(double q12, const TriangleWeights& w) {
  WeightAssignment q;
  q.set(0, 1, w.q13);
  q.set(0, 2, w.q23);
  q.set(1, 2, q12);
  return q;
}

Candidate triangle_candidate(const TriangleMasses& t, double q12, const TriangleWeights& w,
                             std::string branch) {
  static const Topology triangle = build_friendship_graph(1);
  return assemble(t.canonical(), triangle, triangle_assignment(q12, w), w.s, std::move(branch));
}

bool m1_low_valid(const TriangleMasses& t, double q) {
  return triangle_candidate(t, q, m1_low(t, q), "m1-low").valid;
}

bool same_mass(double a, double b) {
  return std::fabs(a - b) <= 1e-15 * std::max(a, b);
}

}  // namespace

const char* to_string(RegimeTag tag) {
  switch (tag) {
    case RegimeTag::MGe3Interior:
      return "M_GE3_INTERIOR";
    case RegimeTag::MGe3Saturated:
      return "M_GE3_SATURATED";
    case RegimeTag::M2Regime1:
      return "M2_REGIME1";
    case RegimeTag::M2Regime2:
      return "M2_REGIME2";
    case RegimeTag::M1High:
      return "M1_HIGH";
    case RegimeTag::M1Low:
      return "M1_LOW";
    case RegimeTag::M1Middle:
      return "M1_MIDDLE";
  }
  return "UNKNOWN";
}

const char* to_string(SolutionSource source) {
  return source == SolutionSource::ClosedForm ? "closed-form" : "oracle";
}

TriangleMasses TriangleMasses::from_canonical(const EquilibriumDistribution& pi) {
  if (pi.size() != 3) throw InvalidArgument("triangle needs three masses");
  return {pi[1], pi[2], pi[0]};
}

EquilibriumDistribution TriangleMasses::canonical() const {
  return EquilibriumDistribution({center, p1, p2});
}

double m1_high_threshold(const TriangleMasses& t) {
  return std::max(0.0, (t.p1 * t.p2 - t.center * t.center) / (2.0 * t.center + t.p1 + t.p2));
}

double m1_collapse_point(const TriangleMasses& t) {
  return t.p1 * t.p2 / (t.p1 + t.p2 + t.center);
}

double m1_low_limit(const TriangleMasses& t) {
  if (t.center * t.center >= t.p1 * t.p2) return 0.0;
  if (same_mass(t.p1, t.p2)) return (t.p1 - t.center) / 2.0;
  double lo = 0.0;
  double hi = m1_high_threshold(t);
  if (!m1_low_valid(t, lo)) return 0.0;
  if (m1_low_valid(t, hi)) return hi;
  for (int it = 0; it < 100 && hi - lo > 1e-16 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (m1_low_valid(t, mid) ? lo : hi) = mid;
  }
  return lo;
}

Candidate m1_middle_candidate(const TriangleMasses& t, double q) {
  const double c = t.center;
  TriangleWeights w;
  if (same_mass(t.p1, t.p2)) {
    w = {c / 2.0, c / 2.0, 0.0};
  } else {
    w.q13 = (-t.p1 * t.p2 + t.p1 * c + (t.p1 + t.p2) * q) / (t.p1 - t.p2);
    w.q23 = c - w.q13;
  }
  const double sum = t.p1 + t.p2 + c;
  w.s = guarded_sqrt(1.0 - sum * (q * c + w.q13 * w.q23) / (t.p1 * t.p2 * c));
  return triangle_candidate(t, q, w, "m1-middle-derived");
}

Regime classify_regime(const EquilibriumDistribution& pi, std::size_t m,
                       const std::vector<double>& qf) {
  require_size(pi, m);
  if (m >= 3) {
    double total = 0.0;
    for (std::size_t v = 1; v < pi.size(); ++v) total += pi[v];
    const bool interior = total <= 2.0 * pi[0] * (1.0 + kBoundaryRel);
    return {interior ? RegimeTag::MGe3Interior : RegimeTag::MGe3Saturated, m};
  }
  if (m == 2) {
    const double lhs = pi[0] * pi[0];
    const double rhs = blade_mass(pi, 1) * blade_mass(pi, 2);
    return {lhs >= rhs * (1.0 - kBoundaryRel) ? RegimeTag::M2Regime1 : RegimeTag::M2Regime2, 2};
  }
  if (m == 1) {
    if (qf.size() != 1) throw InvalidArgument("m = 1 needs one fixed weight");
    const TriangleMasses t = TriangleMasses::from_canonical(pi);
    const double q = qf[0];
    if (t.center * t.center >= t.p1 * t.p2 || q >= m1_high_threshold(t)) {
      return {RegimeTag::M1High, 1};
    }
    return {m1_low_valid(t, q) ? RegimeTag::M1Low : RegimeTag::M1Middle, 1};
  }
  throw InvalidArgument("blade count must be >= 1");
}

ClosedFormSolution solve_m_ge3(const EquilibriumDistribution& pi, std::size_t m,
                               const std::vector<double>& qf, const ClosedFormOptions& opts) {
  if (m < 3) throw WrongRegime("solve_m_ge3 needs m >= 3");
  require_size(pi, m);
  const Topology topology = build_friendship_graph(m);
  check_fixed_weights(pi, topology, qf);

  ClosedFormSolution sol;
  sol.regime = classify_regime(pi, m, qf);
  double total = 0.0;
  for (std::size_t v = 1; v < pi.size(); ++v) total += pi[v];
  const double p0 = pi[0];
  double mu = 0.0;
  double s = 0.0;
  if (sol.regime.tag == RegimeTag::MGe3Interior) {
    mu = 2.0 * p0 / (2.0 * p0 + total);
    s = total / (2.0 * p0 + total);
    sol.branch = "m3-interior";
  } else {
    mu = p0 / total;
    s = (total - p0) / total;
    sol.branch = "m3-saturated";
  }
  for (std::size_t i = 1; i <= m; ++i) sol.qf_bounds.push_back({0.0, s * blade_min(pi, i)});
  sol.within_bounds = all_within(sol.qf_bounds, qf);

  Candidate c = assemble(pi, topology, ratio_weights(pi, topology, std::vector<double>(m, mu), qf),
                         s, sol.branch);
  sol.candidates.push_back(c);
  if (sol.within_bounds && c.valid) {
    sol.q_opt = c.q;
    sol.slem = s;
    sol.source = SolutionSource::ClosedForm;
  } else {
    adopt_oracle(sol, pi, topology, qf, opts, {});
  }
  finalize(sol, pi, topology);
  return sol;
}

ClosedFormSolution solve_m2(const EquilibriumDistribution& pi, const std::vector<double>& qf,
                            const ClosedFormOptions& opts) {
  if (pi.size() != 5) throw WrongRegime("solve_m2 needs m = 2 (five masses)");
  const Topology topology = build_friendship_graph(2);
  check_fixed_weights(pi, topology, qf);

  ClosedFormSolution sol;
  sol.regime = classify_regime(pi, 2, qf);
  const double p0 = pi[0];
  const double s1 = blade_mass(pi, 1);
  const double s2 = blade_mass(pi, 2);
  const M2Branch r1 = m2_regime1(p0, s1, s2);
  const M2Branch r2 = m2_regime2(p0, s1, s2);
  const Candidate c1 = assemble(pi, topology, ratio_weights(pi, topology, r1.mu, qf), r1.s, "m2-regime1");
  const Candidate c2 = assemble(pi, topology, ratio_weights(pi, topology, r2.mu, qf), r2.s, "m2-regime2");
  sol.candidates = {c1, c2};

  const bool first = sol.regime.tag == RegimeTag::M2Regime1;
  const M2Branch& b = first ? r1 : r2;
  const Candidate& primary = first ? c1 : c2;
  sol.branch = primary.branch;
  for (std::size_t i = 1; i <= 2; ++i) {
    const double mu = b.mu[i - 1];
    const double leaf = (1.0 - mu) * blade_min(pi, i);
    if (opts.paper_literal_bounds) {
      sol.qf_bounds.push_back({std::max(0.0, 1.0 - mu - b.s), leaf});
    } else {
      const double bi = pi[2 * i - 1] * pi[2 * i] / blade_mass(pi, i);
      sol.qf_bounds.push_back({std::max(0.0, bi * (1.0 - mu - b.s)),
                               std::min(bi * (1.0 - mu + b.s), leaf)});
    }
  }
  sol.within_bounds = all_within(sol.qf_bounds, qf);

  if (sol.within_bounds && primary.valid) {
    sol.q_opt = primary.q;
    sol.slem = b.s;
    sol.source = SolutionSource::ClosedForm;
  } else {
    std::vector<const WeightAssignment*> warm;
    if (primary.feasible) warm.push_back(&primary.q);
    adopt_oracle(sol, pi, topology, qf, opts, warm);
  }
  finalize(sol, pi, topology);
  return sol;
}

ClosedFormSolution solve_m1(const TriangleMasses& t, double q12, const ClosedFormOptions& opts) {
  const EquilibriumDistribution pi = t.canonical();
  if (!std::isfinite(q12) || q12 < 0.0) throw InvalidArgument("q12 must be finite and >= 0");
  const double limit = std::min(t.p1, t.p2);
  if (q12 > limit * (1.0 + kExactTolerance)) throw InfeasibleFixedWeight(1, q12, limit);
  const Topology topology = build_friendship_graph(1);
  const std::vector<double> qf{q12};

  ClosedFormSolution sol;
  sol.regime = classify_regime(pi, 1, qf);
  const Candidate high = triangle_candidate(t, q12, m1_high(t, q12), "m1-high");
  const Candidate low = triangle_candidate(t, q12, m1_low(t, q12), "m1-low");
  sol.candidates = {high, low};
  const bool has_middle = !same_mass(t.p1, t.p2) && t.center * t.center < t.p1 * t.p2;
  if (has_middle) sol.candidates.push_back(m1_middle_candidate(t, q12));

  const double threshold = m1_high_threshold(t);
  const double low_limit = m1_low_limit(t);
  switch (sol.regime.tag) {
    case RegimeTag::M1High:
      sol.qf_bounds = {{threshold, limit}};
      sol.branch = high.branch;
      break;
    case RegimeTag::M1Low:
      sol.qf_bounds = {{0.0, low_limit}};
      sol.branch = low.branch;
      break;
    default:
      sol.qf_bounds = {{low_limit, threshold}};
      sol.branch = "oracle";
      break;
  }
  sol.within_bounds = true;

  const Candidate* chosen = nullptr;
  if (sol.regime.tag == RegimeTag::M1High && high.valid) chosen = &high;
  if (sol.regime.tag == RegimeTag::M1Low && low.valid) chosen = &low;
  if (chosen != nullptr) {
    sol.q_opt = chosen->q;
    sol.slem = chosen->formula_slem;
    sol.source = SolutionSource::ClosedForm;
  } else {
    // The two neighbouring closed forms seed the numerical solve.
    adopt_oracle(sol, pi, topology, qf, opts, {&low.q, &high.q});
  }
  finalize(sol, pi, topology);
  return sol;
}

ClosedFormSolution solve(const EquilibriumDistribution& pi, const std::vector<double>& qf,
                         const ClosedFormOptions& opts) {
  if (pi.size() < 3 || pi.size() % 2 == 0) {
    throw InvalidArgument("friendship distribution needs 2m+1 entries");
  }
  const std::size_t m = (pi.size() - 1) / 2;
  if (m == 1) {
    if (qf.size() != 1) throw InvalidArgument("m = 1 needs one fixed weight");
    return solve_m1(TriangleMasses::from_canonical(pi), qf[0], opts);
  }
  if (m == 2) return solve_m2(pi, qf, opts);
  return solve_m_ge3(pi, m, qf, opts);
}

double kkt_residual(const EquilibriumDistribution& pi, const WeightAssignment& q,
                    const Topology& topology, double s) {
  double residual = 0.0;
  const FeasibilityReport report = validate_chain(pi, q, topology);
  for (const Violation& v : report.violations) residual = std::max(residual, v.magnitude);
  if (!report.feasible()) return std::max(residual, 1e-300);

  const SlemReport r = slem(pi, q, topology);
  residual = std::max(residual, std::fabs(r.slem - s));
  for (std::size_t k = 1; k < r.eigenvalues.size(); ++k)
    residual = std::max(residual, std::fabs(r.eigenvalues[k]) - s);
  if (topology.kind() == TopologyKind::Friendship && !ratio_violation(pi, q, topology)) {
    for (double single : block_diagonalize(pi, q, topology).singles)
      residual = std::max(residual, std::fabs(single) - s);
  }
  return std::max(0.0, residual);
}

}  // namespace fmmc
