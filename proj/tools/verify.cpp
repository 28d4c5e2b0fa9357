#include "verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "fmmc/parallel.hpp"

namespace fmmc::cli {

namespace {

struct Named {
  VerifyRegime regime;
  const char* name;
};

constexpr Named kNames[] = {
    {VerifyRegime::M3Interior, "m3-interior"}, {VerifyRegime::M3Saturated, "m3-saturated"},
    {VerifyRegime::M2Regime1, "m2-regime1"},   {VerifyRegime::M2Regime2, "m2-regime2"},
    {VerifyRegime::M1High, "m1-high"},         {VerifyRegime::M1Low, "m1-low"},
    {VerifyRegime::M1Middle, "m1-middle"},
};

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::vector<double> masses(std::mt19937_64& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = uniform(rng, 0.2, 3.0);
  return v;
}

std::vector<double> inside(std::mt19937_64& rng, const std::vector<Interval>& bounds) {
  std::vector<double> qf;
  for (const Interval& b : bounds) qf.push_back(b.lo + uniform(rng, 0.0, 1.0) * (b.hi - b.lo));
  return qf;
}

VerifyInstance blades_instance(std::mt19937_64& rng, VerifyRegime regime) {
  const bool m3 = regime == VerifyRegime::M3Interior || regime == VerifyRegime::M3Saturated;
  const std::size_t m = m3 ? 3 + rng() % 4 : 2;
  std::vector<double> v = masses(rng, 2 * m + 1);
  double total = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i) total += v[i];
  const double s1s2 = (v[1] + v[2]) * (v[3] + v[4]);
  switch (regime) {
    case VerifyRegime::M3Interior:
      v[0] = 0.5 * total * uniform(rng, 1.0, 3.0);
      break;
    case VerifyRegime::M3Saturated:
      v[0] = 0.5 * total * uniform(rng, 0.05, 1.0);
      break;
    case VerifyRegime::M2Regime1:
      v[0] = std::sqrt(s1s2) * uniform(rng, 1.0, 3.0);
      break;
    default:
      v[0] = std::sqrt(s1s2) * uniform(rng, 0.05, 1.0);
      break;
  }
  EquilibriumDistribution pi(v);
  const auto bounds = solve(pi, std::vector<double>(m, 0.0)).qf_bounds;
  return {pi, inside(rng, bounds)};
}

VerifyInstance triangle_instance(std::mt19937_64& rng, VerifyRegime regime) {
  while (true) {
    TriangleMasses t{uniform(rng, 0.2, 3.0), uniform(rng, 0.2, 3.0), uniform(rng, 0.2, 3.0)};
    const double limit = std::min(t.p1, t.p2);
    if (regime == VerifyRegime::M1High) {
      const double thr = m1_high_threshold(t);
      return {t.canonical(), {thr + uniform(rng, 0.0, 1.0) * (limit - thr)}};
    }
    t.center = std::sqrt(t.p1 * t.p2) * uniform(rng, 0.05, 0.95);
    const double low = m1_low_limit(t);
    const double thr = m1_high_threshold(t);
    if (regime == VerifyRegime::M1Low) {
      if (low <= 0.0) continue;
      return {t.canonical(), {uniform(rng, 0.0, 1.0) * low}};
    }
    // Keep clear of both ends so the classification is not a rounding call.
    const double width = thr - low;
    if (width <= 1e-6 * thr) continue;
    return {t.canonical(), {low + uniform(rng, 0.01, 0.99) * width}};
  }
}

}  // namespace

const char* to_string(VerifyRegime regime) {
  for (const Named& n : kNames)
    if (n.regime == regime) return n.name;
  return "unknown";
}

std::optional<VerifyRegime> parse_verify_regime(const std::string& name) {
  for (const Named& n : kNames)
    if (name == n.name) return n.regime;
  return std::nullopt;
}

std::vector<VerifyRegime> all_verify_regimes() {
  std::vector<VerifyRegime> out;
  for (const Named& n : kNames) out.push_back(n.regime);
  return out;
}

std::vector<VerifyInstance> generate_instances(VerifyRegime regime, std::size_t count,
                                               std::uint64_t seed) {
  std::mt19937_64 rng(seed * 1000003ULL + static_cast<std::uint64_t>(regime));
  std::vector<VerifyInstance> out;
  out.reserve(count);
  const bool triangle = regime == VerifyRegime::M1High || regime == VerifyRegime::M1Low ||
                        regime == VerifyRegime::M1Middle;
  for (std::size_t k = 0; k < count; ++k) {
    out.push_back(triangle ? triangle_instance(rng, regime) : blades_instance(rng, regime));
  }
  return out;
}

VerifySummary run_verification(VerifyRegime regime, std::size_t count, std::uint64_t seed,
                               double tol) {
  VerifySummary s;
  s.regime = regime;
  s.instances = generate_instances(regime, count, seed);
  const auto& instances = s.instances;
  s.outcomes = parallel_map(instances.size(), [&](std::size_t k) {
    const VerifyInstance& inst = instances[k];
    const std::size_t m = (inst.pi.size() - 1) / 2;
    const ClosedFormSolution closed = solve(inst.pi, inst.qf);
    const OracleSolution oracle = minimize_slem(inst.pi, build_friendship_graph(m), inst.qf);
    const VerificationReport report = compare(closed, oracle, tol);
    VerifyOutcome o;
    o.index = k;
    o.regime = closed.regime;
    o.source = closed.source;
    o.closed_slem = closed.slem;
    o.oracle_slem = oracle.slem;
    o.slem_delta = report.slem_delta;
    o.max_edge_delta = report.max_edge_delta;
    o.pass = report.pass;
    return o;
  });
  for (std::size_t k = 0; k < s.outcomes.size(); ++k) {
    const VerifyOutcome& o = s.outcomes[k];
    s.failures += !o.pass;
    s.oracle_fallbacks += o.source == SolutionSource::Oracle;
    if (o.slem_delta > s.outcomes[s.worst].slem_delta) s.worst = k;
  }
  return s;
}

std::vector<BoundaryRow> m2_boundary_sweep(double lo, double hi, int points) {
  std::vector<double> pi0s;
  for (int k = 0; k < points; ++k) {
    pi0s.push_back(points == 1 ? lo : lo + (hi - lo) * k / (points - 1));
  }
  if (std::find(pi0s.begin(), pi0s.end(), 1.0) == pi0s.end() && lo <= 1.0 && hi >= 1.0) {
    pi0s.insert(std::upper_bound(pi0s.begin(), pi0s.end(), 1.0), 1.0);
  }

  OracleOptions tight;
  tight.tol = 1e-10;
  return parallel_map(pi0s.size(), [&](std::size_t k) {
    const double pi0 = pi0s[k];
    const EquilibriumDistribution pi({pi0, 1.0, 1.0, 0.25, 0.25});
    ClosedFormOptions opts;
    opts.oracle = tight;
    // Fixed weights at their lower limits, the smallest admissible choice.
    std::vector<double> qf;
    for (const Interval& b : solve_m2(pi, {0.0, 0.0}, opts).qf_bounds) qf.push_back(b.lo);
    const ClosedFormSolution sol = solve_m2(pi, qf, opts);
    const OracleSolution oracle =
        minimize_slem_multistart(pi, build_friendship_graph(2), qf, tight, 3);

    BoundaryRow row;
    row.pi0 = pi0;
    row.qf = qf;
    row.boundary_offset = pi0 * pi0 - 1.0;
    row.classified = sol.regime.tag;
    const auto fill = [&](const Candidate& c) {
      return BoundaryCandidate{c.formula_slem, c.assembled_slem, c.valid};
    };
    row.regime1 = fill(sol.candidates[0]);
    row.regime2 = fill(sol.candidates[1]);
    row.oracle_slem = oracle.slem;
    row.solver_slem = sol.slem;
    row.source = sol.source;
    const auto wins = [&](const BoundaryCandidate& c) {
      return c.valid && std::fabs(c.formula_slem - oracle.slem) <= 1e-7;
    };
    const bool w1 = wins(row.regime1);
    const bool w2 = wins(row.regime2);
    row.optimal_branch = w1 && w2 ? "both" : w1 ? "regime1" : w2 ? "regime2" : "neither";
    return row;
  });
}

}  // namespace fmmc::cli
