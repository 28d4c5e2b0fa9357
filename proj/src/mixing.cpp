#include "fmmc/mixing.hpp"

#include <cmath>
#include <ostream>

#include "fmmc/error.hpp"
#include "fmmc/format.hpp"
#include "fmmc/kernels.hpp"
#include "fmmc/matrix.hpp"
#include "fmmc/spectral.hpp"

namespace fmmc {

double fit_decay_rate(const std::vector<double>& tv) {
  std::vector<double> usable;
  std::vector<double> ks;
  for (std::size_t k = 0; k < tv.size(); ++k) {
    if (tv[k] >= kTvFloor) {
      ks.push_back(static_cast<double>(k));
      usable.push_back(std::log(tv[k]));
    }
  }
  const std::size_t start = usable.size() / 2;
  const std::size_t n = usable.size() - start;
  if (n < 2) return 0.0;
  double mk = 0.0;
  double my = 0.0;
  for (std::size_t i = start; i < usable.size(); ++i) {
    mk += ks[i];
    my += usable[i];
  }
  mk /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = start; i < usable.size(); ++i) {
    sxy += (ks[i] - mk) * (usable[i] - my);
    sxx += (ks[i] - mk) * (ks[i] - mk);
  }
  return std::exp(sxy / sxx);
}

DecayTrace evolve(const TransitionMatrix& p, const std::vector<double>& p0, int steps) {
  const std::size_t n = p.size();
  if (steps < 0) throw InvalidArgument("steps must be >= 0");
  if (p0.size() != n) throw InvalidArgument("start distribution has the wrong size");
  double mass = 0.0;
  for (double x : p0) {
    if (!(x >= 0.0)) throw InvalidArgument("start distribution must be nonnegative");
    mass += x;
  }
  if (std::fabs(mass - 1.0) > 1e-12) throw InvalidArgument("start distribution must sum to 1");

  std::vector<double> target(n);
  const double total = p.pi().total();
  for (std::size_t i = 0; i < n; ++i) target[i] = p.pi()[i] / total;

  // Row-vector update p P computed as P^T p.
  const Matrix pt = p.matrix().transposed();
  DecayTrace trace;
  trace.steps = steps;
  std::vector<double> cur = p0;
  std::vector<double> next(n);
  for (int k = 0;; ++k) {
    trace.tv_distances.push_back(0.5 * kernels::abs_diff_sum(cur, target));
    if (k == steps) break;
    kernels::matvec(pt.data(), n, n, cur, next);
    cur.swap(next);
  }
  trace.fitted_rate = fit_decay_rate(trace.tv_distances);
  trace.degenerate = trace.fitted_rate == 0.0;
  trace.non_mixing = trace.fitted_rate >= 1.0 - 1e-9;
  return trace;
}

std::vector<double> worst_case_start(const EquilibriumDistribution& pi,
                                     const WeightAssignment& q, const Topology& topology) {
  const SlemReport r = slem(pi, q, topology);
  std::size_t best = 0;
  for (std::size_t v = 1; v < r.slow_mode.size(); ++v) {
    if (std::fabs(r.slow_mode[v]) > std::fabs(r.slow_mode[best])) best = v;
  }
  std::vector<double> p0(pi.size(), 0.0);
  p0[best] = 1.0;
  return p0;
}

MixingReport fitted_vs_slem(const EquilibriumDistribution& pi, const WeightAssignment& q,
                            const Topology& topology, int steps) {
  return fitted_vs_slem(pi, q, topology, steps, worst_case_start(pi, q, topology));
}

MixingReport fitted_vs_slem(const EquilibriumDistribution& pi, const WeightAssignment& q,
                            const Topology& topology, int steps,
                            const std::vector<double>& p0) {
  const TransitionMatrix p = build_transition_matrix(pi, q, topology);
  const SlemReport s = slem(pi, q, topology);
  if (s.reducible) throw ReducibleChain("chain is reducible (lambda_2 = 1)");
  if (s.slem >= 1.0 - 1e-10) throw ReducibleChain("chain is periodic (lambda_N = -1)");

  MixingReport r;
  r.slem = s.slem;
  r.trace = evolve(p, p0, steps);
  r.fitted_rate = r.trace.fitted_rate;
  r.degenerate = r.trace.degenerate;
  r.relative_gap = r.slem > 0.0 ? std::fabs(r.fitted_rate - r.slem) / r.slem
                                : std::fabs(r.fitted_rate);
  return r;
}

void write_trace_csv(std::ostream& out, const DecayTrace& trace) {
  out << "step,tv_distance\n";
  for (std::size_t k = 0; k < trace.tv_distances.size(); ++k) {
    out << k << ',' << format_double(trace.tv_distances[k]) << '\n';
  }
}

}  // namespace fmmc
