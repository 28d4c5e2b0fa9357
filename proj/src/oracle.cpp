#include "fmmc/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "fmmc/closed_form.hpp"
#include "fmmc/error.hpp"
#include "fmmc/matrix.hpp"
#include "fmmc/parallel.hpp"
#include "fmmc/reduction.hpp"
#include "fmmc/spectral.hpp"

namespace fmmc {

namespace {

// Center edges whose room is below this are pinned at zero.
constexpr double kPinnedCap = 1e-14;

struct FreeEdge {
  std::size_t a = 0;
  std::size_t b = 0;
  double alpha = 0.0;  // 1/sqrt(pi_a)
  double beta = 0.0;   // -1/sqrt(pi_b)
  double cap = 0.0;
};

struct Budget {
  std::size_t vertex = 0;
  double room = 0.0;
  std::vector<std::size_t> edges;  // indices into Model::free
};

// The optimization problem with fixed weights folded into a base matrix.
struct Model {
  const Topology* topology = nullptr;
  std::size_t n = 0;
  std::vector<double> pi;
  Matrix base;  // I - u u^T - D^{-1/2} L(fixed) D^{-1/2}
  std::vector<FreeEdge> free;
  std::vector<Edge> pinned;
  std::vector<std::pair<Edge, double>> fixed;
  std::vector<Budget> budgets;

  std::size_t dim() const { return free.size(); }

  Matrix a_of(const std::vector<double>& q) const {
    Matrix a = base;
    for (std::size_t j = 0; j < free.size(); ++j) {
      const FreeEdge& e = free[j];
      a(e.a, e.a) -= q[j] * e.alpha * e.alpha;
      a(e.b, e.b) -= q[j] * e.beta * e.beta;
      a(e.a, e.b) -= q[j] * e.alpha * e.beta;
      a(e.b, e.a) -= q[j] * e.alpha * e.beta;
    }
    return a;
  }

  bool feasible(const std::vector<double>& q, double slack = 0.0) const {
    for (std::size_t j = 0; j < q.size(); ++j)
      if (q[j] < -slack || q[j] > free[j].cap + slack) return false;
    for (const Budget& b : budgets) {
      double used = 0.0;
      for (std::size_t j : b.edges) used += q[j];
      if (used > b.room + slack) return false;
    }
    return true;
  }

  WeightAssignment weights(const std::vector<double>& q) const {
    WeightAssignment w;
    for (const auto& [e, value] : fixed) w.set(e.u, e.v, value);
    for (const Edge& e : pinned) w.set(e.u, e.v, 0.0);
    for (std::size_t j = 0; j < free.size(); ++j)
      w.set(free[j].a, free[j].b, std::max(0.0, q[j]));
    return w;
  }
};

// Largest |eigenvalue| of A(q) with a unit eigenvector; this is the SLEM
// because the Perron direction has been projected out.
struct Extreme {
  double value = 0.0;    // signed eigenvalue attaining the modulus
  double modulus = 0.0;
  std::vector<double> vector;
};

Extreme extreme_eigen(const Model& model, const std::vector<double>& q) {
  const auto eig = eigen_symmetric(model.a_of(q));
  const std::size_t last = eig.values.size() - 1;
  const bool low = -eig.values[last] > eig.values[0];
  const std::size_t k = low ? last : 0;
  return {eig.values[k], std::fabs(eig.values[k]), eig.vectors.column(k)};
}

// Subgradient of |lambda|_max with respect to the free weights.
std::vector<double> subgradient(const Model& model, const Extreme& ex) {
  std::vector<double> g(model.dim());
  const double sign = ex.value >= 0.0 ? 1.0 : -1.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const FreeEdge& e = model.free[j];
    const double vw = e.alpha * ex.vector[e.a] + e.beta * ex.vector[e.b];
    g[j] = -sign * vw * vw;
  }
  return g;
}

Model build_model(const EquilibriumDistribution& pi, const Topology& topology,
                  const std::vector<double>& qf) {
  check_fixed_weights(pi, topology, qf);
  Model model;
  model.topology = &topology;
  model.n = topology.vertex_count();
  model.pi.assign(pi.values().begin(), pi.values().end());

  std::vector<double> room(model.pi);
  for (std::size_t i = 0; i < topology.friend_edges().size(); ++i) {
    const Edge e = topology.friend_edges()[i];
    model.fixed.emplace_back(e, qf[i]);
    room[e.u] -= qf[i];
    room[e.v] -= qf[i];
  }
  for (double& r : room) r = std::max(0.0, r);

  Budget center{0, room[0], {}};
  for (const Edge& e : topology.center_edges()) {
    const double cap = std::min(room[0], room[e.v]);
    if (cap <= kPinnedCap * std::max(1.0, model.pi[e.v])) {
      model.pinned.push_back(e);
      continue;
    }
    center.edges.push_back(model.free.size());
    model.free.push_back({e.u, e.v, 1.0 / std::sqrt(model.pi[e.u]),
                          -1.0 / std::sqrt(model.pi[e.v]), cap});
    model.budgets.push_back({e.v, room[e.v], {model.free.size() - 1}});
  }
  if (!center.edges.empty()) model.budgets.push_back(center);

  const std::size_t n = model.n;
  double total = 0.0;
  for (double p : model.pi) total += p;
  model.base = Matrix::identity(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      model.base(i, j) -= std::sqrt(model.pi[i] * model.pi[j]) / total;
  for (const auto& [e, w] : model.fixed) {
    const double x = 1.0 / std::sqrt(model.pi[e.u]);
    const double y = -1.0 / std::sqrt(model.pi[e.v]);
    model.base(e.u, e.u) -= w * x * x;
    model.base(e.v, e.v) -= w * y * y;
    model.base(e.u, e.v) -= w * x * y;
    model.base(e.v, e.u) -= w * x * y;
  }
  return model;
}

// A strictly interior point: every free weight takes a random share in
// [1/4, 3/4] of an even split of its tightest budget.
std::vector<double> interior_start(const Model& model, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> share(0.25, 0.75);
  std::vector<double> q(model.dim());
  for (std::size_t j = 0; j < q.size(); ++j) {
    double cap = model.free[j].cap;
    for (const Budget& b : model.budgets)
      if (b.edges.size() > 1 &&
          std::find(b.edges.begin(), b.edges.end(), j) != b.edges.end())
        cap = std::min(cap, b.room / static_cast<double>(b.edges.size()));
    q[j] = share(rng) * cap;
  }
  return q;
}

std::vector<double> initial_point(const Model& model, const OracleOptions& opts) {
  std::vector<double> q = interior_start(model, opts.seed);
  if (!opts.warm_start) return q;
  std::vector<double> warm(model.dim());
  for (std::size_t j = 0; j < warm.size(); ++j)
    warm[j] = std::clamp(opts.warm_start->get(model.free[j].a, model.free[j].b),
                         0.0, model.free[j].cap);
  if (!model.feasible(warm)) return q;
  // A convex combination with an interior point stays interior.
  for (std::size_t j = 0; j < q.size(); ++j) q[j] = 0.9 * warm[j] + 0.1 * q[j];
  return q;
}

double barrier_nu(const Model& model) {
  return 2.0 * static_cast<double>(model.n) + static_cast<double>(model.dim()) +
         static_cast<double>(model.budgets.size());
}

struct BarrierEval {
  double phi = 0.0;
  std::vector<double> grad;
  Matrix hess;
};

// Barrier objective t*s - logdet(sI - A) - logdet(sI + A) - sum log q
// - sum log slack. Returns nullopt outside the domain.
std::optional<double> barrier_value(const Model& model, const std::vector<double>& x,
                                    double t) {
  const std::size_t d = model.dim();
  const double s = x[d];
  double phi = t * s;
  for (std::size_t j = 0; j < d; ++j) {
    if (!(x[j] > 0.0)) return std::nullopt;
    phi -= std::log(x[j]);
  }
  for (const Budget& b : model.budgets) {
    double slack = b.room;
    for (std::size_t j : b.edges) slack -= x[j];
    if (!(slack > 0.0)) return std::nullopt;
    phi -= std::log(slack);
  }
  const Matrix a = model.a_of(x);
  Matrix fp(model.n, model.n);
  Matrix fm(model.n, model.n);
  for (std::size_t i = 0; i < model.n; ++i)
    for (std::size_t j = 0; j < model.n; ++j) {
      const double id = i == j ? s : 0.0;
      fp(i, j) = id - a(i, j);
      fm(i, j) = id + a(i, j);
    }
  const auto lp = cholesky(fp);
  if (!lp) return std::nullopt;
  const auto lm = cholesky(fm);
  if (!lm) return std::nullopt;
  return phi - cholesky_logdet(*lp) - cholesky_logdet(*lm);
}

BarrierEval barrier_derivatives(const Model& model, const std::vector<double>& x,
                                double t) {
  const std::size_t d = model.dim();
  const std::size_t n = model.n;
  const double s = x[d];
  const Matrix a = model.a_of(x);
  Matrix fp(n, n);
  Matrix fm(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double id = i == j ? s : 0.0;
      fp(i, j) = id - a(i, j);
      fm(i, j) = id + a(i, j);
    }
  const Matrix gp = cholesky_inverse(*cholesky(fp));
  const Matrix gm = cholesky_inverse(*cholesky(fm));

  BarrierEval ev;
  ev.grad.assign(d + 1, 0.0);
  ev.hess = Matrix(d + 1, d + 1);

  const auto quad = [&](const Matrix& g, const FreeEdge& p, const FreeEdge& r) {
    return p.alpha * r.alpha * g(p.a, r.a) + p.alpha * r.beta * g(p.a, r.b) +
           p.beta * r.alpha * g(p.b, r.a) + p.beta * r.beta * g(p.b, r.b);
  };
  // |G v|^2 for v = alpha e_a + beta e_b.
  const auto sq_norm = [&](const Matrix& g, const FreeEdge& e) {
    double sum = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double w = e.alpha * g(r, e.a) + e.beta * g(r, e.b);
      sum += w * w;
    }
    return sum;
  };

  for (std::size_t j = 0; j < d; ++j) {
    const FreeEdge& ej = model.free[j];
    ev.grad[j] = -quad(gp, ej, ej) + quad(gm, ej, ej) - 1.0 / x[j];
    ev.hess(j, j) += 1.0 / (x[j] * x[j]);
    for (std::size_t l = 0; l <= j; ++l) {
      const FreeEdge& el = model.free[l];
      const double p = quad(gp, ej, el);
      const double m = quad(gm, ej, el);
      ev.hess(j, l) += p * p + m * m;
      if (l != j) ev.hess(l, j) = ev.hess(j, l);
    }
    const double cross = sq_norm(gp, ej) - sq_norm(gm, ej);
    ev.hess(j, d) = cross;
    ev.hess(d, j) = cross;
  }
  for (const Budget& b : model.budgets) {
    double slack = b.room;
    for (std::size_t j : b.edges) slack -= x[j];
    for (std::size_t j : b.edges) {
      ev.grad[j] += 1.0 / slack;
      for (std::size_t l : b.edges) ev.hess(j, l) += 1.0 / (slack * slack);
    }
  }
  double trace = 0.0;
  double frob = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    trace += gp(i, i) + gm(i, i);
    for (std::size_t j = 0; j < n; ++j) frob += gp(i, j) * gp(i, j) + gm(i, j) * gm(i, j);
  }
  ev.grad[d] = t - trace;
  ev.hess(d, d) = frob;
  return ev;
}

std::vector<double> newton_direction(BarrierEval& ev) {
  const std::size_t k = ev.grad.size();
  std::vector<double> rhs(k);
  for (std::size_t i = 0; i < k; ++i) rhs[i] = -ev.grad[i];
  auto l = cholesky(ev.hess);
  double shift = 0.0;
  for (std::size_t i = 0; i < k; ++i) shift = std::max(shift, ev.hess(i, i));
  shift *= 1e-14;
  while (!l) {
    for (std::size_t i = 0; i < k; ++i) ev.hess(i, i) += shift;
    shift *= 10.0;
    l = cholesky(ev.hess);
  }
  return cholesky_solve(*l, rhs);
}

OracleSolution finish(const Model& model, const EquilibriumDistribution& pi,
                      const std::vector<double>& q, double lower_bound,
                      int iterations, bool within_budget, double tol) {
  OracleSolution sol;
  sol.q_opt = model.weights(q);
  sol.slem = fast_slem(pi, sol.q_opt, *model.topology).slem;
  sol.iterations = iterations;
  sol.certificate_gap = std::max(0.0, sol.slem - lower_bound);
  sol.converged = within_budget && sol.certificate_gap <= tol;
  return sol;
}

OracleSolution solve_barrier(const Model& model, const EquilibriumDistribution& pi,
                             const OracleOptions& opts) {
  const std::size_t d = model.dim();
  std::vector<double> x = initial_point(model, opts);
  x.push_back(extreme_eigen(model, x).modulus + 0.5);

  const double nu = barrier_nu(model);
  // The reported gap includes eigensolver rounding, so aim well below tol.
  const double target = std::clamp(opts.tol * 1e-2, 1e-12, 1e-3);
  double t = nu;
  int iterations = 0;
  bool budget_ok = true;

  while (true) {
    for (int inner = 0; inner < 200; ++inner) {
      if (iterations >= opts.max_iter) {
        budget_ok = false;
        break;
      }
      BarrierEval ev = barrier_derivatives(model, x, t);
      const std::vector<double> dx = newton_direction(ev);
      double decrement = 0.0;
      for (std::size_t i = 0; i <= d; ++i) decrement -= ev.grad[i] * dx[i];
      ++iterations;
      if (decrement / 2.0 <= 1e-10) break;

      const auto phi0 = barrier_value(model, x, t);
      double step = 1.0;
      bool moved = false;
      std::vector<double> trial(d + 1);
      while (step > 1e-14) {
        for (std::size_t i = 0; i <= d; ++i) trial[i] = x[i] + step * dx[i];
        const auto phi = barrier_value(model, trial, t);
        if (phi && *phi <= *phi0 - 0.25 * step * decrement) {
          moved = true;
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;  // rounding floor for this t
      x = trial;
    }
    if (!budget_ok || nu / t <= target) break;
    t *= 8.0;
  }
  std::vector<double> q(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(d));
  return finish(model, pi, q, x[d] - nu / t, iterations, budget_ok, opts.tol);
}

// Euclidean projection onto the box [0, cap] intersected with every
// multi-edge budget (in practice only the center's).
std::vector<double> project(const Model& model, std::vector<double> y) {
  for (std::size_t j = 0; j < y.size(); ++j) y[j] = std::clamp(y[j], 0.0, model.free[j].cap);
  for (const Budget& b : model.budgets) {
    if (b.edges.size() < 2) continue;
    double used = 0.0;
    for (std::size_t j : b.edges) used += y[j];
    if (used <= b.room) continue;
    double lo = 0.0;
    double hi = 0.0;
    for (std::size_t j : b.edges) hi = std::max(hi, y[j]);
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      double sum = 0.0;
      for (std::size_t j : b.edges) sum += std::clamp(y[j] - mid, 0.0, model.free[j].cap);
      (sum > b.room ? lo : hi) = mid;
    }
    for (std::size_t j : b.edges) y[j] = std::clamp(y[j] - hi, 0.0, model.free[j].cap);
  }
  return y;
}

OracleSolution solve_subgradient(const Model& model, const EquilibriumDistribution& pi,
                                 const OracleOptions& opts) {
  std::vector<double> q = initial_point(model, opts);
  std::vector<double> best = q;
  double best_f = extreme_eigen(model, q).modulus;
  double delta = 0.1 * std::max(best_f, 1e-3);
  int since_improvement = 0;
  int iterations = 0;
  bool converged = false;
  for (; iterations < opts.max_iter; ++iterations) {
    const Extreme ex = extreme_eigen(model, q);
    if (ex.modulus < best_f) {
      if (best_f - ex.modulus > opts.tol * 1e-2) since_improvement = 0;
      best_f = ex.modulus;
      best = q;
    } else {
      ++since_improvement;
    }
    const std::vector<double> g = subgradient(model, ex);
    double g2 = 0.0;
    for (double v : g) g2 += v * v;
    if (g2 == 0.0) {
      converged = true;
      break;
    }
    // Polyak step towards a target below the best value; the target moves
    // closer when it is reached and further when progress stalls.
    const double target = best_f - delta;
    const double step = (ex.modulus - target) / g2;
    for (std::size_t j = 0; j < q.size(); ++j) q[j] -= step * g[j];
    q = project(model, std::move(q));
    if (ex.modulus <= target + 1e-15) {
      delta *= 1.5;
    } else {
      delta = std::max(0.97 * delta, 1e-14);
    }
    if (delta < opts.tol * 1e-2 && since_improvement > 2000) {
      converged = true;
      break;
    }
  }
  // No dual bound is tracked; the final target offset stands in for it.
  OracleSolution sol = finish(model, pi, best, best_f - delta, iterations, true, opts.tol);
  sol.converged = converged && sol.certificate_gap <= opts.tol;
  return sol;
}

// Ellipsoid refinement around `center` over a region of `radius` per
// coordinate. Returns the best point found and a local lower bound.
struct Refined {
  std::vector<double> q;
  double value = 0.0;
  double lower = -std::numeric_limits<double>::infinity();
  int steps = 0;
};

Refined refine_1d(const Model& model, const std::vector<double>& center,
                  double value, double radius) {
  Refined r{center, value, -std::numeric_limits<double>::infinity(), 0};
  double lo = std::max(0.0, center[0] - radius);
  double hi = std::min(model.free[0].cap, center[0] + radius);
  for (const Budget& b : model.budgets) hi = std::min(hi, b.room);
  std::vector<double> x(1);
  for (int it = 0; it < 80 && hi - lo > 1e-15; ++it) {
    x[0] = 0.5 * (lo + hi);
    ++r.steps;
    const Extreme ex = extreme_eigen(model, x);
    if (ex.modulus < r.value) {
      r.value = ex.modulus;
      r.q = x;
    }
    const double g = subgradient(model, ex)[0];
    if (g > 0.0) {
      hi = x[0];
    } else if (g < 0.0) {
      lo = x[0];
    } else {
      break;
    }
  }
  return r;
}

Refined refine_ellipsoid(const Model& model, const std::vector<double>& center,
                         double value, const std::vector<double>& radius) {
  const std::size_t d = center.size();
  const double dd = static_cast<double>(d);
  Refined r{center, value, -std::numeric_limits<double>::infinity(), 0};
  std::vector<double> x = center;
  Matrix p(d, d);
  for (std::size_t j = 0; j < d; ++j) p(j, j) = dd * radius[j] * radius[j];

  const int steps = 60 * static_cast<int>(d * (d + 1));
  std::vector<double> g(d);
  std::vector<double> pg(d);
  for (int it = 0; it < steps; ++it) {
    ++r.steps;
    // Feasibility cut from the most violated constraint, if any.
    double worst = 0.0;
    std::fill(g.begin(), g.end(), 0.0);
    for (std::size_t j = 0; j < d; ++j) {
      if (-x[j] > worst) {
        worst = -x[j];
        std::fill(g.begin(), g.end(), 0.0);
        g[j] = -1.0;
      }
      if (x[j] - model.free[j].cap > worst) {
        worst = x[j] - model.free[j].cap;
        std::fill(g.begin(), g.end(), 0.0);
        g[j] = 1.0;
      }
    }
    for (const Budget& b : model.budgets) {
      double used = -b.room;
      for (std::size_t j : b.edges) used += x[j];
      if (used > worst) {
        worst = used;
        std::fill(g.begin(), g.end(), 0.0);
        for (std::size_t j : b.edges) g[j] = 1.0;
      }
    }
    const bool objective_cut = worst <= 0.0;
    double f = 0.0;
    if (objective_cut) {
      const Extreme ex = extreme_eigen(model, x);
      f = ex.modulus;
      if (f < r.value) {
        r.value = f;
        r.q = x;
      }
      g = subgradient(model, ex);
    }
    for (std::size_t i = 0; i < d; ++i) {
      pg[i] = 0.0;
      for (std::size_t j = 0; j < d; ++j) pg[i] += p(i, j) * g[j];
    }
    double gpg = 0.0;
    for (std::size_t i = 0; i < d; ++i) gpg += g[i] * pg[i];
    if (!(gpg > 0.0)) break;
    const double norm = std::sqrt(gpg);
    if (objective_cut) r.lower = std::max(r.lower, f - norm);
    for (std::size_t i = 0; i < d; ++i) x[i] -= pg[i] / (norm * (dd + 1.0));
    const double shrink = dd * dd / (dd * dd - 1.0);
    const double rank1 = 2.0 / ((dd + 1.0) * gpg);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) p(i, j) = shrink * (p(i, j) - rank1 * pg[i] * pg[j]);
    if (gpg < 1e-30) break;
  }
  return r;
}

}  // namespace

void check_fixed_weights(const EquilibriumDistribution& pi, const Topology& topology,
                         const std::vector<double>& qf) {
  if (pi.size() != topology.vertex_count()) {
    throw InvalidArgument("distribution size does not match topology");
  }
  if (qf.size() != topology.friend_edges().size()) {
    throw InvalidArgument("expected " + std::to_string(topology.friend_edges().size()) +
                          " fixed friend weights, got " + std::to_string(qf.size()));
  }
  for (std::size_t i = 0; i < qf.size(); ++i) {
    if (!std::isfinite(qf[i]) || qf[i] < 0.0) {
      throw InvalidArgument("fixed friend weights must be finite and >= 0");
    }
    const Edge e = topology.friend_edges()[i];
    const double limit = std::min(pi[e.u], pi[e.v]);
    if (qf[i] > limit * (1.0 + kExactTolerance)) {
      throw InfeasibleFixedWeight(i + 1, qf[i], limit);
    }
  }
}

OracleSolution minimize_slem(const EquilibriumDistribution& pi, const Topology& topology,
                             const std::vector<double>& qf, const OracleOptions& opts) {
  if (!(opts.tol > 0.0)) throw InvalidArgument("oracle tolerance must be > 0");
  const Model model = build_model(pi, topology, qf);
  if (model.dim() == 0) {
    return finish(model, pi, {}, 0.0, 0, true, std::numeric_limits<double>::infinity());
  }
  return opts.method == OracleMethod::Barrier ? solve_barrier(model, pi, opts)
                                              : solve_subgradient(model, pi, opts);
}

OracleSolution minimize_slem_multistart(const EquilibriumDistribution& pi,
                                        const Topology& topology,
                                        const std::vector<double>& qf,
                                        const OracleOptions& opts, std::size_t starts) {
  if (starts == 0) throw InvalidArgument("multistart needs at least one start");
  auto runs = parallel_map(starts, [&](std::size_t i) {
    OracleOptions o = opts;
    o.seed = opts.seed + i;
    return minimize_slem(pi, topology, qf, o);
  });
  const auto key = [&](const OracleSolution& s) {
    std::vector<double> k;
    for (const Edge& e : topology.center_edges()) k.push_back(s.q_opt.get(e.u, e.v));
    return k;
  };
  std::size_t best = 0;
  for (std::size_t i = 1; i < runs.size(); ++i) {
    if (runs[i].slem < runs[best].slem ||
        (runs[i].slem == runs[best].slem && key(runs[i]) < key(runs[best]))) {
      best = i;
    }
  }
  return runs[best];
}

OracleSolution brute_force_grid(const EquilibriumDistribution& pi, const Topology& topology,
                                const std::vector<double>& qf, int resolution) {
  if (topology.kind() == TopologyKind::Friendship && topology.m() >= 3) {
    throw TooLarge("brute_force_grid handles m <= 2; use minimize_slem");
  }
  if (resolution < 1) throw InvalidArgument("grid resolution must be >= 1");
  const Model model = build_model(pi, topology, qf);
  const std::size_t d = model.dim();
  if (d > 4) throw TooLarge("brute_force_grid handles at most four free weights");
  if (d == 0) {
    return finish(model, pi, {}, 0.0, 0, true, std::numeric_limits<double>::infinity());
  }

  const auto res = static_cast<std::size_t>(resolution);
  std::vector<std::size_t> idx(d, 0);
  std::vector<double> q(d);
  std::vector<double> best_q;
  double best = std::numeric_limits<double>::infinity();
  int evaluations = 0;
  while (true) {
    for (std::size_t j = 0; j < d; ++j)
      q[j] = model.free[j].cap * (static_cast<double>(idx[j]) / static_cast<double>(res));
    if (model.feasible(q, 1e-15)) {
      ++evaluations;
      const double f = extreme_eigen(model, q).modulus;
      if (f < best) {
        best = f;
        best_q = q;
      }
    }
    std::size_t j = d;
    while (j > 0 && idx[j - 1] == res) idx[--j] = 0;
    if (j == 0) break;
    ++idx[j - 1];
  }

  // Local refinement, re-centred while the best point drifts to the edge of
  // the search region.
  std::vector<double> radius(d);
  for (std::size_t j = 0; j < d; ++j) radius[j] = 2.0 * model.free[j].cap / static_cast<double>(res);
  Refined r{best_q, best, -std::numeric_limits<double>::infinity(), 0};
  for (int round = 0; round < 8; ++round) {
    const std::vector<double> center = r.q;
    Refined next = d == 1 ? refine_1d(model, center, r.value, radius[0])
                          : refine_ellipsoid(model, center, r.value, radius);
    next.steps += r.steps;
    double drift = 0.0;
    for (std::size_t j = 0; j < d; ++j)
      drift = std::max(drift, std::fabs(next.q[j] - center[j]) / radius[j]);
    r = next;
    if (drift < 0.8) break;
  }

  OracleSolution sol = finish(model, pi, r.q, r.lower, evaluations + r.steps, true,
                              std::numeric_limits<double>::infinity());
  sol.grid_slem = best;
  return sol;
}

VerificationReport compare(const ClosedFormSolution& closed, const OracleSolution& oracle,
                           double tol) {
  VerificationReport report;
  report.slem_delta = std::fabs(closed.slem - oracle.slem);
  std::vector<Edge> edges;
  for (const auto& [key, value] : closed.q_opt.entries())
    if (key.first < key.second) edges.push_back({key.first, key.second});
  for (const auto& [key, value] : oracle.q_opt.entries())
    if (key.first < key.second) edges.push_back({key.first, key.second});
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  for (const Edge& e : edges) {
    const double delta = std::fabs(closed.q_opt.get(e.u, e.v) - oracle.q_opt.get(e.u, e.v));
    report.edge_deltas.push_back({e, delta});
    report.max_edge_delta = std::max(report.max_edge_delta, delta);
  }
  report.pass = report.slem_delta <= tol;
  return report;
}

}  // namespace fmmc
