#pragma once

// Time integration of full and reduced systems with constraint projection and
// energy bookkeeping.

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hocon/assembler.hpp"
#include "hocon/reduction.hpp"

namespace hocon {

enum class Method { ExplicitRK4OnSolvedAccel, ImplicitMidpoint };
enum class ProjectionMode { None, PostStep };

struct IntegratorOptions {
  double dt = 1e-3;
  Method method = Method::ExplicitRK4OnSolvedAccel;
  ProjectionMode projection = ProjectionMode::PostStep;
  double baumgarte_alpha = 0.0;
  double baumgarte_beta = 0.0;
  double cons_tol = 1e-10;
  double solve_tol = 1e-8;

  void validate() const {
    if (!(dt > 0.0)) throw ConfigurationError("dt must be positive");
    if (baumgarte_alpha < 0.0 || baumgarte_beta < 0.0)
      throw ConfigurationError("Baumgarte gains must be non-negative");
    if (!(cons_tol > 0.0) || !(solve_tol > 0.0))
      throw ConfigurationError("tolerances must be positive");
  }

  SolveOptions solve_options() const {
    SolveOptions o;
    o.solve_tol = solve_tol;
    o.cons_tol = cons_tol;
    o.gains = {baumgarte_alpha, baumgarte_beta};
    return o;
  }
};

struct Trajectory {
  std::vector<double> times;
  std::vector<State> states;
  std::vector<Vec> qdds;
  std::vector<Vec> lambdas;
  std::vector<double> energy;
  std::vector<double> kin_residual;
  std::vector<double> power;

  size_t size() const { return times.size(); }
};

struct Violation {
  std::string row;
  double value = 0.0;
  std::string what;
};

struct InitialCheck {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  std::vector<std::string> rows() const {
    std::vector<std::string> r;
    for (const auto& v : violations) r.push_back(v.row);
    return r;
  }
  std::string message() const {
    std::ostringstream os;
    for (size_t i = 0; i < violations.size(); ++i)
      os << (i ? "; " : "") << violations[i].row << ": " << violations[i].what;
    return os.str();
  }
};

namespace detail {

[[noreturn]] inline void rethrow_at(const Error& e, double t, const State& s) {
  std::ostringstream os;
  os.precision(17);
  os << e.detail() << " (at t = " << t << ", q = [" << s.q.transpose() << "], qd = ["
     << s.qd.transpose() << "])";
  const std::string w = os.str();
  switch (e.kind()) {
    case ErrorKind::InconsistentDynamics:
      throw InconsistentDynamicsError(
          w, dynamic_cast<const InconsistentDynamicsError*>(&e)
                 ? dynamic_cast<const InconsistentDynamicsError&>(e).residual()
                 : 0.0,
          e.rows());
    case ErrorKind::Ambiguity:
      throw AmbiguityError(w, dynamic_cast<const AmbiguityError*>(&e)
                                  ? dynamic_cast<const AmbiguityError&>(e).nullspace_dim()
                                  : 0);
    case ErrorKind::ModelDomain: {
      const auto* m = dynamic_cast<const ModelDomainError*>(&e);
      const std::string g = m ? m->guard() : "domain";
      std::string rest = w.rfind(g + ": ", 0) == 0 ? w.substr(g.size() + 2) : w;
      throw ModelDomainError(g, rest);
    }
    case ErrorKind::InconsistentState: throw InconsistentStateError(w, e.rows());
    case ErrorKind::Projection: throw ProjectionError(w);
    case ErrorKind::Evaluation: throw EvaluationError(w);
    case ErrorKind::UnsupportedConstraint: throw UnsupportedConstraintError(w);
    case ErrorKind::Usage: throw UsageError(w);
    case ErrorKind::Configuration: throw ConfigurationError(w);
  }
  throw e;
}

/// Rows of the kinematic set with the given order.
inline std::vector<int> rows_of_order(const KinematicConstraintSet& k, int order) {
  std::vector<int> idx;
  for (int i = 0; i < k.rows(); ++i)
    if (k.row_orders()[static_cast<size_t>(i)] == order) idx.push_back(i);
  return idx;
}

inline Derivs<double> kin_jet(const KinematicConstraintSet& k, const Vec& x, const Vec& u,
                              const Vec& udot) {
  Derivs<double> jet{x, u, udot};
  jet.resize(static_cast<size_t>(k.order()) + 1);
  return jet;
}

inline double energy(const Dynamics& d, const Vec& x, const Vec& u) {
  const auto& l1 = d.lagrangian->get<D1>();
  const VecT<D1> xc = constant(x);
  Vec p = gradient([&](const VecT<D1>& us) { return l1(xc, us); }, u);
  return p.dot(u) - d.lagrangian->get<double>()(x, u);
}

/// Newton projection of positions onto the position-level rows.
inline Vec project_positions(const Dynamics& d, const Vec& x0, const Vec& u, double cons_tol,
                             int max_iter) {
  const auto& kin = *d.kinematic;
  auto idx = rows_of_order(kin, 0);
  if (idx.empty()) return x0;
  Vec x = x0;
  for (int it = 0;; ++it) {
    auto jet = kin_jet(kin, x, u, Vec::Zero(u.size()));
    Vec r = kin.residual<double>(jet);
    Vec g(idx.size());
    for (size_t i = 0; i < idx.size(); ++i) g(static_cast<Eigen::Index>(i)) = r(idx[i]);
    const double err = g.cwiseAbs().maxCoeff();
    if (err <= 1e-3 * cons_tol) return x;
    if (it >= max_iter) {
      if (err <= cons_tol) return x;
      throw ProjectionError("position projection did not converge (defect " + fmt(err) + ")");
    }
    Mat J = residual_slot_jacobian<double>(kin, jet, 0);
    Mat Jr(idx.size(), x.size());
    for (size_t i = 0; i < idx.size(); ++i) Jr.row(static_cast<Eigen::Index>(i)) = J.row(idx[i]);
    x -= Jr.completeOrthogonalDecomposition().solve(g);
  }
}

struct VelocityConstraints {
  Vec g;
  Mat G;
};

/// Velocity-level rows, first derivatives of position rows, and hidden
/// consistency conditions, with their Jacobian in u.
inline VelocityConstraints velocity_constraints(const Dynamics& d, const Vec& x, const Vec& u,
                                                const SolveOptions& opts) {
  const auto& kin = *d.kinematic;
  const Eigen::Index N = u.size();
  auto i1 = rows_of_order(kin, 1);
  auto i0 = rows_of_order(kin, 0);
  std::vector<double> g;
  std::vector<Vec> G;
  if (!i1.empty() || !i0.empty()) {
    auto jet = kin_jet(kin, x, u, Vec::Zero(N));
    Vec r = kin.residual<double>(jet);
    if (!i1.empty()) {
      Mat J = residual_slot_jacobian<double>(kin, jet, 1);
      for (int i : i1) {
        g.push_back(r(i));
        G.push_back(J.row(i).transpose());
      }
    }
    if (!i0.empty()) {
      Mat Jx = residual_slot_jacobian<double>(kin, jet, 0);
      for (int i : i0) {
        Vec row = Vec::Zero(N);
        row.segment(d.rate_offset, d.npos) = Jx.row(i).transpose();
        g.push_back(row.dot(u));
        G.push_back(row);
      }
    }
  }
  Hidden h = hidden_at(d, x, u, opts);
  for (Eigen::Index i = 0; i < h.h.size(); ++i) {
    g.push_back(h.h(i));
    G.push_back(h.H.row(i).transpose());
  }
  VelocityConstraints out{Vec(static_cast<Eigen::Index>(g.size())),
                          Mat(static_cast<Eigen::Index>(g.size()), N)};
  for (size_t i = 0; i < g.size(); ++i) {
    out.g(static_cast<Eigen::Index>(i)) = g[i];
    out.G.row(static_cast<Eigen::Index>(i)) = G[i].transpose();
  }
  return out;
}

/// Newton projection of u onto the velocity constraints with the smallest
/// correction in the mass metric. Components flagged in `fixed` are kept.
inline Vec project_velocities(const Dynamics& d, const Vec& x, const Vec& u0,
                              const SolveOptions& opts, int max_iter,
                              const std::vector<bool>* fixed) {
  const Eigen::Index N = u0.size();
  std::vector<Eigen::Index> held;
  if (fixed)
    for (Eigen::Index i = 0; i < N; ++i)
      if ((*fixed)[static_cast<size_t>(i)]) held.push_back(i);
  Vec u = u0;
  for (int it = 0;; ++it) {
    VelocityConstraints c = velocity_constraints(d, x, u, opts);
    const double err = c.g.size() ? c.g.cwiseAbs().maxCoeff() : 0.0;
    if (err <= 1e-3 * opts.cons_tol) return u;
    if (it >= max_iter) {
      if (err <= opts.cons_tol) return u;
      throw ProjectionError("velocity projection did not converge in " + std::to_string(max_iter) +
                            " iterations (defect " + fmt(err) + ")");
    }
    const Mat M = euler_lagrange_terms<double>(d, x, u).mass;
    const Eigen::Index m = c.g.size(), h = static_cast<Eigen::Index>(held.size());
    Mat K = Mat::Zero(N + m + h, N + m + h);
    K.topLeftCorner(N, N) = M;
    K.block(0, N, N, m) = c.G.transpose();
    K.block(N, 0, m, N) = c.G;
    for (Eigen::Index k = 0; k < h; ++k) {
      K(held[static_cast<size_t>(k)], N + m + k) = 1.0;
      K(N + m + k, held[static_cast<size_t>(k)]) = 1.0;
    }
    Vec rhs = Vec::Zero(N + m + h);
    rhs.segment(N, m) = -c.g;
    Factored f = factor(K, 1e-13);
    Vec step = min_norm_solve(f, rhs).head(N);
    for (Eigen::Index i : held) step(i) = 0.0;
    if (!step.allFinite()) throw ProjectionError("velocity projection produced a non-finite step");
    u += step;
  }
}

}  // namespace detail

/// Pointwise consistency check of an initial state: domain guards,
/// position and velocity rows, and solvability of the acceleration system
/// (including hidden consistency conditions).
template <class System>
InitialCheck check_initial(const System& sys, const State& s, const IntegratorOptions& opts = {}) {
  InitialCheck report;
  auto d = detail::view(sys);
  if (s.q.size() != d.npos || s.qd.size() != d.nvel)
    throw UsageError("state has dimensions (" + std::to_string(s.q.size()) + ", " +
                     std::to_string(s.qd.size()) + "), system expects (" +
                     std::to_string(d.npos) + ", " + std::to_string(d.nvel) + ")");
  try {
    detail::guard(d, s.q, s.qd);
  } catch (const ModelDomainError& e) {
    report.violations.push_back({e.guard(), 0.0, e.detail()});
    return report;
  }
  Vec r = detail::low_order_residual(d, s.q, s.qd);
  auto names = detail::low_order_names(d);
  for (Eigen::Index i = 0; i < r.size(); ++i)
    if (!(std::abs(r(i)) <= opts.cons_tol))
      report.violations.push_back(
          {names[static_cast<size_t>(i)], r(i), "residual " + detail::fmt(r(i))});
  if (!report.ok()) return report;
  try {
    SolveResult res = detail::solve_dynamics(d, s.q, s.qd, opts.solve_options());
    if (res.hidden_rows > 0 && !(res.hidden_defect <= res.hidden_tolerance)) {
      std::string rows;
      for (const auto& n : res.hidden_row_names) rows += (rows.empty() ? "" : "+") + n;
      report.violations.push_back({"hidden(" + rows + ")", res.hidden_defect,
                                   "velocity-level consistency condition of " + rows +
                                       " violated by " + detail::fmt(res.hidden_defect)});
    }
  } catch (const Error& e) {
    std::string row = e.rows().empty() ? "dynamics" : e.rows().front();
    report.violations.push_back({row, 0.0, e.detail()});
  }
  return report;
}

/// Restores the constraints after a step: positions onto position rows,
/// then velocities onto velocity rows and hidden conditions (mass metric).
template <class System>
State project_poststep(const System& sys, const State& s, const IntegratorOptions& opts = {}) {
  auto d = detail::view(sys);
  State out;
  out.q = detail::project_positions(d, s.q, s.qd, opts.cons_tol, 5);
  out.qd = detail::project_velocities(d, out.q, s.qd, opts.solve_options(), 5, nullptr);
  return out;
}

/// Fills in the velocity components not flagged in `given` so that the state
/// satisfies the velocity-level constraints, keeping the flagged ones.
template <class System>
State complete_state(const System& sys, const State& s, const std::vector<bool>& given,
                     const IntegratorOptions& opts = {}) {
  auto d = detail::view(sys);
  if (static_cast<int>(given.size()) != d.nvel) throw UsageError("mask has wrong length");
  State out;
  out.q = detail::project_positions(d, s.q, s.qd, opts.cons_tol, 20);
  detail::guard(d, out.q, s.qd);
  out.qd = detail::project_velocities(d, out.q, s.qd, opts.solve_options(), 30, &given);
  return out;
}

namespace detail {

struct Deriv {
  Vec xdot;
  Vec udot;
  SolveResult res;
};

inline Deriv rate(const Dynamics& d, const Vec& x, const Vec& u, const SolveOptions& o) {
  SolveResult r = solve_dynamics(d, x, u, o);
  return {Vec(d.rates(u)), r.qdd, std::move(r)};
}

inline void record(Trajectory& tr, const Dynamics& d, double t, const State& s,
                   const SolveResult& r) {
  const auto& kin = *d.kinematic;
  double kres = 0.0;
  if (kin.rows() > 0) kres = kin.residual<double>(kin_jet(kin, s.q, s.qd, r.qdd)).cwiseAbs().maxCoeff();
  double pw = 0.0;
  if (d.variational->rows() > 0) {
    Mat V = d.variational->matrix<double>(Derivs<double>{s.q, s.qd, r.qdd});
    pw = r.lambda.dot(V * s.qd);
  }
  tr.times.push_back(t);
  tr.states.push_back(s);
  tr.qdds.push_back(r.qdd);
  tr.lambdas.push_back(r.lambda);
  tr.energy.push_back(energy(d, s.q, s.qd));
  tr.kin_residual.push_back(kres);
  tr.power.push_back(pw);
}

}  // namespace detail

/// Integrates from `s0` at t0 to t1 on the grid t0 + k dt (the last step is
/// shortened when dt does not divide the span).
template <class System>
Trajectory integrate(const System& sys, const State& s0, double t0, double t1,
                     const IntegratorOptions& opts = {}) {
  opts.validate();
  if (!(t1 > t0)) throw ConfigurationError("integration span must have t1 > t0");
  InitialCheck chk = check_initial(sys, s0, opts);
  if (!chk.ok()) throw InconsistentStateError("initial state rejected: " + chk.message(), chk.rows());

  const auto d = detail::view(sys);
  const SolveOptions so = opts.solve_options();
  const double span = t1 - t0;
  const long nsteps = std::max(1L, static_cast<long>(std::ceil(span / opts.dt - 1e-9)));

  Trajectory tr;
  tr.times.reserve(static_cast<size_t>(nsteps) + 1);
  State s = s0;
  detail::Deriv k1 = detail::rate(d, s.q, s.qd, so);
  detail::record(tr, d, t0, s, k1.res);

  for (long k = 0; k < nsteps; ++k) {
    const double t = t0 + static_cast<double>(k) * opts.dt;
    const double tn = k + 1 == nsteps ? t1 : t0 + static_cast<double>(k + 1) * opts.dt;
    const double h = tn - t;
    State next;
    try {
      if (opts.method == Method::ExplicitRK4OnSolvedAccel) {
        auto k2 = detail::rate(d, s.q + 0.5 * h * k1.xdot, s.qd + 0.5 * h * k1.udot, so);
        auto k3 = detail::rate(d, s.q + 0.5 * h * k2.xdot, s.qd + 0.5 * h * k2.udot, so);
        auto k4 = detail::rate(d, s.q + h * k3.xdot, s.qd + h * k3.udot, so);
        next.q = s.q + h / 6.0 * (k1.xdot + 2.0 * k2.xdot + 2.0 * k3.xdot + k4.xdot);
        next.qd = s.qd + h / 6.0 * (k1.udot + 2.0 * k2.udot + 2.0 * k3.udot + k4.udot);
      } else {
        // Fixed-point iteration on y1 = y0 + h f((y0 + y1) / 2).
        next.q = s.q + h * k1.xdot;
        next.qd = s.qd + h * k1.udot;
        bool converged = false;
        for (int it = 0; it < 100 && !converged; ++it) {
          auto km = detail::rate(d, 0.5 * (s.q + next.q), 0.5 * (s.qd + next.qd), so);
          Vec q1 = s.q + h * km.xdot, u1 = s.qd + h * km.udot;
          double delta = std::max((q1 - next.q).size() ? (q1 - next.q).cwiseAbs().maxCoeff() : 0.0,
                                  (u1 - next.qd).cwiseAbs().maxCoeff());
          double scale = 1.0 + std::max(next.q.size() ? next.q.cwiseAbs().maxCoeff() : 0.0,
                                        next.qd.cwiseAbs().maxCoeff());
          next.q = q1;
          next.qd = u1;
          converged = delta <= 1e-14 * scale;
        }
        if (!converged) throw EvaluationError("implicit midpoint iteration did not converge");
      }
      if (opts.projection == ProjectionMode::PostStep) next = project_poststep(sys, next, opts);
      k1 = detail::rate(d, next.q, next.qd, so);
    } catch (const Error& e) {
      detail::rethrow_at(e, t, s);
    }
    s = next;
    detail::record(tr, d, tn, s, k1.res);
    if (opts.projection == ProjectionMode::PostStep) {
      Vec r = detail::low_order_residual(d, s.q, s.qd);
      if (r.size() && r.cwiseAbs().maxCoeff() > 10.0 * opts.cons_tol)
        throw ProjectionError("velocity-level drift " + detail::fmt(r.cwiseAbs().maxCoeff()) +
                              " after projection at t = " + detail::fmt(tn));
    }
  }
  return tr;
}

struct EnergyAudit {
  std::vector<double> dEdt;        // centered differences, NaN at the end points
  std::vector<double> model_rate;  // model's closed-form rate, NaN when absent
  std::vector<double> power;       // lambda . (R_V u)
  std::vector<double> monitor;     // model's theory monitor, NaN when absent
  double max_power_gap = 0.0;      // max |dE/dt - power| over interior samples
  double max_rate_gap = 0.0;       // max |dE/dt - model_rate| over interior samples
  double max_increase = -std::numeric_limits<double>::infinity();  // max E[k+1] - E[k]
  double max_increase_in_theory = -std::numeric_limits<double>::infinity();
  int out_of_theory = 0;  // samples with monitor < 0
  bool has_model_rate = false;
};

/// Energy bookkeeping along a recorded trajectory.
template <class System>
EnergyAudit energy_audit(const System& sys, const Trajectory& tr) {
  const auto d = detail::view(sys);
  const ModelHooks& hooks = *d.hooks;
  const size_t n = tr.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  EnergyAudit a;
  a.has_model_rate = static_cast<bool>(hooks.dissipation_rate);
  a.dEdt.assign(n, nan);
  a.model_rate.assign(n, nan);
  a.monitor.assign(n, nan);
  a.power = tr.power;
  for (size_t k = 0; k < n; ++k) {
    const State& s = tr.states[k];
    if (hooks.dissipation_rate) a.model_rate[k] = hooks.dissipation_rate(s.q, s.qd);
    if (hooks.theory_monitor) {
      a.monitor[k] = hooks.theory_monitor(s.q, s.qd);
      if (a.monitor[k] < 0.0) ++a.out_of_theory;
    }
  }
  for (size_t k = 1; k + 1 < n; ++k) {
    a.dEdt[k] = (tr.energy[k + 1] - tr.energy[k - 1]) / (tr.times[k + 1] - tr.times[k - 1]);
    a.max_power_gap = std::max(a.max_power_gap, std::abs(a.dEdt[k] - tr.power[k]));
    if (a.has_model_rate) a.max_rate_gap = std::max(a.max_rate_gap, std::abs(a.dEdt[k] - a.model_rate[k]));
  }
  for (size_t k = 0; k + 1 < n; ++k) {
    const double inc = tr.energy[k + 1] - tr.energy[k];
    a.max_increase = std::max(a.max_increase, inc);
    const bool in_theory = !hooks.theory_monitor || (a.monitor[k] >= 0.0 && a.monitor[k + 1] >= 0.0);
    if (in_theory) a.max_increase_in_theory = std::max(a.max_increase_in_theory, inc);
  }
  return a;
}

}  // namespace hocon
