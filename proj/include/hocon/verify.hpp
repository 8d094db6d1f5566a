#pragma once

// Verification suites shared by `hocon verify` and the acceptance binary.
// Every check records the measured value next to its pinned tolerance.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iomanip>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "hocon/finite_difference.hpp"
#include "hocon/models.hpp"

namespace hocon::verify {

struct Check {
  std::string name;
  double measured = 0.0;
  std::string relation;  // "<=", ">=", "in [lo, hi]", "strictly decreasing", ...
  double tolerance = 0.0;
  bool pass = false;
  std::string note;
};

struct SuiteReport {
  std::string id;
  std::vector<Check> checks;

  bool pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
  }
};

inline Check at_most(std::string name, double measured, double tol, std::string note = {}) {
  return {std::move(name), measured, "<=", tol, measured <= tol, std::move(note)};
}
inline Check at_least(std::string name, double measured, double tol, std::string note = {}) {
  return {std::move(name), measured, ">=", tol, measured >= tol, std::move(note)};
}
inline Check within(std::string name, double measured, double lo, double hi, std::string note = {}) {
  std::ostringstream rel;
  rel << "in [" << lo << ", " << hi << "]";
  return {std::move(name), measured, rel.str(), hi, measured >= lo && measured <= hi, std::move(note)};
}

inline std::string format(const Check& c) {
  std::ostringstream os;
  os << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << std::setprecision(3) << std::scientific
     << c.measured << " " << c.relation;
  if (c.relation == "<=" || c.relation == ">=") os << " " << c.tolerance;
  if (!c.note.empty()) os << "  (" << c.note << ")";
  return os.str();
}

/// Worker count: HOCON_THREADS when set, else the hardware concurrency.
inline unsigned thread_cap() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* e = std::getenv("HOCON_THREADS")) {
    long v = std::strtol(e, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  return hw;
}

/// Runs fn(0..n-1) on up to thread_cap() threads. Results are written by
/// index, so the outcome does not depend on scheduling.
inline void parallel_for(size_t n, const std::function<void(size_t)>& fn) {
  const unsigned workers = static_cast<unsigned>(std::min<size_t>(thread_cap(), n));
  if (workers <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::exception_ptr err;
  std::mutex m;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(m);
          if (!err) err = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

/// Run lengths and sample counts. `full()` matches the acceptance settings.
struct Budget {
  double t_end = 10.0;
  int samples = 20;
  int points = 100;

  static Budget full() { return {}; }
  static Budget quick() { return {2.0, 5, 25}; }
};

inline double max_abs(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// ---------------------------------------------------------------------------
// Rolling balls
// ---------------------------------------------------------------------------

inline State ball_state(double w1, double w2, double w3 = 0.0) {
  Vec u(5);
  u << w1, w2, w3, w2, -w1;
  return {Vec(0), u};
}

/// Constant solution of the elastic ball and a straight contact path.
inline std::vector<Check> elastic_ball_constants(BallFormulation f, const Budget& b) {
  auto sys = elastic_ball({}, f);
  const State s0 = ball_state(0.0, 1.0);
  Trajectory tr = integrate(sys, s0, 0.0, b.t_end);
  double dw = 0.0, dv = 0.0;
  std::vector<Vec> us;
  for (const auto& s : tr.states) {
    dw = std::max(dw, (s.qd.head(3) - s0.qd.head(3)).norm());
    dv = std::max(dv, (s.qd.tail(2) - s0.qd.tail(2)).norm());
    us.push_back(s.qd);
  }
  auto path = reconstruct(sys.group(), identity_element(sys.group()), us, tr.times[1] - tr.times[0]);
  const Eigen::Vector2d dir = Eigen::Vector2d(s0.qd.tail(2)).normalized();
  double col = 0.0;
  for (const auto& g : path) {
    Eigen::Vector2d a = g.translations.front();
    col = std::max(col, std::abs(dir(0) * a(1) - dir(1) * a(0)));
  }
  const std::string tag = f == BallFormulation::Omega3Zero ? "omega3-zero" : "curvature";
  return {at_most("elastic ball (" + tag + ") max |omega - omega0|", dw, 1e-8),
          at_most("elastic ball (" + tag + ") max |V - V0|", dv, 1e-8),
          at_most("elastic ball (" + tag + ") contact path collinearity", col, 1e-8)};
}

/// Omega3Zero and CurvatureSecondOrder from random admissible data.
inline std::vector<Check> ball_formulation_equivalence(const Budget& b) {
  auto first = elastic_ball({}, BallFormulation::Omega3Zero);
  auto second = elastic_ball({}, BallFormulation::CurvatureSecondOrder);
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  std::vector<State> ics;
  for (int i = 0; i < b.samples; ++i) ics.push_back(ball_state(U(rng), U(rng)));
  std::vector<double> gaps(ics.size(), 0.0), curv(ics.size(), 0.0);
  parallel_for(ics.size(), [&](size_t i) {
    Trajectory a = integrate(first, ics[i], 0.0, b.t_end);
    Trajectory c = integrate(second, ics[i], 0.0, b.t_end);
    for (size_t k = 0; k < a.size(); ++k) {
      gaps[i] = std::max(gaps[i], max_abs(a.states[k].qd - c.states[k].qd));
      const Vec& w = c.states[k].qd;
      const Vec& wd = c.qdds[k];
      curv[i] = std::max(curv[i], std::abs(w(0) * wd(1) - w(1) * wd(0) - w(2) * (w(0) * w(0) + w(1) * w(1))));
    }
  });
  return {at_most("formulation gap over " + std::to_string(ics.size()) + " initial conditions",
                  *std::max_element(gaps.begin(), gaps.end()), 1e-7),
          at_most("curvature row along second-order runs", *std::max_element(curv.begin(), curv.end()),
                  1e-9)};
}

/// D'Alembert rigid ball: energy and constraint power.
inline std::vector<Check> dalembert_conservation(const Budget& b) {
  auto sys = rigid_ball_dalembert({});
  std::vector<State> ics{ball_state(0.0, 1.0)};
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  for (int i = 1; i < std::max(1, b.samples / 4); ++i) ics.push_back(ball_state(U(rng), U(rng)));
  std::vector<double> de(ics.size(), 0.0), pw(ics.size(), 0.0);
  parallel_for(ics.size(), [&](size_t i) {
    Trajectory tr = integrate(sys, ics[i], 0.0, b.t_end);
    for (size_t k = 0; k < tr.size(); ++k) {
      de[i] = std::max(de[i], std::abs(tr.energy[k] - tr.energy[0]));
      pw[i] = std::max(pw[i], std::abs(tr.power[k]));
    }
  });
  return {at_most("rigid ball max |E(t) - E(0)|", *std::max_element(de.begin(), de.end()), 1e-8),
          at_most("rigid ball max |lambda . R_V u|", *std::max_element(pw.begin(), pw.end()), 1e-12)};
}

// ---------------------------------------------------------------------------
// Rocard tire
// ---------------------------------------------------------------------------

inline State rocard_initial(const NonholonomicSystem& sys, double psi_dot, double theta_dot,
                            double eps, const IntegratorOptions& o = {}) {
  Vec q = Vec::Zero(5), qd = Vec::Zero(5);
  q(2) = eps;
  qd(0) = psi_dot;
  qd(1) = theta_dot;
  return complete_state(sys, {q, qd}, {true, true, false, false, false}, o);
}

/// Energy rate against the closed-form dissipation formula at two amplitudes.
inline std::vector<Check> rocard_energy(const Budget& b) {
  auto sys = rocard_tire({});
  const double amps[2] = {0.05, 0.025};
  double gap[2], eps_max[2], inc[2];
  int oot[2];
  parallel_for(2, [&](size_t i) {
    Trajectory tr = integrate(sys, rocard_initial(sys, 5.0, 0.0, amps[i]), 0.0, std::min(b.t_end, 5.0));
    EnergyAudit au = energy_audit(sys, tr);
    gap[i] = au.max_rate_gap;
    inc[i] = au.max_increase_in_theory;
    oot[i] = au.out_of_theory;
    eps_max[i] = 0.0;
    for (const auto& s : tr.states) eps_max[i] = std::max(eps_max[i], std::abs(s.q(2)));
  });
  std::ostringstream note;
  note << std::setprecision(3) << "gap " << gap[0] << " at eps " << eps_max[0] << ", " << gap[1]
       << " at eps " << eps_max[1] << "; C = gap/eps^2 = " << gap[0] / (eps_max[0] * eps_max[0])
       << ", " << gap[1] / (eps_max[1] * eps_max[1]);
  return {within("Rocard |dE/dt - rate| ratio for halved amplitude", gap[0] / gap[1], 3.0, 5.0,
                 note.str()),
          at_most("Rocard max energy increase per step (monitor >= 0)", std::max(inc[0], inc[1]), 1e-10,
                  std::to_string(oot[0] + oot[1]) + " out-of-theory samples")};
}

/// The printed dynamic equations at random admissible states.
inline std::vector<Check> rocard_dynamic_equations(const Budget& b) {
  RocardParams p;
  auto sys = rocard_tire(p);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  double worst1 = 0.0, worst2 = 0.0;
  for (int i = 0; i < b.points; ++i) {
    const double psi_dot = (U(rng) > 0 ? 1.0 : -1.0) * (0.5 + 2.25 * (U(rng) + 1.0));
    Vec q(5), qd = Vec::Zero(5);
    q << 3.0 * U(rng), std::numbers::pi * U(rng), 0.2 * U(rng), 2.0 * U(rng), 2.0 * U(rng);
    qd(0) = psi_dot;
    qd(1) = U(rng);
    State s = complete_state(sys, {q, qd}, {true, true, false, false, false});
    SolveResult r = solve_state(sys, s);
    const Vec& a = r.qdd;
    const double th = s.q(1);
    worst1 = std::max(worst1, std::abs(p.I * a(0) + p.M * a(3) * std::cos(th) + p.M * a(4) * std::sin(th)));
    worst2 = std::max(worst2, std::abs(p.J * a(1) + p.K * s.q(2)));
  }
  return {at_most("Rocard I psi'' + M x1'' cos + M x2'' sin", worst1, 1e-9),
          at_most("Rocard J theta'' + K eps", worst2, 1e-9)};
}

// ---------------------------------------------------------------------------
// Greidanus tire
// ---------------------------------------------------------------------------


struct GreidanusLimit {
  std::vector<double> alphas, xi_max, gap, max_increase;
};

/// Greidanus runs at increasing stiffness against a Rocard run with K = beta
/// and a_coef = M psi_dot^2 beta / (1 - M psi_dot^2). With that coefficient
/// both lateral laws give the same eps' at the initial rolling speed.
inline GreidanusLimit greidanus_limit_runs(const Budget& b) {
  const double psi_dot = 0.5, eps0 = 0.02, M = 1.0, beta = 1.0;
  const double T = std::min(b.t_end, 5.0);
  RocardParams rp;
  rp.M = M;
  rp.K = beta;
  rp.a_coef = M * psi_dot * psi_dot * beta / (1.0 - M * psi_dot * psi_dot);
  auto rocard = rocard_tire(rp);
  const State rs = rocard_initial(rocard, psi_dot, 0.0, eps0);
  GreidanusLimit out;
  out.alphas = {1e2, 1e3, 1e4};
  const size_t n = out.alphas.size();
  out.xi_max.assign(n, 0.0);
  out.gap.assign(n, 0.0);
  out.max_increase.assign(n, 0.0);
  std::vector<Trajectory> runs(n + 1);
  parallel_for(n + 1, [&](size_t i) {
    if (i == n) {
      runs[i] = integrate(rocard, rs, 0.0, T);
      return;
    }
    const double alpha = out.alphas[i];
    auto g = greidanus_tire({1.0, 1.0, M, alpha, beta});
    Vec q = Vec::Zero(6), qd = Vec::Zero(6);
    q(2) = eps0;
    q(5) = ((rs.qd(1) - rs.qd(2)) / psi_dot - beta * eps0) / alpha;
    qd(0) = psi_dot;
    qd(1) = rs.qd(1);
    State gs = complete_state(g, {q, qd}, {true, true, false, false, false, true});
    runs[i] = integrate(g, gs, 0.0, T);
    out.max_increase[i] = energy_audit(g, runs[i]).max_increase;
  });
  const Trajectory& ref = runs[n];
  for (size_t i = 0; i < n; ++i) {
    const Trajectory& tr = runs[i];
    for (size_t k = 0; k < std::min(tr.size(), ref.size()); ++k) {
      out.xi_max[i] = std::max(out.xi_max[i], std::abs(tr.states[k].q(5)));
      out.gap[i] = std::max(out.gap[i], max_abs(tr.states[k].q.head(3) - ref.states[k].q.head(3)));
    }
  }
  return out;
}

inline std::vector<Check> greidanus_limit(const Budget& b) {
  GreidanusLimit r = greidanus_limit_runs(b);
  auto listing = [&](const std::vector<double>& v) {
    std::ostringstream os;
    os << std::setprecision(3) << std::scientific;
    for (size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
    return os.str();
  };
  // Measured value: the largest ratio next/previous, which must stay below 1.
  auto worst_ratio = [](const std::vector<double>& v) {
    double w = 0.0;
    for (size_t i = 1; i < v.size(); ++i) w = std::max(w, v[i] / v[i - 1]);
    return w;
  };
  const double rx = worst_ratio(r.xi_max), rg = worst_ratio(r.gap);
  return {{"Greidanus max|xi| strictly decreasing in alpha (worst ratio)", rx, "< 1", 1.0, rx < 1.0,
           "max|xi| = " + listing(r.xi_max)},
          {"Greidanus (psi, theta, eps) gap to Rocard decreasing in alpha (worst ratio)", rg, "< 1",
           1.0, rg < 1.0, "gap = " + listing(r.gap)},
          at_most("Greidanus max energy increase per step at alpha = 1e4", r.max_increase.back(), 1e-10)};
}

// ---------------------------------------------------------------------------
// Ball on a moving plane
// ---------------------------------------------------------------------------

inline State plane_state(const PlaneField& f, const Eigen::Vector2d& a, const Eigen::Vector3d& w) {
  Eigen::Vector2d ad = Eigen::Vector2d(w(1), -w(0)) + f.value(a);
  Vec u(5);
  u << w, ad;
  return {Vec(a), u};
}

inline std::vector<Check> moving_plane_oracle(const Budget& b) {
  BallParams p;
  PlaneField shear{PlaneField::Shear, 0.0, 0.0, 0.5};
  PlaneField cst{PlaneField::Constant, 0.3, -0.7, 0.0};
  auto sys = moving_plane_ball(p, shear);
  auto sys_c = moving_plane_ball(p, cst);
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  double worst = 0.0, worst_c = 0.0;
  for (int i = 0; i < b.points; ++i) {
    Eigen::Vector2d a(U(rng), U(rng));
    Eigen::Vector3d w(U(rng), U(rng), U(rng));
    SolveResult r = solve_reduced(sys, plane_state(shear, a, w));
    MovingPlaneRhs ref = moving_plane_rhs(
        p.I, p.M, [&](const Eigen::Vector2d& x) { return shear.value(x); },
        [&](const Eigen::Vector2d& x) { return shear.jacobian(x); }, w, a);
    worst = std::max(worst, max_abs(r.qdd.head(3) - Vec(ref.omega_dot)));
    SolveResult rc = solve_reduced(sys_c, plane_state(cst, a, w));
    worst_c = std::max(worst_c, max_abs(rc.qdd.head(3)));
  }
  return {at_most("moving plane (shear 0.5) |omega' - closed form| at " + std::to_string(b.points) +
                      " states",
                  worst, 1e-9),
          at_most("moving plane (constant field) max |omega'|", worst_c, 1e-14,
                  "zero up to floating point roundoff of the least-squares solve")};
}

// ---------------------------------------------------------------------------
// Chetaev constructions
// ---------------------------------------------------------------------------

/// Knife edge in (x, y, theta) plus a second rolling-type row: linear in q'.
inline KinematicConstraintSet linear_test_rows() {
  return KinematicConstraintSet(
      1, 2,
      [](const auto& jet) {
        using T = scalar_of<decltype(jet.front())>;
        const auto& q = jet[0];
        const auto& qd = jet[1];
        VecT<T> r(2);
        r << -sin(q(2)) * qd(0) + cos(q(2)) * qd(1),
            cos(q(2)) * qd(0) + sin(q(2)) * qd(1) - q(0) * qd(3);
        return r;
      },
      {{1, 1}, {"knife_edge", "rolling"}, true});
}

inline Mat linear_test_distribution(const Vec& q) {
  Mat D = Mat::Zero(2, 4);
  D << -std::sin(q(2)), std::cos(q(2)), 0.0, 0.0, std::cos(q(2)), std::sin(q(2)), 0.0, -q(0);
  return D;
}

/// Rows homogeneous of degree 1, 2 and 3 in q' with q-dependent coefficients.
inline KinematicConstraintSet homogeneous_test_rows() {
  return KinematicConstraintSet(
      1, 3,
      [](const auto& jet) {
        using T = scalar_of<decltype(jet.front())>;
        const auto& q = jet[0];
        const auto& v = jet[1];
        VecT<T> r(3);
        r << cos(q(0)) * v(0) + q(1) * v(1) - v(3),
            v(0) * v(0) + v(1) * v(1) - q(2) * q(2) * v(2) * v(2) + sin(q(3)) * v(0) * v(3),
            v(0) * v(1) * v(2) - q(0) * v(3) * v(3) * v(3) + exp(q(1)) * v(2) * v(2) * v(0);
        return r;
      },
      {{1, 1, 1}, {"deg1", "deg2", "deg3"}, false});
}

inline std::vector<Check> chetaev_checks(const Budget& b) {
  LagrangianSpec L(4, [](const auto& q, const auto& qd) {
    using T = scalar_of<decltype(q)>;
    return T(0.5) * qd.squaredNorm() - T(0.1) * q(0) * q(0);
  });
  auto chet = make_chetaev(L, linear_test_rows());
  auto dal = make_dalembert(L, 2, [](const auto& q) {
    using T = scalar_of<decltype(q)>;
    MatT<T> D(2, 4);
    D << -sin(q(2)), cos(q(2)), T(0.0), T(0.0), cos(q(2)), sin(q(2)), T(0.0), -q(0);
    return D;
  });
  auto hom = make_chetaev(L, homogeneous_test_rows());
  std::mt19937_64 rng(31337);
  std::uniform_real_distribution<double> U(-1.5, 1.5);
  double gap = 0.0, hgap = 0.0;
  const Vec degree = (Vec(3) << 1.0, 2.0, 3.0).finished();
  for (int i = 0; i < b.points; ++i) {
    Vec q(4), qd(4);
    for (int k = 0; k < 4; ++k) q(k) = U(rng), qd(k) = U(rng);
    JetPoint jet(q, qd);
    gap = std::max(gap, max_abs((chet.variational()(jet) - dal.variational()(jet)).reshaped()));
    Vec lhs = hom.variational()(jet) * qd;
    Vec rhs = degree.cwiseProduct(hom.kinematic()(jet));
    hgap = std::max(hgap, max_abs(lhs - rhs));
  }
  return {at_most("Chetaev rows vs D'Alembert rows for linear constraints", gap, 1e-12),
          at_most("homogeneity R_V q' = d R_K for degrees 1, 2, 3", hgap, 1e-9)};
}

// ---------------------------------------------------------------------------
// Derivative cross-checks and numerical hygiene
// ---------------------------------------------------------------------------

struct Sampler {
  std::function<void(std::mt19937_64&, Vec&, Vec&, Vec&)> draw;
};

/// Max relative error of AD against central differences for the Lagrangian
/// gradients, the velocity Hessian (mass matrix) and every kinematic slot
/// Jacobian of one system.
template <class System>
double derivative_error(const System& sys, const Sampler& sampler, int points, unsigned seed) {
  const auto d = detail::view(sys);
  const auto& l0 = d.lagrangian->template get<double>();
  const auto& l1 = d.lagrangian->template get<D1>();
  const KinematicConstraintSet& kin = *d.kinematic;
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int i = 0; i < points; ++i) {
    Vec x, u, ud;
    sampler.draw(rng, x, u, ud);
    const VecT<D1> xc = constant(x), uc = constant(u);
    auto ad_gx = [&](const Vec& uu) {
      const VecT<D1> us = constant(uu);
      return Vec(gradient([&](const VecT<D1>& xs) { return l1(xs, us); }, x));
    };
    auto ad_gu = [&](const Vec& uu) {
      return Vec(gradient([&](const VecT<D1>& us) { return l1(xc, us); }, uu));
    };
    if (x.size() > 0) {
      Vec fd_gx = fd::gradient([&](const Vec& xx) { return l0(xx, u); }, x);
      worst = std::max(worst, fd::rel_err(ad_gx(u), fd_gx));
    }
    Vec fd_gu = fd::gradient([&](const Vec& uu) { return l0(x, uu); }, u);
    worst = std::max(worst, fd::rel_err(ad_gu(u), fd_gu));
    if constexpr (std::is_same_v<System, NonholonomicSystem>) {
      // Closed-form gradients, when registered, must agree as well.
      worst = std::max(worst, fd::rel_err(sys.lagrangian().grad_q(x, u),
                                          fd::gradient([&](const Vec& xx) { return l0(xx, u); }, x)));
      worst = std::max(worst, fd::rel_err(sys.lagrangian().grad_qd(x, u), fd_gu));
      Mat H = sys.lagrangian().velocity_hessian(x, u);
      worst = std::max(worst, fd::rel_err(H, fd::jacobian(ad_gu, u)));
    }
    (void)uc;
    const Derivs<double> jet = detail::kin_jet(kin, x, u, ud);
    for (int slot = 0; slot <= kin.order(); ++slot) {
      if (kin.rows() == 0 || jet[static_cast<size_t>(slot)].size() == 0) continue;
      Mat J = detail::residual_slot_jacobian<double>(kin, jet, slot);
      Mat F = fd::jacobian(
          [&](const Vec& y) {
            Derivs<double> j2 = jet;
            j2[static_cast<size_t>(slot)] = y;
            return Vec(kin.residual<double>(j2));
          },
          jet[static_cast<size_t>(slot)]);
      worst = std::max(worst, fd::rel_err(J, F));
    }
  }
  return worst;
}

inline Sampler uniform_sampler(int npos, int nvel, double scale) {
  return {[=](std::mt19937_64& rng, Vec& x, Vec& u, Vec& ud) {
    std::uniform_real_distribution<double> U(-scale, scale);
    x.resize(npos);
    u.resize(nvel);
    ud.resize(nvel);
    for (int k = 0; k < npos; ++k) x(k) = U(rng);
    for (int k = 0; k < nvel; ++k) u(k) = U(rng), ud(k) = U(rng);
  }};
}

/// Tire states inside the small-angle chart with psi' bounded away from 0.
inline Sampler tire_sampler(int n) {
  return {[=](std::mt19937_64& rng, Vec& x, Vec& u, Vec& ud) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    x.resize(n);
    u.resize(n);
    ud.resize(n);
    for (int k = 0; k < n; ++k) x(k) = 2.0 * U(rng), u(k) = U(rng), ud(k) = U(rng);
    x(2) = 0.2 * U(rng);
    if (n > 5) x(5) = 0.05 * U(rng);
    u(0) = (U(rng) > 0.0 ? 1.0 : -1.0) * (0.5 + std::abs(2.0 * U(rng)));
  }};
}

inline std::vector<Check> gradient_check(const Budget& b) {
  struct Case {
    std::string name;
    std::function<double()> run;
  };
  const int n = b.points;
  const std::vector<Case> cases = {
      {"elastic-ball omega3-zero",
       [n] { return derivative_error(elastic_ball({}, BallFormulation::Omega3Zero), uniform_sampler(0, 5, 2.0), n, 1); }},
      {"elastic-ball curvature",
       [n] {
         return derivative_error(elastic_ball({}, BallFormulation::CurvatureSecondOrder),
                                 uniform_sampler(0, 5, 2.0), n, 2);
       }},
      {"rigid-ball", [n] { return derivative_error(rigid_ball_dalembert({}), uniform_sampler(0, 5, 2.0), n, 3); }},
      {"rocard", [n] { return derivative_error(rocard_tire({}), tire_sampler(5), n, 4); }},
      {"greidanus",
       [n] { return derivative_error(greidanus_tire({1, 1, 1, 50.0, 1.0}), tire_sampler(6), n, 5); }},
      {"moving-plane-ball shear",
       [n] {
         return derivative_error(moving_plane_ball({}, PlaneField{PlaneField::Shear, 0, 0, 0.5}),
                                 uniform_sampler(2, 5, 2.0), n, 6);
       }},
  };
  std::vector<double> err(cases.size());
  parallel_for(cases.size(), [&](size_t i) { err[i] = cases[i].run(); });
  std::vector<Check> out;
  for (size_t i = 0; i < cases.size(); ++i)
    out.push_back(at_most("AD vs central differences, " + cases[i].name + " (max rel err, " +
                              std::to_string(n) + " points)",
                          err[i], 1e-6));
  return out;
}

/// Final-state error of RK4 at dt and dt/2 against a dt/8 reference.
template <class System>
std::pair<double, double> rk4_errors(const System& sys, const State& s0, double T, double dt) {
  IntegratorOptions o;
  auto final_at = [&](double h) {
    o.dt = h;
    Trajectory tr = integrate(sys, s0, 0.0, T, o);
    const State& s = tr.states.back();
    Vec z(s.q.size() + s.qd.size());
    z << s.q, s.qd;
    return z;
  };
  std::vector<Vec> z(3);
  const double hs[3] = {dt, dt / 2, dt / 8};
  parallel_for(3, [&](size_t i) { z[i] = final_at(hs[i]); });
  return {max_abs(z[0] - z[2]), max_abs(z[1] - z[2])};
}

/// Errors at or below this level count as exact: the halving ratio is then
/// roundoff over roundoff and carries no information about the order.
inline constexpr double kExactError = 1e-12;

inline std::vector<Check> rk4_convergence(const Budget&) {
  std::vector<Check> out;
  {
    auto sys = elastic_ball({}, BallFormulation::Omega3Zero);
    Vec u(5);
    u << 0.0, 1.0, 0.0, 1.0, 0.0;
    auto [e1, e2] = rk4_errors(sys, {Vec(0), u}, 10.0, 1e-3);
    const bool exact = e1 <= kExactError && e2 <= kExactError;
    const double ratio = exact ? std::numeric_limits<double>::infinity() : e1 / e2;
    std::ostringstream note;
    note << std::setprecision(3) << "errors " << e1 << ", " << e2
         << (exact ? "; constant solution reproduced exactly at both steps" : "");
    out.push_back(at_least("RK4 error ratio on halving dt, elastic-ball constant solution", ratio, 4.0,
                           note.str()));
  }
  {
    // The shear-plane ball has polynomial solutions that RK4 integrates
    // exactly, so the order is probed on the Rocard tire instead.
    auto sys = rocard_tire({});
    auto [e1, e2] = rk4_errors(sys, rocard_initial(sys, 5.0, 0.3, 0.05), 1.0, 0.02);
    std::ostringstream note;
    note << std::setprecision(3) << "errors " << e1 << ", " << e2;
    out.push_back(at_least("RK4 error ratio on halving dt, Rocard tire", e1 / e2, 4.0, note.str()));
  }
  return out;
}

/// Max recorded |R_K| along PostStep-projected runs of every built-in model.
inline std::vector<Check> constraint_drift(const Budget& b) {
  struct Case {
    std::string name;
    std::function<Trajectory()> run;
  };
  const double T = b.t_end;
  PlaneField shear{PlaneField::Shear, 0.0, 0.0, 0.5};
  const std::vector<Case> cases = {
      {"elastic-ball omega3-zero",
       [=] { return integrate(elastic_ball({}, BallFormulation::Omega3Zero), ball_state(0.7, -1.1), 0.0, T); }},
      {"elastic-ball curvature",
       [=] {
         return integrate(elastic_ball({}, BallFormulation::CurvatureSecondOrder), ball_state(0.7, -1.1),
                          0.0, T);
       }},
      {"rigid-ball", [=] { return integrate(rigid_ball_dalembert({}), ball_state(-0.4, 0.9), 0.0, T); }},
      {"rocard",
       [=] {
         auto s = rocard_tire({});
         return integrate(s, rocard_initial(s, 5.0, 0.1, 0.05), 0.0, T);
       }},
      {"greidanus",
       [=] {
         auto s = greidanus_tire({1, 1, 1, 100.0, 1.0});
         Vec q = Vec::Zero(6), qd = Vec::Zero(6);
         q(2) = 0.05;
         qd(0) = 0.5;
         qd(1) = 0.1;
         State s0 = complete_state(s, {q, qd}, {true, true, false, false, false, true});
         return integrate(s, s0, 0.0, T);
       }},
      {"moving-plane-ball shear",
       [=] { return integrate(moving_plane_ball({}, shear), plane_state(shear, {0.3, -0.2}, {0.4, 0.8, 0.3}), 0.0, T); }},
  };
  std::vector<double> drift(cases.size(), 0.0);
  parallel_for(cases.size(), [&](size_t i) {
    Trajectory tr = cases[i].run();
    drift[i] = *std::max_element(tr.kin_residual.begin(), tr.kin_residual.end());
  });
  std::vector<Check> out;
  for (size_t i = 0; i < cases.size(); ++i)
    out.push_back(at_most("constraint drift with PostStep projection, " + cases[i].name, drift[i], 1e-8));
  return out;
}

// ---------------------------------------------------------------------------
// Reconstruction
// ---------------------------------------------------------------------------

inline std::vector<Check> reconstruction_checks(const Budget& b) {
  auto sys = elastic_ball({}, BallFormulation::Omega3Zero);
  Trajectory tr = integrate(sys, ball_state(1.3, -0.6), 0.0, b.t_end);
  std::vector<Vec> us;
  for (const auto& s : tr.states) us.push_back(s.qd);
  auto path = reconstruct(sys.group(), identity_element(sys.group()), us, 1e-3);
  double orth = 0.0;
  for (const auto& g : path)
    orth = std::max(orth, (g.rotations.front().transpose() * g.rotations.front() -
                           Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff());

  const double c = 0.8, dt = 1e-3;
  const int steps = 1000;
  Eigen::Matrix3d Rz;
  Rz << std::cos(c), -std::sin(c), 0.0, std::sin(c), std::cos(c), 0.0, 0.0, 0.0, 1.0;
  double rot = 0.0;
  for (Orientation o : {Orientation::Right, Orientation::Left}) {
    auto g = LieGroupSpec::so3(o);
    std::vector<Vec> w(steps + 1, Vec(Eigen::Vector3d(0.0, 0.0, c)));
    auto gp = reconstruct(g, identity_element(g), w, dt);
    rot = std::max(rot, (gp.back().rotations.front() - Rz).cwiseAbs().maxCoeff());
  }
  return {at_most("reconstructed A(t) orthonormality max |A^T A - I|", orth, 1e-10),
          at_most("constant omega = (0, 0, c) reconstruction vs closed form at t = 1", rot, 1e-8)};
}

// ---------------------------------------------------------------------------
// Suites
// ---------------------------------------------------------------------------

inline const std::vector<std::string>& suite_ids() {
  static const std::vector<std::string> ids = {"ball-equivalence",   "rocard-energy",
                                               "greidanus-limit",    "moving-plane-oracle",
                                               "dalembert-conservation", "gradient-check"};
  return ids;
}

inline SuiteReport run_suite(const std::string& id, bool strict) {
  const Budget b = strict ? Budget::full() : Budget::quick();
  SuiteReport r{id, {}};
  auto add = [&](std::vector<Check> c) { r.checks.insert(r.checks.end(), c.begin(), c.end()); };
  if (id == "ball-equivalence") {
    add(elastic_ball_constants(BallFormulation::Omega3Zero, b));
    add(elastic_ball_constants(BallFormulation::CurvatureSecondOrder, b));
    add(ball_formulation_equivalence(b));
    add(reconstruction_checks(b));
  } else if (id == "rocard-energy") {
    add(rocard_energy(b));
    add(rocard_dynamic_equations(b));
  } else if (id == "greidanus-limit") {
    add(greidanus_limit(b));
  } else if (id == "moving-plane-oracle") {
    add(moving_plane_oracle(b));
  } else if (id == "dalembert-conservation") {
    add(dalembert_conservation(b));
  } else if (id == "gradient-check") {
    add(gradient_check(b));
    add(chetaev_checks(b));
    add(rk4_convergence(b));
    add(constraint_drift(b));
  } else {
    throw UsageError("unknown suite '" + id + "'");
  }
  return r;
}

}  // namespace hocon::verify
