#pragma once

// Acceleration-level form of the equations of motion.
//
// At a state (x, u) the unknowns are the accelerations u' and the multipliers
// lambda. The dynamical rows say that the Euler-Lagrange covector lies in the
// row space of R_V:
//
//     mass * u' + bias = R_V^T lambda,
//
// and every kinematic row is lifted to acceleration level (velocity rows are
// differentiated once, position rows twice, acceleration rows are used as
// given). The stacked system
//
//     [ mass  -R_V^T ] [u'    ]   [ -bias ]
//     [ A      0     ] [lambda] = [ -b    ]
//
// may have more equations than unknowns. It is solved in the least-squares
// sense and the solution is accepted only when the defect is within solve_tol.
//
// The same code serves reduced systems: there x holds shape coordinates, u
// holds (Lie algebra velocity, shape rates), and the bias picks up the
// coadjoint term.

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hocon/core.hpp"

namespace hocon {

/// Positions and velocities. For reduced systems `q` holds the shape
/// coordinates and `qd` the Lie algebra velocity followed by shape rates.
struct State {
  Vec q;
  Vec qd;
};

struct Gains {
  double alpha = 0.0;  // 1/s
  double beta = 0.0;   // 1/s^2
};

struct SolveOptions {
  double solve_tol = 1e-8;  // relative to 1 + |rhs|
  double rank_tol = 1e-10;  // relative singular-value cut-off for the stacked matrix
  double cons_tol = 1e-10;  // velocity-level consistency required by assemble()
  bool resolve_hidden = true;
  Gains gains{};
};

namespace detail {

/// Uniform view over full and reduced systems.
struct Dynamics {
  int npos = 0;         // dim x
  int nvel = 0;         // dim u
  int rate_offset = 0;  // x' = u.segment(rate_offset, npos)
  const LagrangianFunction* lagrangian = nullptr;
  const LagrangianSpec* spec = nullptr;  // for closed-form gradients, full systems only
  const KinematicConstraintSet* kinematic = nullptr;
  const VariationalConstraintSet* variational = nullptr;
  const ModelHooks* hooks = nullptr;
  int group_dim = 0;
  const std::vector<double>* structure = nullptr;  // c^k_ij at (k*d + i)*d + j
  double bracket_sign = 1.0;

  template <class T>
  VecT<T> rates(const VecT<T>& u) const {
    return u.segment(rate_offset, npos);
  }

  Derivs<double> jet(const Vec& x, const Vec& u, const Vec& udot) const { return {x, u, udot}; }
};

inline Dynamics view(const NonholonomicSystem& sys) {
  Dynamics d;
  d.npos = d.nvel = sys.dim();
  d.lagrangian = &sys.lagrangian().function();
  d.spec = &sys.lagrangian();
  d.kinematic = &sys.kinematic();
  d.variational = &sys.variational();
  d.hooks = &sys.hooks();
  return d;
}

template <class T>
using DD = Dual<Dual<T>>;

template <class T>
VecT<DD<T>> nest(const VecT<T>& x, const VecT<T>& inner, const VecT<T>& outer) {
  VecT<DD<T>> out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i)
    out(i) = DD<T>(Dual<T>(x(i), inner(i)), Dual<T>(outer(i), T(0.0)));
  return out;
}

template <class T>
VecT<T> unit(Eigen::Index n, Eigen::Index k) {
  VecT<T> e = VecT<T>::Constant(n, T(0.0));
  if (k >= 0) e(k) = T(1.0);
  return e;
}

template <class T>
VecT<T> adstar(const Dynamics& d, const VecT<T>& v, const VecT<T>& mu) {
  const int g = d.group_dim;
  VecT<T> out = VecT<T>::Constant(g, T(0.0));
  const auto& c = *d.structure;
  for (int j = 0; j < g; ++j) {
    T acc(0.0);
    for (int i = 0; i < g; ++i)
      for (int k = 0; k < g; ++k) {
        double cij = c[static_cast<size_t>((k * g + i) * g + j)];
        if (cij != 0.0) acc += (d.bracket_sign * cij) * (v(i) * mu(k));
      }
    out(j) = acc;
  }
  return out;
}

template <class T>
struct ELTerms {
  MatT<T> mass;
  VecT<T> bias;
  VecT<T> momentum;  // dl/du
};

/// Mass matrix d^2 l/du^2 and the remainder of the Euler-Lagrange covector.
template <class T>
ELTerms<T> euler_lagrange_terms(const Dynamics& d, const VecT<T>& x, const VecT<T>& u) {
  const auto& l2 = d.lagrangian->template get<DD<T>>();
  const Eigen::Index N = u.size();
  const Eigen::Index P = x.size();
  const VecT<T> xdot = d.rates(u);
  const VecT<T> zeroN = VecT<T>::Constant(N, T(0.0));
  const VecT<T> zeroP = VecT<T>::Constant(P, T(0.0));

  ELTerms<T> out;
  out.mass.resize(N, N);
  out.bias.resize(N);
  out.momentum.resize(N);

  const VecT<DD<T>> x_const = nest(x, zeroP, zeroP);
  const VecT<DD<T>> x_along = nest(x, zeroP, xdot);
  for (Eigen::Index i = 0; i < N; ++i) {
    const VecT<T> ei = unit<T>(N, i);
    DD<T> mixed = l2(x_along, nest(u, ei, zeroN));
    out.momentum(i) = mixed.v.d;
    out.bias(i) = mixed.d.d;
    for (Eigen::Index j = i; j < N; ++j) {
      DD<T> h = l2(x_const, nest(u, ei, unit<T>(N, j)));
      out.mass(i, j) = out.mass(j, i) = h.d.d;
    }
  }

  if (P > 0) {
    VecT<T> dldx;
    bool done = false;
    if constexpr (std::is_same_v<T, double>) {
      if (d.spec && d.spec->deriv_mode() == DerivMode::Analytic) {
        dldx = d.spec->grad_q(x, u);
        done = true;
      }
    }
    if (!done) {
      const auto& l1 = d.lagrangian->template get<Dual<T>>();
      const VecT<Dual<T>> uc = constant(u);
      dldx = gradient([&](const VecT<Dual<T>>& xs) { return l1(xs, uc); }, x);
    }
    for (Eigen::Index k = 0; k < P; ++k) out.bias(d.rate_offset + k) -= dldx(k);
  }

  if (d.group_dim > 0) {
    VecT<T> ad = adstar<T>(d, u.head(d.group_dim), out.momentum.head(d.group_dim));
    for (int k = 0; k < d.group_dim; ++k) out.bias(k) -= ad(k);
  }
  return out;
}

template <class T>
struct Lifted {
  MatT<T> A;
  VecT<T> b;
};

/// Acceleration-level rows A u' + b = 0 for every kinematic row.
template <class T>
Lifted<T> lift_rows(const Dynamics& d, const VecT<T>& x, const VecT<T>& u, const Gains& gains) {
  const auto& kin = *d.kinematic;
  const int r = kin.rows();
  const Eigen::Index N = u.size();
  const Eigen::Index P = x.size();
  Lifted<T> out{MatT<T>::Constant(r, N, T(0.0)), VecT<T>::Constant(r, T(0.0))};
  if (r == 0) return out;
  if (!kin.highest_affine())
    throw UnsupportedConstraintError("kinematic rows are not affine in their highest derivative");

  const auto& orders = kin.row_orders();
  bool has0 = false, has1 = false, has2 = false;
  for (int o : orders) {
    has0 |= o == 0;
    has1 |= o == 1;
    has2 |= o == 2;
  }

  Derivs<T> jet{x, u, VecT<T>::Constant(N, T(0.0))};
  jet.resize(static_cast<size_t>(kin.order()) + 1);
  const VecT<T> xdot = d.rates(u);
  const VecT<T> value = kin.template residual<T>(jet);

  auto pick = [&](int order, auto&& fn) {
    for (int i = 0; i < r; ++i)
      if (orders[static_cast<size_t>(i)] == order) fn(i);
  };

  if (has2) {
    MatT<T> Jdd = residual_slot_jacobian<T>(kin, jet, 2);
    pick(2, [&](int i) {
      out.A.row(i) = Jdd.row(i);
      out.b(i) = value(i);
    });
  }
  if (has1 || has0) {
    // Directional derivative along (x', 0, 0): dR/dx . x'.
    Derivs<Dual<T>> along = constant(jet);
    along[0] = seed(x, xdot);
    VecT<T> rdot_pos = tangents(kin.template residual<Dual<T>>(along));
    if (has1) {
      MatT<T> Jd = residual_slot_jacobian<T>(kin, jet, 1);
      pick(1, [&](int i) {
        out.A.row(i) = Jd.row(i);
        out.b(i) = rdot_pos(i) + T(2.0 * gains.alpha) * value(i);
      });
    }
    if (has0) {
      // R(x) with x' = S u: R'' = dR/dx S u' + x'^T d^2R/dx^2 x'.
      MatT<T> Jx = residual_slot_jacobian<T>(kin, jet, 0);
      Derivs<DD<T>> twice;
      for (const auto& v : jet) {
        const VecT<T> z = VecT<T>::Constant(v.size(), T(0.0));
        twice.push_back(nest(v, z, z));
      }
      twice[0] = nest(x, xdot, xdot);
      VecT<DD<T>> r2 = kin.template residual<DD<T>>(twice);
      pick(0, [&](int i) {
        for (Eigen::Index k = 0; k < P; ++k) out.A(i, d.rate_offset + k) = Jx(i, k);
        out.b(i) = r2(i).d.d + T(2.0 * gains.alpha) * rdot_pos(i) + T(gains.beta) * value(i);
      });
    }
  }
  return out;
}

template <class T>
struct Stacked {
  MatT<T> K;
  VecT<T> rhs;
};

template <class T>
struct AssemblyT {
  MatT<T> mass;
  VecT<T> bias;
  MatT<T> vrows;
  MatT<T> A;
  VecT<T> b;

  Stacked<T> stacked() const {
    const Eigen::Index N = mass.rows(), m = vrows.rows(), r = A.rows();
    Stacked<T> s{MatT<T>::Constant(N + r, N + m, T(0.0)), VecT<T>(N + r)};
    s.K.topLeftCorner(N, N) = mass;
    if (m > 0) s.K.topRightCorner(N, m) = -vrows.transpose();
    if (r > 0) s.K.bottomLeftCorner(r, N) = A;
    s.rhs.head(N) = -bias;
    if (r > 0) s.rhs.tail(r) = -b;
    return s;
  }
};

template <class T>
AssemblyT<T> assemble_t(const Dynamics& d, const VecT<T>& x, const VecT<T>& u,
                        const VecT<T>& udot_guess, const Gains& gains) {
  ELTerms<T> el = euler_lagrange_terms<T>(d, x, u);
  Lifted<T> lk = lift_rows<T>(d, x, u, gains);
  Derivs<T> vjet{x, u, udot_guess};
  MatT<T> vr = d.variational->template matrix<T>(vjet);
  return {std::move(el.mass), std::move(el.bias), std::move(vr), std::move(lk.A), std::move(lk.b)};
}

inline void guard(const Dynamics& d, const Vec& x, const Vec& u) {
  if (d.hooks && d.hooks->domain_guard) d.hooks->domain_guard(x, u);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Public operations
// ---------------------------------------------------------------------------

/// Euler-Lagrange covector d/dt dL/dq' - dL/dq at a 2-jet.
inline Vec euler_lagrange(const LagrangianSpec& L, const JetPoint& jet2) {
  if (jet2.order() < 2) throw UsageError("euler_lagrange needs a jet of order >= 2");
  if (jet2.dim() != L.dim()) throw UsageError("jet dimension does not match the Lagrangian");
  detail::Dynamics d;
  d.npos = d.nvel = L.dim();
  d.lagrangian = &L.function();
  d.spec = &L;
  auto el = detail::euler_lagrange_terms<double>(d, jet2[0], jet2[1]);
  return el.mass * jet2[2] + el.bias;
}

struct LiftedRows {
  Mat A;  // krows_A
  Vec b;  // krows_b
};

/// Kinematic rows at acceleration level: A q'' + b = 0.
inline LiftedRows lift_kinematic(const KinematicConstraintSet& ck, const State& s,
                                 const Gains& gains = {}) {
  detail::Dynamics d;
  d.npos = d.nvel = static_cast<int>(s.q.size());
  d.kinematic = &ck;
  auto l = detail::lift_rows<double>(d, s.q, s.qd, gains);
  return {l.A, l.b};
}

/// Per-state linear system in (q'', lambda). Sign convention: the
/// Euler-Lagrange covector equals R_V^T lambda, so the constraint force on the
/// force side is -R_V^T lambda.
struct AccelerationSystem {
  Mat mass;
  Vec bias;
  Mat vrows;
  Mat krows_A;
  Vec krows_b;
  State state_ref;
  std::vector<std::string> kin_row_names;

  int unknowns() const { return static_cast<int>(mass.rows() + vrows.rows()); }
  int equations() const { return static_cast<int>(mass.rows() + krows_A.rows()); }
};

struct SolveResult {
  Vec qdd;
  Vec lambda;
  double residual = 0.0;
  double tolerance = 0.0;
  int lambda_nullity = 0;  // multiplier directions left free by the equations
  int hidden_rows = 0;     // consistency conditions differentiated to fix q''
  double hidden_defect = 0.0;
  double hidden_tolerance = 0.0;  // cons_tol * (1 + |rhs|)
  std::vector<std::string> hidden_row_names;
};

namespace detail {

struct Factored {
  Eigen::JacobiSVD<Mat> svd;
  int rank = 0;
};

inline Factored factor(const Mat& K, double rank_tol) {
  Factored f{Eigen::JacobiSVD<Mat>(K, Eigen::ComputeFullU | Eigen::ComputeFullV), 0};
  const auto& s = f.svd.singularValues();
  if (s.size() > 0 && s(0) > 0.0)
    for (Eigen::Index i = 0; i < s.size(); ++i)
      if (s(i) > rank_tol * s(0)) ++f.rank;
  return f;
}

inline Vec min_norm_solve(const Factored& f, const Vec& rhs) {
  const auto& U = f.svd.matrixU();
  const auto& V = f.svd.matrixV();
  const auto& s = f.svd.singularValues();
  Vec y = Vec::Zero(V.rows());
  for (int i = 0; i < f.rank; ++i) y += V.col(i) * (U.col(i).dot(rhs) / s(i));
  return y;
}

/// Dimension of the acceleration part of the right nullspace.
inline int accel_nullity(const Factored& f, Eigen::Index nvel) {
  const auto& V = f.svd.matrixV();
  const Eigen::Index k = V.cols() - f.rank;
  if (k <= 0) return 0;
  Mat block = V.block(0, f.rank, nvel, k);
  return numerical_rank(block, 1e-8);
}

inline Mat left_null(const Factored& f) {
  const auto& U = f.svd.matrixU();
  return U.rightCols(U.cols() - f.rank);
}

struct Hidden {
  Mat W;  // left nullspace of the stacked matrix
  Vec h;  // W^T rhs, zero on consistent states
  Mat H;  // dh/du
  Vec g;  // -dh/dx . x'
};

/// Consistency conditions W^T (K y - rhs) = 0 that fix no acceleration
/// directly, and their derivatives. dh = -W^T dF with F = K y0 - rhs held at
/// any exact solution y0; the result does not depend on which one.
inline Hidden hidden_conditions(const Dynamics& d, const Vec& x, const Vec& u, const Vec& y0,
                                const Mat& W, const Vec& rhs, const Gains& gains) {
  const Eigen::Index N = u.size();
  const Vec udot0 = y0.head(N);
  auto dF = [&](const VecT<D1>& xs, const VecT<D1>& us) {
    auto a = assemble_t<D1>(d, xs, us, constant(udot0), gains);
    auto s = a.stacked();
    VecT<D1> F = s.K * y0.cast<D1>() - s.rhs;
    return tangents(F);
  };
  Hidden out;
  out.W = W;
  out.h = W.transpose() * rhs;
  out.H.resize(W.cols(), N);
  const VecT<D1> xc = constant(x);
  const VecT<D1> uc = constant(u);
  for (Eigen::Index j = 0; j < N; ++j) out.H.col(j) = -W.transpose() * dF(xc, seed_unit(u, j));
  if (x.size() > 0)
    out.g = W.transpose() * dF(seed(x, Vec(d.rates(u))), uc);
  else
    out.g = Vec::Zero(W.cols());
  return out;
}

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

/// Names of the kinematic rows with non-negligible weight in a set of
/// left-null vectors (rows are laid out EL rows first, kinematic rows after).
inline std::vector<std::string> rows_in(const Mat& W, const Dynamics& d) {
  std::vector<std::string> names;
  const int N = d.nvel;
  if (W.cols() == 0) return names;
  for (int i = 0; i < d.kinematic->rows(); ++i)
    if (W.rows() > N + i && W.row(N + i).cwiseAbs().maxCoeff() > 1e-6)
      names.push_back(d.kinematic->row_names()[static_cast<size_t>(i)]);
  return names;
}

inline SolveResult finish(const Factored& f, const Mat& K, const Vec& rhs, Eigen::Index nvel,
                          const SolveOptions& opts, const std::vector<std::string>& rows) {
  Vec y = min_norm_solve(f, rhs);
  SolveResult res;
  res.residual = (K * y - rhs).norm();
  res.tolerance = opts.solve_tol * (1.0 + rhs.norm());
  int an = accel_nullity(f, nvel);
  if (an > 0)
    throw AmbiguityError("accelerations are not unique; nullspace dimension " + std::to_string(an),
                         an);
  if (!(res.residual <= res.tolerance))
    throw InconsistentDynamicsError("overdetermined system has no solution here (residual " +
                                        fmt(res.residual) + " > " + fmt(res.tolerance) + ")",
                                    res.residual, rows);
  res.qdd = y.head(nvel);
  res.lambda = y.tail(y.size() - nvel);
  res.lambda_nullity = (static_cast<int>(K.cols()) - f.rank) - an;
  return res;
}

/// Assemble and solve at (x, u), resolving hidden consistency conditions
/// once when the accelerations are otherwise undetermined.
inline SolveResult solve_dynamics(const Dynamics& d, const Vec& x, const Vec& u,
                                  const SolveOptions& opts) {
  guard(d, x, u);
  const Eigen::Index N = u.size();
  Vec udot_guess = Vec::Zero(N);
  const int passes = d.variational->order() == 2 ? 20 : 1;
  SolveResult res;
  for (int pass = 0; pass < passes; ++pass) {
    auto a = assemble_t<double>(d, x, u, udot_guess, opts.gains);
    auto s = a.stacked();
    Factored f = factor(s.K, opts.rank_tol);
    const int an = accel_nullity(f, N);
    if (an == 0 || !opts.resolve_hidden) {
      std::vector<std::string> rows = rows_in(left_null(f), d);
      res = finish(f, s.K, s.rhs, N, opts, rows);
    } else {
      Mat W = left_null(f);
      if (W.cols() == 0)
        throw AmbiguityError("accelerations are not unique and no consistency condition fixes them; "
                             "nullspace dimension " + std::to_string(an),
                             an);
      Vec y0 = min_norm_solve(f, s.rhs);
      Hidden hc = hidden_conditions(d, x, u, y0, W, s.rhs, opts.gains);
      const Eigen::Index rows = s.K.rows(), cols = s.K.cols(), w = W.cols();
      Mat P = Mat::Identity(rows, rows) - W * W.transpose();
      Mat K2 = Mat::Zero(rows + w, cols);
      K2.topRows(rows) = P * s.K;
      K2.bottomLeftCorner(w, N) = hc.H;
      Vec rhs2(rows + w);
      rhs2.head(rows) = P * s.rhs;
      rhs2.tail(w) = hc.g;
      Factored f2 = factor(K2, opts.rank_tol);
      res = finish(f2, K2, rhs2, N, opts, rows_in(W, d));
      res.hidden_rows = static_cast<int>(w);
      res.hidden_defect = hc.h.cwiseAbs().maxCoeff();
      res.hidden_tolerance = opts.cons_tol * (1.0 + s.rhs.norm());
      res.hidden_row_names = rows_in(W, d);
    }
    if (passes == 1 || (res.qdd - udot_guess).norm() <= 1e-14 * (1.0 + res.qdd.norm())) break;
    udot_guess = res.qdd;
  }
  return res;
}

/// Hidden consistency conditions at (x, u); empty when the accelerations are
/// determined without them.
inline Hidden hidden_at(const Dynamics& d, const Vec& x, const Vec& u, const SolveOptions& opts) {
  auto a = assemble_t<double>(d, x, u, Vec::Zero(u.size()), opts.gains);
  auto s = a.stacked();
  Factored f = factor(s.K, opts.rank_tol);
  if (accel_nullity(f, u.size()) == 0) return {};
  Mat W = left_null(f);
  if (W.cols() == 0) return {};
  return hidden_conditions(d, x, u, min_norm_solve(f, s.rhs), W, s.rhs, opts.gains);
}

/// Velocity-level (and position-level) kinematic residuals.
inline Vec low_order_residual(const Dynamics& d, const Vec& x, const Vec& u) {
  const auto& kin = *d.kinematic;
  Derivs<double> jet{x, u, Vec::Zero(u.size())};
  jet.resize(static_cast<size_t>(kin.order()) + 1);
  Vec r = kin.residual<double>(jet);
  Vec out(r.size());
  int k = 0;
  for (int i = 0; i < kin.rows(); ++i)
    if (kin.row_orders()[static_cast<size_t>(i)] <= 1) out(k++) = r(i);
  return out.head(k);
}

inline std::vector<std::string> low_order_names(const Dynamics& d) {
  std::vector<std::string> names;
  const auto& kin = *d.kinematic;
  for (int i = 0; i < kin.rows(); ++i)
    if (kin.row_orders()[static_cast<size_t>(i)] <= 1)
      names.push_back(kin.row_names()[static_cast<size_t>(i)]);
  return names;
}

inline void require_consistent(const Dynamics& d, const Vec& x, const Vec& u, double cons_tol) {
  Vec r = low_order_residual(d, x, u);
  auto names = low_order_names(d);
  std::vector<std::string> bad;
  std::ostringstream msg;
  for (Eigen::Index i = 0; i < r.size(); ++i)
    if (!(std::abs(r(i)) <= cons_tol)) {
      bad.push_back(names[static_cast<size_t>(i)]);
      msg << (bad.size() > 1 ? ", " : "") << names[static_cast<size_t>(i)] << " = " << fmt(r(i));
    }
  if (!bad.empty())
    throw InconsistentStateError("state violates kinematic rows: " + msg.str(), bad);
}

inline AccelerationSystem to_public(const Dynamics& d, const Vec& x, const Vec& u,
                                    const SolveOptions& opts) {
  auto a = assemble_t<double>(d, x, u, Vec::Zero(u.size()), opts.gains);
  return {a.mass, a.bias, a.vrows, a.A, a.b, State{x, u}, d.kinematic->row_names()};
}

}  // namespace detail

/// Builds the acceleration system at a state that satisfies the velocity
/// (and position) level kinematic rows to cons_tol.
inline AccelerationSystem assemble(const NonholonomicSystem& sys, const State& s,
                                   const SolveOptions& opts = {}) {
  if (s.q.size() != sys.dim() || s.qd.size() != sys.dim())
    throw UsageError("state dimension does not match the system");
  auto d = detail::view(sys);
  detail::guard(d, s.q, s.qd);
  detail::require_consistent(d, s.q, s.qd, opts.cons_tol);
  return detail::to_public(d, s.q, s.qd, opts);
}

/// Least-squares solve of the stacked system with the residual gate.
inline SolveResult solve(const AccelerationSystem& a, const SolveOptions& opts = {}) {
  detail::AssemblyT<double> as{a.mass, a.bias, a.vrows, a.krows_A, a.krows_b};
  auto s = as.stacked();
  auto f = detail::factor(s.K, opts.rank_tol);
  std::vector<std::string> rows;
  Mat W = detail::left_null(f);
  const Eigen::Index N = a.mass.rows();
  for (Eigen::Index i = 0; W.cols() > 0 && i < a.krows_A.rows(); ++i)
    if (W.rows() > N + i && W.row(N + i).cwiseAbs().maxCoeff() > 1e-6)
      rows.push_back(a.kin_row_names[static_cast<size_t>(i)]);
  return detail::finish(f, s.K, s.rhs, N, opts, rows);
}

/// assemble() + solve(), with hidden consistency conditions differentiated
/// once when the accelerations would otherwise be ambiguous.
inline SolveResult solve_state(const NonholonomicSystem& sys, const State& s,
                               const SolveOptions& opts = {}) {
  auto d = detail::view(sys);
  return detail::solve_dynamics(d, s.q, s.qd, opts);
}

}  // namespace hocon
