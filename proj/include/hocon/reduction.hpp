#pragma once

// Systems on a Lie algebra obtained by reducing a group-invariant Lagrangian.
//
// The state is (x, u) with x optional flat shape coordinates and
// u = (v, x'), v in the algebra. The dynamical rows are
//
//     d/dt dl/dv - ad*_v dl/dv  in the span of the reduced variational rows,
//
// with ad* built from the structure constants. Right reduction uses the
// bracket with the opposite sign, so the same code serves both orientations.

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hocon/assembler.hpp"

namespace hocon {

enum class Orientation { Left, Right };

/// One factor of a direct sum of algebras.
struct GroupFactor {
  enum Kind { SO3, Rn } kind;
  int dim;
};

/// Finite-dimensional Lie algebra given by structure constants
/// [e_i, e_j] = c^k_ij e_k.
class LieGroupSpec {
 public:
  LieGroupSpec(int dim, std::vector<double> structure, Orientation orientation,
               std::vector<GroupFactor> factors = {})
      : dim_(dim), c_(std::move(structure)), orientation_(orientation), factors_(std::move(factors)) {
    if (dim < 1) throw ConfigurationError("algebra dimension must be >= 1");
    if (static_cast<int>(c_.size()) != dim * dim * dim)
      throw ConfigurationError("structure constants need dim^3 entries");
    for (int k = 0; k < dim; ++k)
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
          if (std::abs(c(k, i, j) + c(k, j, i)) > 1e-14)
            throw ConfigurationError("bracket is not antisymmetric");
    if (jacobi_residual() > 1e-12) throw ConfigurationError("bracket violates the Jacobi identity");
  }

  static LieGroupSpec so3(Orientation o) {
    std::vector<double> c(27, 0.0);
    auto set = [&](int i, int j, int k) {
      c[static_cast<size_t>((k * 3 + i) * 3 + j)] = 1.0;
      c[static_cast<size_t>((k * 3 + j) * 3 + i)] = -1.0;
    };
    set(0, 1, 2);
    set(1, 2, 0);
    set(2, 0, 1);
    return LieGroupSpec(3, std::move(c), o, {{GroupFactor::SO3, 3}});
  }

  static LieGroupSpec abelian(int n, Orientation o = Orientation::Left) {
    return LieGroupSpec(n, std::vector<double>(static_cast<size_t>(n * n * n), 0.0), o,
                        {{GroupFactor::Rn, n}});
  }

  /// a (+) b, with a's basis first.
  static LieGroupSpec direct_sum(const LieGroupSpec& a, const LieGroupSpec& b) {
    if (a.orientation() != b.orientation())
      throw ConfigurationError("direct sum of algebras with different orientations");
    const int n = a.dim() + b.dim();
    std::vector<double> c(static_cast<size_t>(n * n * n), 0.0);
    auto put = [&](const LieGroupSpec& g, int off) {
      for (int k = 0; k < g.dim(); ++k)
        for (int i = 0; i < g.dim(); ++i)
          for (int j = 0; j < g.dim(); ++j)
            c[static_cast<size_t>(((k + off) * n + i + off) * n + j + off)] = g.c(k, i, j);
    };
    put(a, 0);
    put(b, a.dim());
    auto f = a.factors();
    f.insert(f.end(), b.factors().begin(), b.factors().end());
    return LieGroupSpec(n, std::move(c), a.orientation(), std::move(f));
  }

  int dim() const { return dim_; }
  Orientation orientation() const { return orientation_; }
  const std::vector<GroupFactor>& factors() const { return factors_; }
  const std::vector<double>& structure() const { return c_; }
  double c(int k, int i, int j) const { return c_[static_cast<size_t>((k * dim_ + i) * dim_ + j)]; }

  /// Sign applied to the structure constants in the reduced equations.
  double bracket_sign() const { return orientation_ == Orientation::Right ? -1.0 : 1.0; }

  /// Bracket from the structure constants (orientation not applied).
  Vec bracket(const Vec& x, const Vec& y) const {
    Vec out = Vec::Zero(dim_);
    for (int k = 0; k < dim_; ++k)
      for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j) out(k) += c(k, i, j) * x(i) * y(j);
    return out;
  }

  /// ad*_v mu with the orientation sign applied.
  Vec adstar(const Vec& v, const Vec& mu) const {
    Vec out = Vec::Zero(dim_);
    for (int j = 0; j < dim_; ++j)
      for (int i = 0; i < dim_; ++i)
        for (int k = 0; k < dim_; ++k) out(j) += bracket_sign() * c(k, i, j) * v(i) * mu(k);
    return out;
  }

  double jacobi_residual() const {
    double worst = 0.0;
    for (int a = 0; a < dim_; ++a)
      for (int b = 0; b < dim_; ++b)
        for (int e = 0; e < dim_; ++e) {
          Vec x = Vec::Unit(dim_, a), y = Vec::Unit(dim_, b), z = Vec::Unit(dim_, e);
          Vec r = bracket(x, bracket(y, z)) + bracket(y, bracket(z, x)) + bracket(z, bracket(x, y));
          worst = std::max(worst, r.cwiseAbs().maxCoeff());
        }
    return worst;
  }

 private:
  int dim_;
  std::vector<double> c_;
  Orientation orientation_;
  std::vector<GroupFactor> factors_;
};

/// Reduced system. The Lagrangian is l(x, u) with u = (v, x'); the
/// kinematic residual takes the jet (x, u, u'); the variational matrix acts on
/// (eta, dx).
class ReducedSystem {
 public:
  ReducedSystem(LieGroupSpec group, LagrangianFunction l, KinematicConstraintSet kinematic,
                VariationalConstraintSet variational, int shape_dim = 0, Chart chart = {},
                std::string notes = {}, ModelHooks hooks = {})
      : group_(std::move(group)),
        l_(std::move(l)),
        kinematic_(std::move(kinematic)),
        variational_(std::move(variational)),
        shape_dim_(shape_dim),
        chart_(std::move(chart)),
        notes_(std::move(notes)),
        hooks_(std::move(hooks)) {
    if (shape_dim < 0) throw ConfigurationError("negative shape dimension");
    if (variational_.dim() != velocity_dim())
      throw ConfigurationError("reduced variational rows have " +
                               std::to_string(variational_.dim()) + " columns, expected " +
                               std::to_string(velocity_dim()));
    if (chart_.coords.empty()) {
      for (int i = 0; i < shape_dim_; ++i) chart_.coords.push_back("x" + std::to_string(i + 1));
      for (int i = 0; i < velocity_dim(); ++i) chart_.coords.push_back("u" + std::to_string(i + 1));
    }
    if (static_cast<int>(chart_.coords.size()) != shape_dim_ + velocity_dim())
      throw ConfigurationError("reduced chart needs shape names followed by velocity names");
  }

  const LieGroupSpec& group() const { return group_; }
  const LagrangianFunction& lagrangian() const { return l_; }
  const KinematicConstraintSet& kinematic() const { return kinematic_; }
  const VariationalConstraintSet& variational() const { return variational_; }
  int shape_dim() const { return shape_dim_; }
  int velocity_dim() const { return group_.dim() + shape_dim_; }
  /// Names: shape coordinates, then velocity components.
  const Chart& chart() const { return chart_; }
  const std::string& notes() const { return notes_; }
  const ModelHooks& hooks() const { return hooks_; }

  double l(const Vec& x, const Vec& u) const { return l_.get<double>()(x, u); }

 private:
  LieGroupSpec group_;
  LagrangianFunction l_;
  KinematicConstraintSet kinematic_;
  VariationalConstraintSet variational_;
  int shape_dim_;
  Chart chart_;
  std::string notes_;
  ModelHooks hooks_;
};

namespace detail {

inline Dynamics view(const ReducedSystem& sys) {
  Dynamics d;
  d.npos = sys.shape_dim();
  d.nvel = sys.velocity_dim();
  d.rate_offset = sys.group().dim();
  d.lagrangian = &sys.lagrangian();
  d.kinematic = &sys.kinematic();
  d.variational = &sys.variational();
  d.hooks = &sys.hooks();
  d.group_dim = sys.group().dim();
  d.structure = &sys.group().structure();
  d.bracket_sign = sys.group().bracket_sign();
  return d;
}

inline void check_state(const ReducedSystem& sys, const State& s) {
  if (s.q.size() != sys.shape_dim() || s.qd.size() != sys.velocity_dim())
    throw UsageError("reduced state has wrong dimensions");
}

}  // namespace detail

/// d/dt dl/dv - ad*_v dl/dv (and the ordinary Euler-Lagrange rows of the
/// shape variables) at (x, u, u').
inline Vec reduced_euler_lagrange(const ReducedSystem& sys, const State& s, const Vec& udot) {
  detail::check_state(sys, s);
  auto el = detail::euler_lagrange_terms<double>(detail::view(sys), s.q, s.qd);
  return el.mass * udot + el.bias;
}

inline Vec reduced_euler_lagrange(const ReducedSystem& sys, const Vec& v, const Vec& vdot) {
  return reduced_euler_lagrange(sys, State{Vec(0), v}, vdot);
}

inline AccelerationSystem assemble_reduced(const ReducedSystem& sys, const State& s,
                                           const SolveOptions& opts = {}) {
  detail::check_state(sys, s);
  auto d = detail::view(sys);
  detail::guard(d, s.q, s.qd);
  detail::require_consistent(d, s.q, s.qd, opts.cons_tol);
  return detail::to_public(d, s.q, s.qd, opts);
}

/// Accelerations (v', x'') and multipliers at a reduced state.
inline SolveResult solve_reduced(const ReducedSystem& sys, const State& s,
                                 const SolveOptions& opts = {}) {
  detail::check_state(sys, s);
  return detail::solve_dynamics(detail::view(sys), s.q, s.qd, opts);
}

// ---------------------------------------------------------------------------
// Reconstruction
// ---------------------------------------------------------------------------

inline Eigen::Matrix3d hat(const Eigen::Vector3d& w) {
  Eigen::Matrix3d m;
  m << 0, -w(2), w(1), w(2), 0, -w(0), -w(1), w(0), 0;
  return m;
}

/// exp on so(3): Rodrigues, with the Taylor series for tiny angles.
inline Eigen::Matrix3d so3_exp(const Eigen::Vector3d& w) {
  const double th = w.norm();
  const Eigen::Matrix3d W = hat(w);
  double a, b;
  if (th < 1e-8) {
    a = 1.0 - th * th / 6.0;
    b = 0.5 - th * th / 24.0;
  } else {
    a = std::sin(th) / th;
    b = (1.0 - std::cos(th)) / (th * th);
  }
  return Eigen::Matrix3d::Identity() + a * W + b * W * W;
}

/// Nearest rotation (polar factor).
inline Eigen::Matrix3d orthonormalize(const Eigen::Matrix3d& A) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d R = svd.matrixU() * svd.matrixV().transpose();
  if (R.determinant() < 0) {
    Eigen::Matrix3d U = svd.matrixU();
    U.col(2) *= -1.0;
    R = U * svd.matrixV().transpose();
  }
  return R;
}

/// Element of a product of SO(3) and R^n factors, in factor order.
struct GroupElement {
  std::vector<Eigen::Matrix3d> rotations;
  std::vector<Vec> translations;
};

inline GroupElement identity_element(const LieGroupSpec& g) {
  GroupElement e;
  for (const auto& f : g.factors()) {
    if (f.kind == GroupFactor::SO3)
      e.rotations.push_back(Eigen::Matrix3d::Identity());
    else
      e.translations.push_back(Vec::Zero(f.dim));
  }
  return e;
}

/// One exponential per step: right reduction g <- exp(dt v) g, left
/// reduction g <- g exp(dt v). Rotations are re-projected onto SO(3) after
/// every update. `v_series[k]` holds at least the algebra part of u at step
/// k; the result has one element per entry of `v_series`, starting at g0.
inline std::vector<GroupElement> reconstruct(const LieGroupSpec& g, const GroupElement& g0,
                                             const std::vector<Vec>& v_series, double dt) {
  if (g.factors().empty()) throw UsageError("reconstruction needs a factor decomposition");
  std::vector<GroupElement> out;
  out.reserve(v_series.size() + 1);
  out.push_back(g0);
  for (size_t k = 0; k + 1 < v_series.size(); ++k) {
    const Vec& v = v_series[k];
    GroupElement next = out.back();
    int off = 0;
    size_t ir = 0, it = 0;
    for (const auto& f : g.factors()) {
      if (f.kind == GroupFactor::SO3) {
        Eigen::Matrix3d E = so3_exp(dt * Eigen::Vector3d(v.segment<3>(off)));
        Eigen::Matrix3d& A = next.rotations[ir++];
        A = g.orientation() == Orientation::Right ? Eigen::Matrix3d(E * A) : Eigen::Matrix3d(A * E);
        A = orthonormalize(A);
      } else {
        next.translations[it++] += dt * v.segment(off, f.dim);
      }
      off += f.dim;
    }
    out.push_back(std::move(next));
  }
  return out;
}

/// Closed-form right-hand side of the ball on a plane moving with velocity
/// field v(a): returns (omega', a').
struct MovingPlaneRhs {
  Eigen::Vector3d omega_dot;
  Eigen::Vector2d a_dot;
};

inline MovingPlaneRhs moving_plane_rhs(double I, double M,
                                       const std::function<Eigen::Vector2d(const Eigen::Vector2d&)>& field,
                                       const std::function<Eigen::Matrix2d(const Eigen::Vector2d&)>& jac,
                                       const Eigen::Vector3d& omega, const Eigen::Vector2d& a) {
  Eigen::Vector2d adot = Eigen::Vector2d(omega(1), -omega(0)) + field(a);
  Eigen::Vector2d rhs = -M * jac(a) * adot / (I + M);  // = (omega2', -omega1')
  return {Eigen::Vector3d(-rhs(1), rhs(0), 0.0), adot};
}

}  // namespace hocon
