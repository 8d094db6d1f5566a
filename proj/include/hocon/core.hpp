#pragma once

// Jets, Lagrangians, and the two independent constraint families.
//
// A system is the triple (L, C_K, C_V): the kinematic set restricts the motion
// itself through R_K([q]^(k)) = 0, while the variational set only restricts
// virtual displacements through R_V([q]^(l)) * dq = 0. Neither is derived from
// the other unless a constructor such as make_chetaev() says so.

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/SVD>

#include "hocon/autodiff.hpp"
#include "hocon/errors.hpp"

namespace hocon {

/// Numerical rank cut-off for R_V, relative to the largest singular value.
inline constexpr double kRankTol = 1e-10;

inline int numerical_rank(const Mat& m, double rel_tol = kRankTol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > rel_tol * s(0)) ++r;
  return r;
}

// ---------------------------------------------------------------------------
// JetPoint
// ---------------------------------------------------------------------------

/// Coordinates (q, q', ..., q^(k)) of a k-jet at one instant.
class JetPoint {
 public:
  explicit JetPoint(std::vector<Vec> derivs) : derivs_(std::move(derivs)) {
    if (derivs_.empty()) throw UsageError("jet needs at least the position");
    const auto n = derivs_.front().size();
    if (n < 1) throw UsageError("jet dimension must be >= 1");
    for (const auto& d : derivs_)
      if (d.size() != n) throw UsageError("jet derivatives have mismatched dimensions");
  }

  JetPoint(const Vec& q, const Vec& qd) : JetPoint(std::vector<Vec>{q, qd}) {}
  JetPoint(const Vec& q, const Vec& qd, const Vec& qdd) : JetPoint(std::vector<Vec>{q, qd, qdd}) {}

  int order() const { return static_cast<int>(derivs_.size()) - 1; }
  int dim() const { return static_cast<int>(derivs_.front().size()); }
  const Vec& operator[](int s) const { return derivs_.at(static_cast<size_t>(s)); }
  const std::vector<Vec>& derivs() const { return derivs_; }

  /// Projection T^(k)Q -> T^(l)Q.
  JetPoint truncated(int order) const {
    if (order > this->order()) throw UsageError("cannot raise the order of a jet by truncation");
    return JetPoint(std::vector<Vec>(derivs_.begin(), derivs_.begin() + order + 1));
  }

 private:
  std::vector<Vec> derivs_;
};

// ---------------------------------------------------------------------------
// LagrangianSpec
// ---------------------------------------------------------------------------

enum class DerivMode { Analytic, Automatic };

/// L(q, q') with its derivatives taken by forward-mode AD. A model may also
/// register closed-form first derivatives (DerivMode::Analytic); those are
/// then used for double evaluations and must agree with the AD values.
class LagrangianSpec {
 public:
  using GradFn = std::function<Vec(const Vec&, const Vec&)>;

  LagrangianSpec() = default;

  template <class F>
  LagrangianSpec(int dim, const F& f, std::map<std::string, double> params = {})
      : dim_(dim), fn_(f), params_(std::move(params)) {
    if (dim < 1) throw ConfigurationError("Lagrangian dimension must be >= 1");
  }

  LagrangianSpec with_analytic_gradients(GradFn dq, GradFn dqd) const {
    LagrangianSpec out = *this;
    out.dq_ = std::move(dq);
    out.dqd_ = std::move(dqd);
    out.mode_ = DerivMode::Analytic;
    return out;
  }

  int dim() const { return dim_; }
  DerivMode deriv_mode() const { return mode_; }
  const std::map<std::string, double>& params() const { return params_; }
  const LagrangianFunction& function() const { return fn_; }

  template <class T>
  T eval(const VecT<T>& q, const VecT<T>& qd) const {
    return fn_.template get<T>()(q, qd);
  }
  double operator()(const Vec& q, const Vec& qd) const { return eval<double>(q, qd); }

  /// dL/dq, closed form when registered, AD otherwise.
  Vec grad_q(const Vec& q, const Vec& qd) const {
    if (dq_) return dq_(q, qd);
    return grad_q_ad(q, qd);
  }
  Vec grad_qd(const Vec& q, const Vec& qd) const {
    if (dqd_) return dqd_(q, qd);
    return grad_qd_ad(q, qd);
  }
  Vec grad_q_ad(const Vec& q, const Vec& qd) const {
    const auto qdc = constant(qd);
    return gradient([&](const VecT<D1>& x) { return eval<D1>(x, qdc); }, q);
  }
  Vec grad_qd_ad(const Vec& q, const Vec& qd) const {
    const auto qc = constant(q);
    return gradient([&](const VecT<D1>& x) { return eval<D1>(qc, x); }, qd);
  }

  /// d^2 L / dq'^2.
  Mat velocity_hessian(const Vec& q, const Vec& qd) const {
    const auto n = qd.size();
    Mat H(n, n);
    const VecT<D2> q2 = q.cast<D2>();
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i <= j; ++i) {
        VecT<D2> v(n);
        for (Eigen::Index k = 0; k < n; ++k)
          v(k) = D2(D1(qd(k), k == i ? 1.0 : 0.0), D1(k == j ? 1.0 : 0.0, 0.0));
        H(i, j) = H(j, i) = eval<D2>(q2, v).d.d;
      }
    }
    return H;
  }

  /// Energy E = dL/dq' . q' - L.
  double energy(const Vec& q, const Vec& qd) const {
    return grad_qd(q, qd).dot(qd) - (*this)(q, qd);
  }

 private:
  int dim_ = 0;
  LagrangianFunction fn_;
  std::map<std::string, double> params_;
  GradFn dq_, dqd_;
  DerivMode mode_ = DerivMode::Automatic;
};

// ---------------------------------------------------------------------------
// Constraint sets
// ---------------------------------------------------------------------------

/// R_K([q]^(k)) = 0 with r rows. Individual rows may have a lower effective
/// order than the set (Rocard's set mixes two velocity rows with one
/// acceleration row); `row_orders` records that.
class KinematicConstraintSet {
 public:
  struct Options {
    std::vector<int> row_orders;         // defaults to `order` for every row
    std::vector<std::string> row_names;  // defaults to "row<i>"
    bool highest_affine = true;
  };

  KinematicConstraintSet() = default;

  template <class F>
  KinematicConstraintSet(int order, int rows, const F& f, Options opts = {})
      : order_(order), rows_(rows), fn_(f), highest_affine_(opts.highest_affine) {
    if (order < 0 || order > 2) throw ConfigurationError("kinematic order must be 0, 1 or 2");
    if (rows < 0) throw ConfigurationError("negative row count");
    row_orders_ = opts.row_orders.empty() ? std::vector<int>(static_cast<size_t>(rows), order)
                                          : std::move(opts.row_orders);
    row_names_ = std::move(opts.row_names);
    if (row_names_.empty())
      for (int i = 0; i < rows; ++i) row_names_.push_back("row" + std::to_string(i + 1));
    if (static_cast<int>(row_orders_.size()) != rows || static_cast<int>(row_names_.size()) != rows)
      throw ConfigurationError("kinematic row metadata does not match the row count");
    for (int o : row_orders_)
      if (o < 0 || o > order) throw ConfigurationError("row order outside [0, set order]");
  }

  /// The empty constraint set for a system of any dimension.
  static KinematicConstraintSet none(int order = 1) {
    return KinematicConstraintSet(order, 0, [](const auto& jet) {
      using T = scalar_of<decltype(jet.front())>;
      return VecT<T>(0);
    });
  }

  int order() const { return order_; }
  int rows() const { return rows_; }
  bool highest_affine() const { return highest_affine_; }
  const std::vector<int>& row_orders() const { return row_orders_; }
  const std::vector<std::string>& row_names() const { return row_names_; }
  const ResidualFunction& function() const { return fn_; }

  template <class T>
  VecT<T> residual(const Derivs<T>& jet) const {
    if (static_cast<int>(jet.size()) < order_ + 1)
      throw UsageError("jet order " + std::to_string(jet.size() - 1) + " below kinematic order " +
                       std::to_string(order_));
    VecT<T> r = fn_.template get<T>()(Derivs<T>(jet.begin(), jet.begin() + order_ + 1));
    if (r.size() != rows_) throw EvaluationError("kinematic residual has wrong dimension");
    return r;
  }

  Vec operator()(const JetPoint& jet) const { return residual<double>(lift<double>(jet.derivs())); }

  /// Coefficient matrix of the highest derivative, extracted by AD.
  Mat highest_coefficients(const std::vector<Vec>& jet) const {
    if (order_ == 0 || rows_ == 0) return Mat::Zero(rows_, jet.back().size());
    auto base = lift<double>(jet);
    base.resize(static_cast<size_t>(order_) + 1);
    return jacobian(
        [&](const VecT<D1>& top) {
          auto j = constant(base);
          j.back() = top;
          return residual<D1>(j);
        },
        base.back(), rows_);
  }

  /// Samples the coefficient of the highest derivative at two values of it.
  bool check_highest_affine(const JetPoint& sample, double tol = 1e-9) const {
    if (order_ == 0 || rows_ == 0) return true;
    auto j1 = sample.truncated(order_).derivs();
    auto j2 = j1;
    j2.back() = j1.back() * 1.7 + Vec::Constant(j1.back().size(), 0.9);
    Mat a = highest_coefficients(j1), b = highest_coefficients(j2);
    return (a - b).cwiseAbs().maxCoeff() <= tol * std::max(1.0, a.cwiseAbs().maxCoeff());
  }

 private:
  int order_ = 1;
  int rows_ = 0;
  ResidualFunction fn_;
  std::vector<int> row_orders_;
  std::vector<std::string> row_names_;
  bool highest_affine_ = true;
};

/// R_V([q]^(l)) * dq = 0 with m rows: the admissible variations are the
/// kernel of R_V, the admissible constraint forces its row space.
class VariationalConstraintSet {
 public:
  VariationalConstraintSet() = default;

  template <class F>
  VariationalConstraintSet(int order, int rows, int dim, const F& f,
                           std::vector<std::string> row_names = {})
      : order_(order), rows_(rows), dim_(dim), fn_(f), row_names_(std::move(row_names)) {
    if (order < 0 || order > 2) throw ConfigurationError("variational order must be 0, 1 or 2");
    if (row_names_.empty())
      for (int i = 0; i < rows; ++i) row_names_.push_back("var" + std::to_string(i + 1));
    if (static_cast<int>(row_names_.size()) != rows)
      throw ConfigurationError("variational row names do not match the row count");
  }

  static VariationalConstraintSet none(int dim) {
    return VariationalConstraintSet(0, 0, dim, [dim](const auto& jet) {
      using T = scalar_of<decltype(jet.front())>;
      return MatT<T>(0, dim);
    });
  }

  int order() const { return order_; }
  int rows() const { return rows_; }
  int dim() const { return dim_; }
  const std::vector<std::string>& row_names() const { return row_names_; }
  const MatrixFunction& function() const { return fn_; }

  template <class T>
  MatT<T> matrix(const Derivs<T>& jet) const {
    if (static_cast<int>(jet.size()) < order_ + 1)
      throw UsageError("jet order below variational order " + std::to_string(order_));
    MatT<T> m = fn_.template get<T>()(Derivs<T>(jet.begin(), jet.begin() + order_ + 1));
    if (m.rows() != rows_ || m.cols() != dim_)
      throw EvaluationError("variational matrix has wrong shape");
    return m;
  }

  Mat operator()(const JetPoint& jet) const { return matrix<double>(lift<double>(jet.derivs())); }

  /// Dimension of the space of admissible variations, n - rank(R_V).
  int admissible_dim(const JetPoint& jet) const { return dim_ - numerical_rank((*this)(jet)); }

 private:
  int order_ = 0;
  int rows_ = 0;
  int dim_ = 0;
  MatrixFunction fn_;
  std::vector<std::string> row_names_;
};

// ---------------------------------------------------------------------------
// NonholonomicSystem
// ---------------------------------------------------------------------------

/// Optional model-supplied callbacks. All receive positions and velocities.
struct ModelHooks {
  /// Throws ModelDomainError when the state is outside the model's domain.
  std::function<void(const Vec&, const Vec&)> domain_guard;
  /// Closed-form energy rate predicted by the model, if it has one.
  std::function<double(const Vec&, const Vec&)> dissipation_rate;
  /// Quantity that must stay >= 0 for the state to be inside the model's
  /// physical theory; negative samples are counted by energy_audit().
  std::function<double(const Vec&, const Vec&)> theory_monitor;
};

struct Chart {
  std::vector<std::string> coords;
  std::vector<std::string> units;
};

class NonholonomicSystem {
 public:
  NonholonomicSystem(LagrangianSpec lagrangian, KinematicConstraintSet kinematic,
                     VariationalConstraintSet variational, Chart chart = {}, std::string notes = {},
                     ModelHooks hooks = {})
      : lagrangian_(std::move(lagrangian)),
        kinematic_(std::move(kinematic)),
        variational_(std::move(variational)),
        chart_(std::move(chart)),
        notes_(std::move(notes)),
        hooks_(std::move(hooks)) {
    const int n = lagrangian_.dim();
    if (variational_.dim() != n)
      throw ConfigurationError("variational matrix has " + std::to_string(variational_.dim()) +
                               " columns, Lagrangian dimension is " + std::to_string(n));
    if (chart_.coords.empty())
      for (int i = 0; i < n; ++i) chart_.coords.push_back("q" + std::to_string(i + 1));
    if (static_cast<int>(chart_.coords.size()) != n)
      throw ConfigurationError("chart names do not match the dimension");
    if (chart_.units.empty()) chart_.units.assign(static_cast<size_t>(n), "");
  }

  int dim() const { return lagrangian_.dim(); }
  const LagrangianSpec& lagrangian() const { return lagrangian_; }
  const KinematicConstraintSet& kinematic() const { return kinematic_; }
  const VariationalConstraintSet& variational() const { return variational_; }
  const Chart& chart() const { return chart_; }
  const std::string& notes() const { return notes_; }
  const ModelHooks& hooks() const { return hooks_; }

 private:
  LagrangianSpec lagrangian_;
  KinematicConstraintSet kinematic_;
  VariationalConstraintSet variational_;
  Chart chart_;
  std::string notes_;
  ModelHooks hooks_;
};

// ---------------------------------------------------------------------------
// Classical special cases
// ---------------------------------------------------------------------------

/// D'Alembert: C_K is the distribution ker D(q) and C_V is the same
/// distribution. `dist_rows` is a generic callable q -> m x n matrix.
template <class F>
NonholonomicSystem make_dalembert(const LagrangianSpec& L, int rows, const F& dist_rows,
                                  Chart chart = {}) {
  const int n = L.dim();
  if (rows >= n && rows > 0)
    throw ConfigurationError("distribution needs fewer rows than the dimension");
  {
    Mat probe = dist_rows(Vec::Zero(n).eval());
    if (probe.rows() != rows || probe.cols() != n)
      throw ConfigurationError("distribution rows have shape " + std::to_string(probe.rows()) + "x" +
                               std::to_string(probe.cols()) + ", expected " + std::to_string(rows) +
                               "x" + std::to_string(n));
  }
  KinematicConstraintSet kin(1, rows, [dist_rows, rows](const auto& jet) {
    using T = scalar_of<decltype(jet.front())>;
    if (rows == 0) return VecT<T>(0);
    MatT<T> D = dist_rows(jet[0]);
    return VecT<T>(D * jet[1]);
  });
  VariationalConstraintSet var(0, rows, n, [dist_rows, rows, n](const auto& jet) {
    using T = scalar_of<decltype(jet.front())>;
    if (rows == 0) return MatT<T>(0, n);
    return MatT<T>(dist_rows(jet[0]));
  });
  return NonholonomicSystem(L, std::move(kin), std::move(var), std::move(chart),
                            "D'Alembert system");
}

namespace detail {

// Jacobian of the kinematic residual w.r.t. jet slot `slot`, at scalar T.
template <class T>
MatT<T> residual_slot_jacobian(const KinematicConstraintSet& kin, const Derivs<T>& jet, int slot) {
  Derivs<Dual<T>> base = constant(jet);
  const auto& x = jet[static_cast<size_t>(slot)];
  MatT<T> J(kin.rows(), x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    base[static_cast<size_t>(slot)] = seed_unit(x, k);
    VecT<Dual<T>> r = kin.template residual<Dual<T>>(base);
    for (Eigen::Index i = 0; i < r.size(); ++i) J(i, k) = r(i).d;
  }
  return J;
}

inline VariationalConstraintSet chetaev_rows(const KinematicConstraintSet& kin, int dim, int slot) {
  std::vector<std::string> names;
  for (const auto& n : kin.row_names()) names.push_back("d" + n);
  return VariationalConstraintSet(
      slot, kin.rows(), dim,
      [kin, slot](const auto& jet) {
        using T = scalar_of<decltype(jet.front())>;
        return residual_slot_jacobian<T>(kin, jet, slot);
      },
      std::move(names));
}

}  // namespace detail

/// Chetaev: R_V(q, q') = dR_K/dq' for a first-order kinematic set.
inline NonholonomicSystem make_chetaev(const LagrangianSpec& L, const KinematicConstraintSet& ck,
                                       Chart chart = {}) {
  if (ck.order() != 1) throw ConfigurationError("make_chetaev needs a first-order kinematic set");
  return NonholonomicSystem(L, ck, detail::chetaev_rows(ck, L.dim(), 1), std::move(chart),
                            "Chetaev system");
}

/// Second-order Chetaev rule: R_V(q, q', q'') = dR_K/dq''.
inline NonholonomicSystem make_chetaev_second_order(const LagrangianSpec& L,
                                                    const KinematicConstraintSet& ck,
                                                    Chart chart = {}) {
  if (ck.order() != 2)
    throw ConfigurationError("make_chetaev_second_order needs a second-order kinematic set");
  return NonholonomicSystem(L, ck, detail::chetaev_rows(ck, L.dim(), 2), std::move(chart),
                            "second-order Chetaev system");
}

struct ResidualReport {
  Vec kin;
  int var_rank = 0;
};

/// R_K at the jet and the numerical rank of R_V there.
inline ResidualReport evaluate_residuals(const NonholonomicSystem& sys, const JetPoint& jet) {
  const int need = std::max(sys.kinematic().order(), sys.variational().order());
  if (jet.order() < need)
    throw UsageError("jet of order " + std::to_string(jet.order()) + " but the system needs order " +
                     std::to_string(need));
  if (jet.dim() != sys.dim()) throw UsageError("jet dimension does not match the system");
  return {sys.kinematic()(jet), numerical_rank(sys.variational()(jet))};
}

}  // namespace hocon
