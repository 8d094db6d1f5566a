#pragma once

// Built-in systems: the elastic and rigid rolling balls (reduced on
// so(3) + R^2), the Rocard and Greidanus tire models, and the ball on a moving
// plane. Default parameters are desk-scale values, not measured data.

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "hocon/integrator.hpp"
#include "hocon/reduction.hpp"

namespace hocon {

struct BallParams {
  double I = 1.0;  // kg m^2, unit radius
  double M = 1.0;  // kg

  void validate() const {
    if (!(I > 0.0) || !(M > 0.0)) throw ConfigurationError("ball needs I > 0 and M > 0");
  }
};

struct RocardParams {
  double I = 1.0, J = 1.0, M = 1.0, K = 1.0, a_coef = 1.0;
  double eps_max = 0.3;     // rad, small-angle guard
  double psi_dot_min = 1e-9;  // rad/s, sign guard

  void validate() const {
    if (!(I > 0 && J > 0 && M > 0 && K > 0 && a_coef > 0))
      throw ConfigurationError("Rocard parameters I, J, M, K, a_coef must be positive");
  }
};

struct GreidanusParams {
  double I = 1.0, J = 1.0, M = 1.0, alpha = 1.0, beta = 1.0;

  void validate() const {
    if (!(I > 0 && J > 0 && M > 0)) throw ConfigurationError("Greidanus I, J, M must be positive");
    if (!(alpha > 0 && beta > 0)) throw ConfigurationError("Greidanus needs alpha > 0 and beta > 0");
  }
};

enum class BallFormulation { Omega3Zero, CurvatureSecondOrder };

namespace detail {

// Reduced variations (eta, w) of the ball with w = (eta2, -eta1).
inline auto ball_variational_rows(bool with_alpha3) {
  return [with_alpha3](const auto& jet) {
    using T = scalar_of<decltype(jet.front())>;
    MatT<T> m = MatT<T>::Constant(with_alpha3 ? 3 : 2, 5, T(0.0));
    m(0, 1) = T(-1.0);
    m(0, 3) = T(1.0);
    m(1, 0) = T(1.0);
    m(1, 4) = T(1.0);
    if (with_alpha3) m(2, 2) = T(1.0);
    return m;
  };
}

inline LagrangianFunction ball_lagrangian(const BallParams& p) {
  return LagrangianFunction([p](const auto& /*x*/, const auto& u) {
    using T = scalar_of<decltype(u)>;
    T w = u(0) * u(0) + u(1) * u(1) + u(2) * u(2);
    T v = u(3) * u(3) + u(4) * u(4);
    return T(0.5 * p.I) * w + T(0.5 * p.M) * v;
  });
}

inline Chart ball_chart() {
  return {{"omega1", "omega2", "omega3", "V1", "V2"}, {"rad/s", "rad/s", "rad/s", "m/s", "m/s"}};
}

}  // namespace detail

/// Elastic rolling ball, right-reduced on so(3) + R^2 with u = (omega, V).
/// The kinematic rows forbid slip and vertical spin; the variations only
/// satisfy w = (eta2, -eta1), so eta3 is free.
inline ReducedSystem elastic_ball(const BallParams& p,
                                  BallFormulation f = BallFormulation::Omega3Zero) {
  p.validate();
  auto group = LieGroupSpec::direct_sum(LieGroupSpec::so3(Orientation::Right),
                                        LieGroupSpec::abelian(2, Orientation::Right));
  KinematicConstraintSet kin;
  if (f == BallFormulation::Omega3Zero) {
    kin = KinematicConstraintSet(
        1, 3,
        [](const auto& jet) {
          using T = scalar_of<decltype(jet.front())>;
          const auto& u = jet[1];
          VecT<T> r(3);
          r << u(3) - u(1), u(4) + u(0), u(2);
          return r;
        },
        {{1, 1, 1}, {"no_slip_1", "no_slip_2", "no_spin"}, true});
  } else {
    kin = KinematicConstraintSet(
        2, 3,
        [](const auto& jet) {
          using T = scalar_of<decltype(jet.front())>;
          const auto& u = jet[1];
          const auto& ud = jet[2];
          VecT<T> r(3);
          r << u(3) - u(1), u(4) + u(0),
              u(0) * ud(1) - u(1) * ud(0) - u(2) * (u(0) * u(0) + u(1) * u(1));
          return r;
        },
        {{1, 1, 2}, {"no_slip_1", "no_slip_2", "curvature"}, true});
  }
  VariationalConstraintSet var(0, 2, 5, detail::ball_variational_rows(false),
                               {"w1_eq_eta2", "w2_eq_minus_eta1"});
  return ReducedSystem(std::move(group), detail::ball_lagrangian(p), std::move(kin),
                       std::move(var), 0, detail::ball_chart(),
                       f == BallFormulation::Omega3Zero ? "elastic ball, omega3 = 0"
                                                        : "elastic ball, second-order curvature row");
}

/// Rigid rolling ball under D'Alembert's principle: the variations also
/// satisfy eta3 = 0 and the kinematic rows are the same distribution.
inline ReducedSystem rigid_ball_dalembert(const BallParams& p) {
  p.validate();
  auto group = LieGroupSpec::direct_sum(LieGroupSpec::so3(Orientation::Right),
                                        LieGroupSpec::abelian(2, Orientation::Right));
  auto rows = detail::ball_variational_rows(true);
  KinematicConstraintSet kin(
      1, 3,
      [rows](const auto& jet) {
        using T = scalar_of<decltype(jet.front())>;
        MatT<T> D = rows(jet);
        return VecT<T>(D * jet[1]);
      },
      {{1, 1, 1}, {"no_slip_1", "no_slip_2", "no_spin"}, true});
  VariationalConstraintSet var(0, 3, 5, rows, {"w1_eq_eta2", "w2_eq_minus_eta1", "eta3"});
  return ReducedSystem(std::move(group), detail::ball_lagrangian(p), std::move(kin),
                       std::move(var), 0, detail::ball_chart(), "rigid ball, D'Alembert");
}

// ---------------------------------------------------------------------------
// Tires
// ---------------------------------------------------------------------------

/// Rocard tire in the chart (psi, theta, eps, x1, x2).
inline NonholonomicSystem rocard_tire(const RocardParams& p) {
  p.validate();
  LagrangianSpec L(
      5,
      [p](const auto& q, const auto& qd) {
        using T = scalar_of<decltype(q)>;
        return T(0.5 * p.I) * qd(0) * qd(0) + T(0.5 * p.J) * qd(1) * qd(1) +
               T(0.5 * p.M) * (qd(3) * qd(3) + qd(4) * qd(4)) - T(0.5 * p.K) * q(2) * q(2);
      },
      {{"I", p.I}, {"J", p.J}, {"M", p.M}, {"K", p.K}, {"a_coef", p.a_coef}});
  L = L.with_analytic_gradients(
      [p](const Vec& q, const Vec&) {
        Vec g = Vec::Zero(5);
        g(2) = -p.K * q(2);
        return g;
      },
      [p](const Vec&, const Vec& qd) {
        Vec g(5);
        g << p.I * qd(0), p.J * qd(1), 0.0, p.M * qd(3), p.M * qd(4);
        return g;
      });
  const double am = p.a_coef / p.M;
  KinematicConstraintSet kin(
      2, 3,
      [am](const auto& jet) {
        using T = scalar_of<decltype(jet.front())>;
        const auto& q = jet[0];
        const auto& qd = jet[1];
        const auto& qdd = jet[2];
        T te = tan(q(2));
        VecT<T> r(3);
        r << qd(3) - qd(0) * cos(q(1) - q(2)), qd(4) - qd(0) * sin(q(1) - q(2)),
            -qdd(0) * te + qd(0) * (qd(1) - qd(2)) - T(sign(qd(0)) * am) * te;
        return r;
      },
      {{1, 1, 2}, {"roll_x1", "roll_x2", "lateral_force"}, true});
  VariationalConstraintSet var(
      0, 3, 5,
      [](const auto& jet) {
        using T = scalar_of<decltype(jet.front())>;
        const auto& q = jet[0];
        MatT<T> m = MatT<T>::Constant(3, 5, T(0.0));
        m(0, 0) = cos(q(1));
        m(0, 3) = T(-1.0);
        m(1, 0) = sin(q(1));
        m(1, 4) = T(-1.0);
        m(2, 1) = T(1.0);
        m(2, 2) = T(-1.0);
        return m;
      },
      {"d_roll_x1", "d_roll_x2", "d_heading"});
  ModelHooks hooks;
  hooks.domain_guard = [p](const Vec& q, const Vec& qd) {
    if (!(std::abs(q(2)) <= p.eps_max))
      throw ModelDomainError("small_angle_guard", "|eps| = " + detail::fmt(std::abs(q(2))) + " exceeds " +
                                                detail::fmt(p.eps_max));
    if (!(std::abs(qd(0)) >= p.psi_dot_min))
      throw ModelDomainError("sign_guard", "|psi_dot| = " + detail::fmt(std::abs(qd(0))) +
                                                 " below " + detail::fmt(p.psi_dot_min) +
                                                 "; sign(psi_dot) undefined");
  };
  hooks.dissipation_rate = [p](const Vec& q, const Vec& qd) {
    return -(p.M * qd(0) * qd(0) + p.K) * q(2) * (qd(1) - qd(2));
  };
  hooks.theory_monitor = [](const Vec& q, const Vec& qd) { return q(2) * (qd(1) - qd(2)); };
  return NonholonomicSystem(std::move(L), std::move(kin), std::move(var),
                            {{"psi", "theta", "eps", "x1", "x2"}, {"rad", "rad", "rad", "m", "m"}},
                            "Rocard tire", std::move(hooks));
}

/// Greidanus tire in the chart (psi, theta, eps, y1, y2, xi).
inline NonholonomicSystem greidanus_tire(const GreidanusParams& p) {
  p.validate();
  LagrangianSpec L(
      6,
      [p](const auto& q, const auto& qd) {
        using T = scalar_of<decltype(q)>;
        return T(0.5 * p.I) * qd(0) * qd(0) + T(0.5 * p.J) * qd(1) * qd(1) +
               T(0.5 * p.M) * (qd(3) * qd(3) + qd(4) * qd(4)) - T(0.5 * p.alpha) * q(5) * q(5) -
               T(0.5 * p.beta) * q(2) * q(2);
      },
      {{"I", p.I}, {"J", p.J}, {"M", p.M}, {"alpha", p.alpha}, {"beta", p.beta}});
  KinematicConstraintSet kin(
      1, 3,
      [p](const auto& jet) {
        using T = scalar_of<decltype(jet.front())>;
        const auto& q = jet[0];
        const auto& qd = jet[1];
        VecT<T> r(3);
        r << qd(3) - qd(0) * cos(q(1) - q(2)) - qd(5) * sin(q(1)) - q(5) * cos(q(1)) * qd(1),
            qd(4) - qd(0) * sin(q(1) - q(2)) + qd(5) * cos(q(1)) - q(5) * sin(q(1)) * qd(1),
            qd(1) - qd(2) - qd(0) * (T(p.alpha) * q(5) + T(p.beta) * q(2));
        return r;
      },
      {{1, 1, 1}, {"roll_y1", "roll_y2", "deformation_rate"}, true});
  VariationalConstraintSet var(
      0, 3, 6,
      [](const auto& jet) {
        using T = scalar_of<decltype(jet.front())>;
        const auto& q = jet[0];
        const T c = cos(q(1)), s = sin(q(1));
        MatT<T> m = MatT<T>::Constant(3, 6, T(0.0));
        m(0, 0) = -c;
        m(0, 1) = -q(5) * c;
        m(0, 3) = T(1.0);
        m(0, 5) = -s;
        m(1, 0) = -s;
        m(1, 1) = -q(5) * s;
        m(1, 4) = T(1.0);
        m(1, 5) = c;
        m(2, 1) = T(1.0);
        m(2, 2) = T(-1.0);
        return m;
      },
      {"d_roll_y1", "d_roll_y2", "d_heading"});
  return NonholonomicSystem(std::move(L), std::move(kin), std::move(var),
                            {{"psi", "theta", "eps", "y1", "y2", "xi"},
                             {"rad", "rad", "rad", "m", "m", "m"}},
                            "Greidanus tire");
}

// ---------------------------------------------------------------------------
// Ball on a moving plane
// ---------------------------------------------------------------------------

/// Plane velocity fields usable at every AD level, with closed-form
/// Jacobians for oracles.
struct PlaneField {
  enum Kind { Zero, Constant, Shear } kind = Zero;
  double c1 = 0.0, c2 = 0.0;  // Constant: v = (c1, c2)
  double gamma = 0.0;         // Shear: v = (gamma a2, 0)

  template <class T>
  VecT<T> operator()(const VecT<T>& a) const {
    VecT<T> v(2);
    switch (kind) {
      case Zero: v << T(0.0), T(0.0); break;
      case Constant: v << T(c1), T(c2); break;
      case Shear: v << T(gamma) * a(1), T(0.0); break;
    }
    return v;
  }
  Eigen::Vector2d value(const Eigen::Vector2d& a) const { return (*this)(Vec(a)); }
  Eigen::Matrix2d jacobian(const Eigen::Vector2d&) const {
    Eigen::Matrix2d J = Eigen::Matrix2d::Zero();
    if (kind == Shear) J(0, 1) = gamma;
    return J;
  }
};

/// Ball rolling on a plane that moves with velocity field v(a), reduced on
/// so(3) with the contact point a as shape: u = (omega, a').
template <class Field>
ReducedSystem moving_plane_ball(const BallParams& p, const Field& field) {
  p.validate();
  KinematicConstraintSet kin(
      1, 2,
      [field](const auto& jet) {
        using T = scalar_of<decltype(jet.front())>;
        const auto& a = jet[0];
        const auto& u = jet[1];
        VecT<T> v = field(VecT<T>(a));
        VecT<T> r(2);
        r << u(3) - v(0) - u(1), u(4) - v(1) + u(0);
        return r;
      },
      {{1, 1}, {"no_slip_1", "no_slip_2"}, true});
  VariationalConstraintSet var(0, 2, 5, detail::ball_variational_rows(false),
                               {"da1_eq_eta2", "da2_eq_minus_eta1"});
  return ReducedSystem(LieGroupSpec::so3(Orientation::Right), detail::ball_lagrangian(p),
                       std::move(kin), std::move(var), 2,
                       {{"a1", "a2", "omega1", "omega2", "omega3", "a1_dot", "a2_dot"},
                        {"m", "m", "rad/s", "rad/s", "rad/s", "m/s", "m/s"}},
                       "ball on a moving plane");
}

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

using AnySystem = std::variant<NonholonomicSystem, ReducedSystem>;

struct ModelInfo {
  std::string id;
  std::string summary;
  std::map<std::string, double> defaults;  // parameter defaults
  std::vector<std::string> variants;       // first entry is the default
  std::vector<std::string> state_names;    // positions then velocities
  int npos = 0;
  std::vector<std::string> required;       // initial fields without defaults
  std::vector<std::string> derived;        // velocities completed from constraints
};

inline const std::vector<ModelInfo>& model_registry() {
  static const std::vector<ModelInfo> reg = {
      {"elastic-ball",
       "elastic rolling ball on so(3)+R^2 (variants: omega3-zero, curvature)",
       {{"I", 1.0}, {"M", 1.0}},
       {"omega3-zero", "curvature"},
       {"omega1", "omega2", "omega3", "V1", "V2"},
       0,
       {"omega1", "omega2"},
       {"V1", "V2"}},
      {"rigid-ball",
       "rigid rolling ball under D'Alembert's principle",
       {{"I", 1.0}, {"M", 1.0}},
       {},
       {"omega1", "omega2", "omega3", "V1", "V2"},
       0,
       {"omega1", "omega2"},
       {"V1", "V2"}},
      {"rocard",
       "Rocard tire, chart (psi, theta, eps, x1, x2)",
       {{"I", 1.0}, {"J", 1.0}, {"M", 1.0}, {"K", 1.0}, {"a_coef", 1.0}},
       {},
       {"psi", "theta", "eps", "x1", "x2", "psi_dot", "theta_dot", "eps_dot", "x1_dot", "x2_dot"},
       5,
       {"psi_dot", "theta_dot", "eps"},
       {"eps_dot", "x1_dot", "x2_dot"}},
      {"greidanus",
       "Greidanus tire, chart (psi, theta, eps, y1, y2, xi)",
       {{"I", 1.0}, {"J", 1.0}, {"M", 1.0}, {"alpha", 1.0}, {"beta", 1.0}},
       {},
       {"psi", "theta", "eps", "y1", "y2", "xi", "psi_dot", "theta_dot", "eps_dot", "y1_dot",
        "y2_dot", "xi_dot"},
       6,
       {"psi_dot", "theta_dot", "eps"},
       {"eps_dot", "y1_dot", "y2_dot"}},
      {"moving-plane-ball",
       "ball on a moving plane (variants: zero, constant [c1, c2], shear [gamma])",
       {{"I", 1.0}, {"M", 1.0}, {"c1", 0.0}, {"c2", 0.0}, {"gamma", 0.5}},
       {"shear", "zero", "constant"},
       {"a1", "a2", "omega1", "omega2", "omega3", "a1_dot", "a2_dot"},
       2,
       {"omega1", "omega2"},
       {"a1_dot", "a2_dot"}},
  };
  return reg;
}

inline const ModelInfo& model_info(const std::string& id) {
  for (const auto& m : model_registry())
    if (m.id == id) return m;
  throw ConfigurationError("unknown model '" + id + "'");
}

/// Builds a registered model. Unknown parameter names are rejected.
inline AnySystem build_model(const std::string& id, const std::map<std::string, double>& params,
                             const std::string& variant = {}) {
  const ModelInfo& info = model_info(id);
  std::map<std::string, double> p = info.defaults;
  for (const auto& [k, v] : params) {
    if (!p.count(k)) throw ConfigurationError("model '" + id + "' has no parameter '" + k + "'");
    p[k] = v;
  }
  std::string var = variant.empty() && !info.variants.empty() ? info.variants.front() : variant;
  if (!var.empty() && std::find(info.variants.begin(), info.variants.end(), var) == info.variants.end())
    throw ConfigurationError("model '" + id + "' has no variant '" + var + "'");
  if (id == "elastic-ball")
    return elastic_ball({p["I"], p["M"]}, var == "curvature" ? BallFormulation::CurvatureSecondOrder
                                                             : BallFormulation::Omega3Zero);
  if (id == "rigid-ball") return rigid_ball_dalembert({p["I"], p["M"]});
  if (id == "rocard") {
    RocardParams r;
    r.I = p["I"];
    r.J = p["J"];
    r.M = p["M"];
    r.K = p["K"];
    r.a_coef = p["a_coef"];
    return rocard_tire(r);
  }
  if (id == "greidanus") return greidanus_tire({p["I"], p["J"], p["M"], p["alpha"], p["beta"]});
  PlaneField f;
  f.kind = var == "zero" ? PlaneField::Zero : var == "constant" ? PlaneField::Constant : PlaneField::Shear;
  f.c1 = p["c1"];
  f.c2 = p["c2"];
  f.gamma = p["gamma"];
  return moving_plane_ball({p["I"], p["M"]}, f);
}

}  // namespace hocon
