#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "hocon/integrator.hpp"
#include "hocon/models.hpp"
#include "hocon/reduction.hpp"

using namespace hocon;
using Eigen::Matrix3d;
using Eigen::Vector3d;

namespace {

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

Matrix3d rot(const Vector3d& w) {
  const double th = w.norm();
  if (th == 0.0) return Matrix3d::Identity();
  return Eigen::AngleAxisd(th, w / th).toRotationMatrix();
}

Vector3d vee(const Matrix3d& W) { return {W(2, 1), W(0, 2), W(1, 0)}; }

LagrangianFunction rigid_body(const Vector3d& inertia) {
  return LagrangianFunction([inertia](const auto&, const auto& u) {
    using T = scalar_of<decltype(u)>;
    return T(0.5 * inertia(0)) * u(0) * u(0) + T(0.5 * inertia(1)) * u(1) * u(1) +
           T(0.5 * inertia(2)) * u(2) * u(2);
  });
}

ReducedSystem free_body(Orientation o, const Vector3d& inertia) {
  return ReducedSystem(LieGroupSpec::so3(o), rigid_body(inertia), KinematicConstraintSet::none(),
                       VariationalConstraintSet::none(3), 0);
}

State ball(double w1, double w2) {
  Vec u(5);
  u << w1, w2, 0.0, w2, -w1;
  return {Vec(0), u};
}

// Variation of the action S = int l(v) dt along g_eps(t), computed from the
// group curve alone: left reduction v = g^-1 g', right reduction w = g' g^-1.
struct ActionOracle {
  Orientation o;
  Vector3d inertia;

  static Vector3d a_of(double t) { return {0.3 + t, 0.5 * t * t, -0.2 + 0.7 * std::sin(t)}; }
  static Vector3d eta_of(double t) {
    const double s = std::sin(std::numbers::pi * t);
    return s * s * Vector3d(0.7, -0.4, 1.1);
  }
  Matrix3d g(double t, double eps) const {
    const Matrix3d base = rot(a_of(t));
    const Matrix3d var = rot(eps * eta_of(t));
    return o == Orientation::Left ? Matrix3d(base * var) : Matrix3d(var * base);
  }
  Vector3d v(double t, double eps) const {
    const double h = 1e-5;
    const Matrix3d gd = (g(t + h, eps) - g(t - h, eps)) / (2 * h);
    const Matrix3d G = g(t, eps);
    return o == Orientation::Left ? vee(G.transpose() * gd) : vee(gd * G.transpose());
  }
  double l(const Vector3d& w) const { return 0.5 * w.dot(inertia.cwiseProduct(w)); }

  template <class F>
  static double simpson(F&& f) {
    const int n = 200;
    const double h = 1.0 / n;
    double s = f(0.0) + f(1.0);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(i * h);
    return s * h / 3.0;
  }

  double dS() const {
    const double e = 1e-4;
    auto S = [&](double eps) { return simpson([&](double t) { return l(v(t, eps)); }); };
    return (S(e) - S(-e)) / (2 * e);
  }

  // -int <EL(v, v'), eta> dt with EL from the reduced system.
  double predicted(const ReducedSystem& sys) const {
    return -simpson([&](double t) {
      const double h = 1e-4;
      Vector3d w = v(t, 0.0);
      Vector3d wd = (v(t + h, 0.0) - v(t - h, 0.0)) / (2 * h);
      return reduced_euler_lagrange(sys, Vec(w), Vec(wd)).dot(Vec(eta_of(t)));
    });
  }
};

}  // namespace

TEST(LieGroupSpec, So3BracketAndSign) {
  auto left = LieGroupSpec::so3(Orientation::Left);
  auto right = LieGroupSpec::so3(Orientation::Right);
  Vec e1 = Vec::Unit(3, 0), e2 = Vec::Unit(3, 1);
  EXPECT_EQ(left.bracket(e1, e2), Vec::Unit(3, 2));
  EXPECT_EQ(left.bracket_sign(), 1.0);
  EXPECT_EQ(right.bracket_sign(), -1.0);
  EXPECT_LT(left.jacobi_residual(), 1e-12);
  Vec v = vec({0.3, -1.0, 2.0}), mu = vec({1.5, 0.2, -0.7});
  EXPECT_LT((left.adstar(v, mu) + right.adstar(v, mu)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(LieGroupSpec, AbelianAndDirectSum) {
  auto r2 = LieGroupSpec::abelian(2, Orientation::Right);
  for (double c : r2.structure()) EXPECT_EQ(c, 0.0);
  auto g = LieGroupSpec::direct_sum(LieGroupSpec::so3(Orientation::Right), r2);
  EXPECT_EQ(g.dim(), 5);
  EXPECT_EQ(g.factors().size(), 2u);
  EXPECT_EQ(g.c(2, 0, 1), 1.0);
  EXPECT_EQ(g.c(3, 0, 4), 0.0);
  EXPECT_LT(g.jacobi_residual(), 1e-12);
  EXPECT_THROW(LieGroupSpec::direct_sum(LieGroupSpec::so3(Orientation::Left), r2), ConfigurationError);
}

TEST(LieGroupSpec, RejectsInvalidStructureConstants) {
  std::vector<double> c(8, 0.0);
  c[(0 * 2 + 0) * 2 + 1] = 1.0;  // [e0, e1] = e0 without antisymmetric partner
  EXPECT_THROW(LieGroupSpec(2, c, Orientation::Left), ConfigurationError);
  EXPECT_THROW(LieGroupSpec(2, std::vector<double>(7, 0.0), Orientation::Left), ConfigurationError);
  // Antisymmetric but not Jacobi: [e0,e1] = e2, [e1,e2] = e2, others zero.
  std::vector<double> d(27, 0.0);
  auto set = [&](int i, int j, int k) {
    d[static_cast<size_t>((k * 3 + i) * 3 + j)] = 1.0;
    d[static_cast<size_t>((k * 3 + j) * 3 + i)] = -1.0;
  };
  set(0, 1, 2);
  set(1, 2, 2);
  set(0, 2, 0);
  EXPECT_THROW(LieGroupSpec(3, d, Orientation::Left), ConfigurationError);
}

TEST(ReducedEulerLagrange, IsotropicBodyAboutAnAxis) {
  auto sys = free_body(Orientation::Left, {2, 2, 2});
  EXPECT_LT(reduced_euler_lagrange(sys, Vec::Unit(3, 2), Vec::Zero(3)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ReducedEulerLagrange, ElasticBallAtConstantOmega) {
  auto sys = elastic_ball({0.4, 1.0}, BallFormulation::Omega3Zero);
  Vec u = vec({0.3, -1.2, 0.8, -1.2, -0.3});
  EXPECT_LT(reduced_euler_lagrange(sys, u, Vec::Zero(5)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ReducedEulerLagrange, AbelianFactorIsPlainEulerLagrange) {
  ReducedSystem sys(LieGroupSpec::abelian(2), LagrangianFunction([](const auto&, const auto& u) {
                      using T = scalar_of<decltype(u)>;
                      return T(1.5) * u.squaredNorm();
                    }),
                    KinematicConstraintSet::none(), VariationalConstraintSet::none(2), 0);
  Vec el = reduced_euler_lagrange(sys, vec({1, 2}), vec({0.5, -1}));
  EXPECT_NEAR(el(0), 1.5, 1e-14);
  EXPECT_NEAR(el(1), -3.0, 1e-14);
}

TEST(ReducedEulerLagrange, AnisotropicBodyMatchesActionVariation) {
  const Vector3d inertia(1.0, 2.0, 3.5);
  for (Orientation o : {Orientation::Left, Orientation::Right}) {
    ActionOracle oracle{o, inertia};
    auto sys = free_body(o, inertia);
    const double ds = oracle.dS();
    EXPECT_NEAR(oracle.predicted(sys), ds, 1e-6 * std::max(1.0, std::abs(ds)))
        << (o == Orientation::Left ? "left" : "right");
    // The other orientation's equation does not fit this oracle.
    auto other = free_body(o == Orientation::Left ? Orientation::Right : Orientation::Left, inertia);
    EXPECT_GT(std::abs(oracle.predicted(other) - ds), 1e-3);
  }
}

TEST(ReducedEulerLagrange, LeftAnisotropicIsEulersEquation) {
  const Vector3d I(1.0, 2.0, 3.5);
  auto sys = free_body(Orientation::Left, I);
  Vector3d w(0.3, -0.9, 1.4), wd(0.2, 0.5, -0.1);
  Vec el = reduced_euler_lagrange(sys, Vec(w), Vec(wd));
  Vector3d expected = I.cwiseProduct(wd) - I.cwiseProduct(w).cross(w);
  EXPECT_LT((el - Vec(expected)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(SolveReduced, ElasticBallFormulations) {
  for (auto f : {BallFormulation::Omega3Zero, BallFormulation::CurvatureSecondOrder}) {
    auto sys = elastic_ball({}, f);
    SolveResult r = solve_reduced(sys, ball(0, 1));
    EXPECT_LT(r.qdd.cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT(r.residual, 1e-12);
  }
  // Random admissible data: both formulations give the same accelerations.
  auto a = elastic_ball({}, BallFormulation::Omega3Zero);
  auto b = elastic_ball({}, BallFormulation::CurvatureSecondOrder);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> U(-2, 2);
  for (int i = 0; i < 20; ++i) {
    State s = ball(U(rng), U(rng));
    EXPECT_LT((solve_reduced(a, s).qdd - solve_reduced(b, s).qdd).norm(), 1e-9);
  }
}

TEST(SolveReduced, InconsistentStateIsRejected) {
  auto sys = elastic_ball({}, BallFormulation::Omega3Zero);
  State s = ball(0, 1);
  s.qd(2) = 0.5;
  EXPECT_THROW(assemble_reduced(sys, s), InconsistentStateError);
  EXPECT_THROW(solve_reduced(sys, {Vec(1), s.qd}), UsageError);
}

TEST(SolveReduced, ZeroFieldPlaneIsTheRigidBall) {
  auto plane = moving_plane_ball({0.4, 1.0}, PlaneField{});
  auto rigid = rigid_ball_dalembert({0.4, 1.0});
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> U(-2, 2);
  for (int i = 0; i < 10; ++i) {
    const double w1 = U(rng), w2 = U(rng);
    Vec up(5);
    up << w1, w2, 0.0, w2, -w1;
    SolveResult rp = solve_reduced(plane, {vec({U(rng), U(rng)}), up});
    SolveResult rr = solve_reduced(rigid, ball(w1, w2));
    EXPECT_LT((rp.qdd - rr.qdd).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(MovingPlaneRhs, ConstantAndShearFields) {
  auto zero_jac = [](const Eigen::Vector2d&) { return Eigen::Matrix2d::Zero().eval(); };
  auto c = [](const Eigen::Vector2d&) { return Eigen::Vector2d(0.5, -1.0); };
  auto r = moving_plane_rhs(1.0, 2.0, c, zero_jac, {0.3, 0.7, 0.1}, {1.0, 2.0});
  EXPECT_EQ(r.omega_dot, Vector3d::Zero());
  EXPECT_LT((r.a_dot - Eigen::Vector2d(0.7 + 0.5, -0.3 - 1.0)).norm(), 1e-15);
  // Shear v = (gamma a2, 0): (I+M)(w2', -w1') = -M gamma (a2', 0).
  const double I = 1.0, M = 2.0, g = 0.5;
  Vector3d w(0.3, 0.7, 0.1);
  Eigen::Vector2d a(1.0, 2.0);
  auto sh = moving_plane_rhs(
      I, M, [g](const Eigen::Vector2d& x) { return Eigen::Vector2d(g * x(1), 0.0); },
      [g](const Eigen::Vector2d&) {
        Eigen::Matrix2d J;
        J << 0, g, 0, 0;
        return J;
      },
      w, a);
  const double a2dot = -w(0);
  EXPECT_NEAR(sh.omega_dot(1), -M * g * a2dot / (I + M), 1e-15);
  EXPECT_NEAR(sh.omega_dot(0), 0.0, 1e-15);
  EXPECT_NEAR(sh.omega_dot(2), 0.0, 1e-15);
}

TEST(Exp, RodriguesAgainstAngleAxis) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> U(-3, 3);
  for (int i = 0; i < 50; ++i) {
    Vector3d w(U(rng), U(rng), U(rng));
    EXPECT_LT((so3_exp(w) - rot(w)).cwiseAbs().maxCoeff(), 1e-14);
  }
  Vector3d tiny(1e-10, -2e-10, 3e-11);
  EXPECT_LT((so3_exp(tiny) - (Matrix3d::Identity() + hat(tiny))).cwiseAbs().maxCoeff(), 1e-19);
  EXPECT_EQ(hat(Vector3d(1, 2, 3)) * Vector3d(4, 5, 6), Vector3d(1, 2, 3).cross(Vector3d(4, 5, 6)));
}

TEST(Exp, OrthonormalizeRestoresRotation) {
  Matrix3d A = rot(Vector3d(0.3, -0.2, 1.0));
  Matrix3d P = A + 1e-6 * Matrix3d::Random();
  Matrix3d R = orthonormalize(P);
  EXPECT_LT((R.transpose() * R - Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_NEAR(R.determinant(), 1.0, 1e-14);
  EXPECT_LT((R - A).cwiseAbs().maxCoeff(), 1e-5);
}

TEST(Reconstruct, ZeroVelocityKeepsTheElement) {
  auto g = LieGroupSpec::direct_sum(LieGroupSpec::so3(Orientation::Right),
                                    LieGroupSpec::abelian(2, Orientation::Right));
  GroupElement g0 = identity_element(g);
  g0.rotations[0] = rot(Vector3d(0.1, 0.2, 0.3));
  g0.translations[0] = vec({1.0, -1.0});
  auto path = reconstruct(g, g0, std::vector<Vec>(11, Vec::Zero(5)), 0.1);
  ASSERT_EQ(path.size(), 11u);
  EXPECT_LT((path.back().rotations[0] - g0.rotations[0]).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_EQ(path.back().translations[0], g0.translations[0]);
}

TEST(Reconstruct, ConstantAxisRotation) {
  const double c = 1.3;
  for (Orientation o : {Orientation::Left, Orientation::Right}) {
    auto g = LieGroupSpec::so3(o);
    auto path = reconstruct(g, identity_element(g), std::vector<Vec>(1001, vec({0, 0, c})), 1e-3);
    Matrix3d expected = Eigen::AngleAxisd(c, Vector3d::UnitZ()).toRotationMatrix();
    EXPECT_LT((path.back().rotations[0] - expected).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Reconstruct, BallContactPathIsStraightAtSpeedOmega) {
  auto sys = elastic_ball({}, BallFormulation::Omega3Zero);
  const double w1 = 0.6, w2 = -0.8;
  Trajectory tr = integrate(sys, ball(w1, w2), 0.0, 2.0);
  std::vector<Vec> us;
  for (const auto& s : tr.states) us.push_back(s.qd);
  auto path = reconstruct(sys.group(), identity_element(sys.group()), us, 1e-3);
  const Vec& end = path.back().translations[0];
  EXPECT_NEAR(end.norm() / 2.0, std::hypot(w1, w2), 1e-12);
  for (const auto& e : path) {
    const Vec& a = e.translations[0];
    EXPECT_LT(std::abs(a(0) * (-w1) - a(1) * w2), 1e-12);  // collinear with V = (w2, -w1)
    EXPECT_LT((e.rotations[0].transpose() * e.rotations[0] - Matrix3d::Identity()).cwiseAbs().maxCoeff(),
              1e-10);
  }
}

TEST(Equivalence, BallAndZeroFieldPlaneAgree) {
  // Same dynamics in two reduced charts: the elastic ball with reconstructed
  // contact point, and the plane ball whose contact point is a shape variable.
  auto ballsys = rigid_ball_dalembert({});
  auto plane = moving_plane_ball({}, PlaneField{});
  const double w1 = 0.9, w2 = 0.4;
  Trajectory tb = integrate(ballsys, ball(w1, w2), 0.0, 10.0);
  Vec up(5);
  up << w1, w2, 0.0, w2, -w1;
  Trajectory tp = integrate(plane, {vec({0, 0}), up}, 0.0, 10.0);
  std::vector<Vec> us;
  for (const auto& s : tb.states) us.push_back(s.qd);
  auto path = reconstruct(ballsys.group(), identity_element(ballsys.group()), us, 1e-3);
  ASSERT_EQ(tb.size(), tp.size());
  double gap = 0.0;
  for (size_t k = 0; k < tb.size(); ++k) {
    gap = std::max(gap, (tb.states[k].qd.head(3) - tp.states[k].qd.head(3)).cwiseAbs().maxCoeff());
    gap = std::max(gap, (tb.states[k].qd.tail(2) - tp.states[k].qd.tail(2)).cwiseAbs().maxCoeff());
    gap = std::max(gap, (path[k].translations[0] - tp.states[k].q).cwiseAbs().maxCoeff());
  }
  EXPECT_LT(gap, 1e-8);
}

TEST(Equivalence, IsotropicBallLeftAndRightAgree) {
  auto right = elastic_ball({0.4, 1.0}, BallFormulation::Omega3Zero);
  auto group = LieGroupSpec::direct_sum(LieGroupSpec::so3(Orientation::Left),
                                        LieGroupSpec::abelian(2, Orientation::Left));
  ReducedSystem left(group, right.lagrangian(), right.kinematic(), right.variational(), 0, right.chart());
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> U(-2, 2);
  for (int i = 0; i < 3; ++i) {
    State s = ball(U(rng), U(rng));
    Trajectory a = integrate(right, s, 0.0, 2.0);
    Trajectory b = integrate(left, s, 0.0, 2.0);
    for (size_t k = 0; k < a.size(); ++k)
      EXPECT_LT((a.states[k].qd - b.states[k].qd).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Equivalence, CurvatureIdentityAlongSecondOrderRuns) {
  auto sys = elastic_ball({}, BallFormulation::CurvatureSecondOrder);
  Trajectory tr = integrate(sys, ball(1.1, -0.4), 0.0, 5.0);
  for (size_t k = 0; k < tr.size(); ++k) {
    const Vec& w = tr.states[k].qd;
    const Vec& wd = tr.qdds[k];
    EXPECT_LT(std::abs(w(0) * wd(1) - w(1) * wd(0) - w(2) * (w(0) * w(0) + w(1) * w(1))), 1e-9);
  }
}
