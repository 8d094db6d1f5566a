#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <random>

#include "hocon/core.hpp"
#include "hocon/finite_difference.hpp"

using namespace hocon;

namespace {

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

LagrangianSpec free_particle(int n, double m = 1.0) {
  return LagrangianSpec(n, [m](const auto&, const auto& qd) {
    using T = scalar_of<decltype(qd)>;
    return T(0.5 * m) * qd.squaredNorm();
  });
}

// Kernel dimension by brute force: count singular values below 1e-10 of R_V^T R_V.
int brute_kernel_dim(const Mat& R) {
  Eigen::SelfAdjointEigenSolver<Mat> es(R.transpose() * R);
  int k = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (std::abs(es.eigenvalues()(i)) < 1e-10) ++k;
  return k;
}

}  // namespace

TEST(JetPoint, OrderAndDimension) {
  JetPoint j(vec({1, 2}), vec({3, 4}), vec({5, 6}));
  EXPECT_EQ(j.order(), 2);
  EXPECT_EQ(j.dim(), 2);
  EXPECT_EQ(j[2](1), 6.0);
  EXPECT_EQ(j.truncated(1).order(), 1);
}

TEST(JetPoint, RejectsMismatchedDimensions) {
  EXPECT_THROW(JetPoint(vec({1, 2}), vec({3})), UsageError);
  EXPECT_THROW(JetPoint(std::vector<Vec>{}), UsageError);
  EXPECT_THROW(JetPoint(std::vector<Vec>{Vec(0)}), UsageError);
}

TEST(LagrangianSpec, EnergyOfHarmonicOscillator) {
  LagrangianSpec L(1, [](const auto& q, const auto& qd) {
    using T = scalar_of<decltype(q)>;
    return T(0.5) * qd(0) * qd(0) - T(0.5) * q(0) * q(0);
  });
  EXPECT_NEAR(L.energy(vec({0.3}), vec({2.0})), 0.5 * 4.0 + 0.5 * 0.09, 1e-15);
  EXPECT_EQ(L.deriv_mode(), DerivMode::Automatic);
}

TEST(LagrangianSpec, AnalyticGradientsAgreeWithAutomaticOnes) {
  LagrangianSpec L(2, [](const auto& q, const auto& qd) {
    using T = scalar_of<decltype(q)>;
    return T(0.5) * (T(1.0) + q(1) * q(1)) * qd(0) * qd(0) + T(0.5) * qd(1) * qd(1) - cos(q(0));
  });
  auto La = L.with_analytic_gradients(
      [](const Vec& q, const Vec& qd) { return vec({std::sin(q(0)), q(1) * qd(0) * qd(0)}); },
      [](const Vec& q, const Vec& qd) { return vec({(1.0 + q(1) * q(1)) * qd(0), qd(1)}); });
  EXPECT_EQ(La.deriv_mode(), DerivMode::Analytic);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-2, 2);
  for (int i = 0; i < 100; ++i) {
    Vec q = vec({U(rng), U(rng)}), qd = vec({U(rng), U(rng)});
    EXPECT_LT(fd::rel_err(La.grad_q(q, qd), La.grad_q_ad(q, qd)), 1e-6);
    EXPECT_LT(fd::rel_err(La.grad_qd(q, qd), La.grad_qd_ad(q, qd)), 1e-6);
  }
}

TEST(LagrangianSpec, VelocityHessianMatchesFiniteDifferences) {
  LagrangianSpec L(3, [](const auto& q, const auto& qd) {
    using T = scalar_of<decltype(q)>;
    return T(0.5) * exp(q(0)) * qd(0) * qd(0) + qd(1) * qd(2) * sin(q(2)) + T(0.25) * qd(2) * qd(2);
  });
  Vec q = vec({0.2, -0.4, 0.9}), qd = vec({0.5, 1.5, -0.3});
  Mat H = L.velocity_hessian(q, qd);
  Mat F = fd::hessian([&](const Vec& v) { return L(q, v); }, qd);
  EXPECT_LT(fd::rel_err(H, F), 1e-6);
  EXPECT_LT((H - H.transpose()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(LagrangianSpec, RejectsBadDimension) {
  EXPECT_THROW(free_particle(0), ConfigurationError);
}

TEST(KinematicSet, ResidualAndMetadata) {
  KinematicConstraintSet k(1, 1, [](const auto& jet) {
    using T = scalar_of<decltype(jet.front())>;
    VecT<T> r(1);
    r << jet[1](0) - jet[0](1);
    return r;
  });
  EXPECT_EQ(k.row_names().front(), "row1");
  EXPECT_EQ(k.row_orders().front(), 1);
  EXPECT_NEAR(k(JetPoint(vec({0, 2}), vec({5, 0})))(0), 3.0, 0.0);
  EXPECT_THROW(k(JetPoint(std::vector<Vec>{vec({0, 2})})), UsageError);
}

TEST(KinematicSet, RejectsInvalidMetadata) {
  auto f = [](const auto& jet) { return jet[0]; };
  EXPECT_THROW(KinematicConstraintSet(3, 1, f), ConfigurationError);
  EXPECT_THROW(KinematicConstraintSet(1, 2, f, {{1}, {}, true}), ConfigurationError);
  EXPECT_THROW(KinematicConstraintSet(1, 1, f, {{2}, {}, true}), ConfigurationError);
}

TEST(KinematicSet, WrongResidualSizeIsAnEvaluationError) {
  KinematicConstraintSet k(1, 2, [](const auto& jet) {
    using T = scalar_of<decltype(jet.front())>;
    return VecT<T>(VecT<T>::Constant(1, T(0.0)));
  });
  EXPECT_THROW(k(JetPoint(vec({0}), vec({0}))), EvaluationError);
}

TEST(KinematicSet, HighestAffineSampling) {
  auto affine = KinematicConstraintSet(2, 1, [](const auto& jet) {
    using T = scalar_of<decltype(jet.front())>;
    VecT<T> r(1);
    r << jet[1](0) * jet[2](0) - jet[2](1) + jet[0](0);
    return r;
  });
  auto nonaffine = KinematicConstraintSet(
      2, 1,
      [](const auto& jet) {
        using T = scalar_of<decltype(jet.front())>;
        VecT<T> r(1);
        r << jet[2](0) * jet[2](0) - jet[2](1);
        return r;
      },
      {{}, {}, false});
  JetPoint j(vec({0.1, 0.2}), vec({0.3, 0.4}), vec({0.5, 0.6}));
  EXPECT_TRUE(affine.check_highest_affine(j));
  EXPECT_FALSE(nonaffine.check_highest_affine(j));
  Mat c = affine.highest_coefficients(j.derivs());
  EXPECT_NEAR(c(0, 0), 0.3, 1e-15);
  EXPECT_NEAR(c(0, 1), -1.0, 1e-15);
}

TEST(VariationalSet, KernelDimension) {
  VariationalConstraintSet v(0, 2, 3, [](const auto& jet) {
    using T = scalar_of<decltype(jet.front())>;
    MatT<T> m(2, 3);
    m << T(1.0), T(0.0), jet[0](0), T(2.0), T(0.0), T(2.0) * jet[0](0);
    return m;
  });
  EXPECT_EQ(v.admissible_dim(JetPoint(std::vector<Vec>{vec({0.7, 0, 0})})), 2);
  EXPECT_EQ(VariationalConstraintSet::none(4).admissible_dim(JetPoint(std::vector<Vec>{Vec::Zero(4)})), 4);
}

TEST(System, DimensionMismatchIsAConfigurationError) {
  EXPECT_THROW(NonholonomicSystem(free_particle(2), KinematicConstraintSet::none(),
                                  VariationalConstraintSet::none(3)),
               ConfigurationError);
}

TEST(DAlembert, KnifeEdgeRowsAndKernel) {
  auto sys = make_dalembert(free_particle(3), 1, [](const auto& q) {
    using T = scalar_of<decltype(q)>;
    MatT<T> D(1, 3);
    D << sin(q(2)), -cos(q(2)), T(0.0);
    return D;
  });
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-3, 3);
  for (int i = 0; i < 10; ++i) {
    Vec q = vec({U(rng), U(rng), U(rng)}), qd = vec({U(rng), U(rng), U(rng)});
    JetPoint j(q, qd);
    EXPECT_NEAR(sys.kinematic()(j)(0), qd(0) * std::sin(q(2)) - qd(1) * std::cos(q(2)), 1e-15);
    Mat R = sys.variational()(j);
    EXPECT_EQ(brute_kernel_dim(R), 2);
    EXPECT_EQ(sys.variational().admissible_dim(j), 2);
    // R_V q' = R_K on every jet.
    EXPECT_NEAR((R * qd)(0), sys.kinematic()(j)(0), 1e-14);
  }
}

TEST(DAlembert, ZeroRowsGiveAnUnconstrainedSystem) {
  auto sys = make_dalembert(free_particle(2), 0, [](const auto& q) {
    using T = scalar_of<decltype(q)>;
    return MatT<T>(0, 2);
  });
  EXPECT_EQ(sys.kinematic().rows(), 0);
  EXPECT_EQ(sys.variational().rows(), 0);
}

TEST(DAlembert, ShapeMismatchIsAConfigurationError) {
  auto bad = [](const auto& q) {
    using T = scalar_of<decltype(q)>;
    return MatT<T>(MatT<T>::Zero(2, 2));
  };
  EXPECT_THROW(make_dalembert(free_particle(3), 1, bad), ConfigurationError);
  EXPECT_THROW(make_dalembert(free_particle(2), 2, bad), ConfigurationError);
}

TEST(Chetaev, LinearRowsReduceToDAlembert) {
  auto D = [](const auto& q) {
    using T = scalar_of<decltype(q)>;
    MatT<T> m(2, 3);
    m << T(1.0), q(0), T(0.0), sin(q(1)), T(0.0), T(-1.0);
    return m;
  };
  auto dal = make_dalembert(free_particle(3), 2, D);
  auto chet = make_chetaev(free_particle(3), dal.kinematic());
  EXPECT_EQ(chet.variational().order(), 1);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> U(-2, 2);
  for (int i = 0; i < 20; ++i) {
    JetPoint j(vec({U(rng), U(rng), U(rng)}), vec({U(rng), U(rng), U(rng)}));
    EXPECT_LT((chet.variational()(j) - dal.variational()(j)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Chetaev, ConstantSpeedRow) {
  const double c = 1.5;
  KinematicConstraintSet k(
      1, 1,
      [c](const auto& jet) {
        using T = scalar_of<decltype(jet.front())>;
        VecT<T> r(1);
        r << jet[1](0) * jet[1](0) + jet[1](1) * jet[1](1) - T(c * c);
        return r;
      },
      {{}, {}, false});
  auto sys = make_chetaev(free_particle(2), k);
  Vec q = vec({0.1, 0.2}), qd = vec({0.9, -1.2});
  Mat R = sys.variational()(JetPoint(q, qd));
  Mat F = fd::jacobian([&](const Vec& v) { return k(JetPoint(q, v)); }, qd);
  EXPECT_LT(fd::rel_err(R, F), 1e-6);
  EXPECT_NEAR(R(0, 0), 2 * qd(0), 1e-15);
  EXPECT_NEAR(R(0, 1), 2 * qd(1), 1e-15);
}

TEST(Chetaev, BallRowsGiveTheConstantVelocityCoefficients) {
  // Chart (omega1, omega2, omega3, a1, a2) with velocity-only rows.
  KinematicConstraintSet k(1, 3, [](const auto& jet) {
    using T = scalar_of<decltype(jet.front())>;
    const auto& v = jet[1];
    VecT<T> r(3);
    r << v(1) - v(3), -v(0) - v(4), v(2);
    return r;
  });
  auto sys = make_chetaev(free_particle(5), k);
  Mat expected(3, 5);
  expected << 0, 1, 0, -1, 0, -1, 0, 0, 0, -1, 0, 0, 1, 0, 0;
  Mat R = sys.variational()(JetPoint(Vec::Random(5), Vec::Random(5)));
  EXPECT_EQ((R - expected).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Chetaev, RequiresFirstOrderRows) {
  KinematicConstraintSet k2(2, 1, [](const auto& jet) { return jet[2].head(1).eval(); });
  EXPECT_THROW(make_chetaev(free_particle(2), k2), ConfigurationError);
  KinematicConstraintSet k1(1, 1, [](const auto& jet) { return jet[1].head(1).eval(); });
  EXPECT_THROW(make_chetaev_second_order(free_particle(2), k1), ConfigurationError);
}

TEST(ChetaevSecondOrder, AffineRowsGiveTheirCoefficients) {
  KinematicConstraintSet k(2, 1, [](const auto& jet) {
    using T = scalar_of<decltype(jet.front())>;
    const auto& q = jet[0];
    const auto& v = jet[1];
    const auto& a = jet[2];
    VecT<T> r(1);
    r << q(0) * v(1) * a(0) + cos(v(0)) * a(1) - q(1);
    return r;
  });
  auto sys = make_chetaev_second_order(free_particle(2), k);
  EXPECT_EQ(sys.variational().order(), 2);
  Vec q = vec({0.4, 1.0}), v = vec({0.3, -2.0}), a = vec({7.0, -1.0});
  Mat R = sys.variational()(JetPoint(q, v, a));
  EXPECT_NEAR(R(0, 0), q(0) * v(1), 1e-15);
  EXPECT_NEAR(R(0, 1), std::cos(v(0)), 1e-15);
}

TEST(ChetaevSecondOrder, QuadraticAccelerationRow) {
  KinematicConstraintSet k(
      2, 1,
      [](const auto& jet) {
        using T = scalar_of<decltype(jet.front())>;
        VecT<T> r(1);
        r << jet[2](0) * jet[2](0) - jet[2](1);
        return r;
      },
      {{}, {}, false});
  auto sys = make_chetaev_second_order(free_particle(2), k);
  Vec q = vec({0, 0}), v = vec({1, 1}), a = vec({0.8, 0.1});
  Mat R = sys.variational()(JetPoint(q, v, a));
  Mat F = fd::jacobian([&](const Vec& x) { return k(JetPoint(q, v, x)); }, a);
  EXPECT_LT(fd::rel_err(R, F), 1e-6);
  EXPECT_NEAR(R(0, 0), 1.6, 1e-15);
  EXPECT_NEAR(R(0, 1), -1.0, 1e-15);
}

TEST(ChetaevSecondOrder, BallCurvatureRow) {
  KinematicConstraintSet k(2, 1, [](const auto& jet) {
    using T = scalar_of<decltype(jet.front())>;
    const auto& w = jet[1];
    const auto& wd = jet[2];
    VecT<T> r(1);
    r << w(0) * wd(1) - w(1) * wd(0) - w(2) * (w(0) * w(0) + w(1) * w(1));
    return r;
  });
  auto sys = make_chetaev_second_order(free_particle(3), k);
  Vec w = vec({0.3, -1.1, 0.2});
  Mat R = sys.variational()(JetPoint(Vec::Zero(3), w, Vec::Random(3)));
  EXPECT_NEAR(R(0, 0), -w(1), 1e-15);
  EXPECT_NEAR(R(0, 1), w(0), 1e-15);
  EXPECT_NEAR(R(0, 2), 0.0, 1e-15);
}

TEST(Homogeneity, EulerIdentityForChetaevRows) {
  // Rows of degree 1, 2, 3 in q'.
  KinematicConstraintSet k(
      1, 3,
      [](const auto& jet) {
        using T = scalar_of<decltype(jet.front())>;
        const auto& q = jet[0];
        const auto& v = jet[1];
        VecT<T> r(3);
        r << q(0) * v(0) - v(1), v(0) * v(0) - sin(q(1)) * v(0) * v(1),
            v(0) * v(1) * v(1) + q(0) * q(1) * v(1) * v(1) * v(1);
        return r;
      },
      {{}, {}, false});
  auto sys = make_chetaev(free_particle(2), k);
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> U(-2, 2);
  const Vec d = vec({1, 2, 3});
  for (int i = 0; i < 50; ++i) {
    JetPoint j(vec({U(rng), U(rng)}), vec({U(rng), U(rng)}));
    Vec lhs = sys.variational()(j) * j[1];
    Vec rhs = d.cwiseProduct(sys.kinematic()(j));
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(EvaluateResiduals, ReportsKinAndRank) {
  auto sys = make_dalembert(free_particle(3), 2, [](const auto& q) {
    using T = scalar_of<decltype(q)>;
    MatT<T> m(2, 3);
    m << T(1.0), T(0.0), T(0.0), T(2.0), T(0.0), T(0.0);  // rank 1
    return m;
  });
  auto rep = evaluate_residuals(sys, JetPoint(vec({0, 0, 0}), vec({1, 2, 3})));
  EXPECT_EQ(rep.var_rank, 1);
  EXPECT_NEAR(rep.kin(0), 1.0, 0.0);
  EXPECT_NEAR(rep.kin(1), 2.0, 0.0);
  EXPECT_THROW(evaluate_residuals(sys, JetPoint(std::vector<Vec>{vec({0, 0, 0})})), UsageError);
  EXPECT_THROW(evaluate_residuals(sys, JetPoint(vec({0, 0}), vec({1, 2}))), UsageError);
}

TEST(NumericalRank, RelativeCutoff) {
  Mat m = Mat::Zero(3, 3);
  m(0, 0) = 1.0;
  m(1, 1) = 1e-3;
  m(2, 2) = 1e-12;
  EXPECT_EQ(numerical_rank(m), 2);
  EXPECT_EQ(numerical_rank(Mat::Zero(2, 2)), 0);
}
