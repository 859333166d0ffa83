#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "ftcl/dynamics.hpp"

using namespace ftcl;

namespace {

Vector scalar(double v) { return Vector::Constant(1, v); }

}  // namespace

TEST(EvalSystem, Example1AtOrigin) {
  const DiscreteSystem sys = make_example1_system();
  EXPECT_DOUBLE_EQ(eval_system(sys, scalar(0.0), scalar(0.0))(0), 0.5);
}

TEST(EvalSystem, Example2Values) {
  const DiscreteSystem sys = make_example2_system();
  EXPECT_DOUBLE_EQ(eval_system(sys, scalar(0.0), scalar(0.0))(0), 0.0);
  EXPECT_DOUBLE_EQ(eval_system(sys, scalar(0.0), scalar(1.0))(0), 3.0);
}

TEST(EvalSystem, DimensionMismatchThrows) {
  const DiscreteSystem sys = make_example1_system();
  EXPECT_THROW(eval_system(sys, Vector::Zero(2), scalar(0.0)), std::invalid_argument);
  EXPECT_THROW(eval_system(sys, scalar(0.0), Vector::Zero(3)), std::invalid_argument);
}

TEST(EvalSystem, Deterministic) {
  const DiscreteSystem sys = make_example2_system();
  const Vector a = eval_system(sys, scalar(0.3719), scalar(-0.25));
  const Vector b = eval_system(sys, scalar(0.3719), scalar(-0.25));
  EXPECT_EQ(a(0), b(0));
}

TEST(EvalRegressor, Example1AtOrigin) {
  const Vector z = eval_regressor(make_example1_basis(), scalar(0.0), scalar(0.0));
  ASSERT_EQ(z.size(), 3);
  EXPECT_DOUBLE_EQ(z(0), 1.0);
  EXPECT_DOUBLE_EQ(z(1), 1.0);
  EXPECT_DOUBLE_EQ(z(2), 0.0);
}

TEST(EvalRegressor, RbfAtOwnCenterIsOne) {
  const BasisSet b = make_rbf_basis(uniform_centers(-2.0, 2.0, 5), 1.2, 1);
  const Vector z = eval_regressor(b, scalar(-1.0), scalar(0.0));
  EXPECT_DOUBLE_EQ(z(1), 1.0);
}

TEST(EvalRegressor, ZeroInputZeroesInputBlock) {
  const BasisSet b = make_rbf_basis(uniform_centers(-2.0, 2.0, 5), 1.2, 1);
  const Vector z = eval_regressor(b, scalar(0.7), scalar(0.0));
  for (int i = b.p; i < b.dim(); ++i) EXPECT_EQ(z(i), 0.0);
}

TEST(EvalRegressor, NonFiniteComponentNamed) {
  // chi = 1/(1+x) is infinite at x = -1.
  try {
    eval_regressor(make_example1_basis(), scalar(-1.0), scalar(1.0));
    FAIL() << "expected domain_error";
  } catch (const std::domain_error& e) {
    EXPECT_NE(std::string(e.what()).find("component 2"), std::string::npos) << e.what();
  }
}

TEST(RbfBasis, Counts) {
  EXPECT_EQ(make_rbf_basis(uniform_centers(-2.0, 2.0, 5), 1.2, 1).dim(), 10);
  EXPECT_EQ(make_rbf_basis(uniform_centers(0.0, 0.0, 1), 0.3, 1).dim(), 2);
}

TEST(RbfBasis, KernelAtSqrtTwoSpread) {
  const double spread = 0.8;
  const BasisSet b = make_rbf_basis({scalar(0.0)}, spread, 1);
  EXPECT_NEAR(b.phi(scalar(spread * std::sqrt(2.0)))(0), std::exp(-1.0), 1e-15);
}

TEST(RbfBasis, RejectsBadArguments) {
  EXPECT_THROW(make_rbf_basis({scalar(0.0)}, 0.0, 1), std::invalid_argument);
  EXPECT_THROW(make_rbf_basis({scalar(0.0)}, -1.0, 1), std::invalid_argument);
  EXPECT_THROW(make_rbf_basis({}, 1.0, 1), std::invalid_argument);
}

TEST(RbfBasis, RadialSymmetry) {
  Vector c(2);
  c << 0.5, -0.25;
  const BasisSet b = make_rbf_basis({c}, 0.9, 1);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> angle(0.0, 6.283185307179586);
  for (int t = 0; t < 50; ++t) {
    const double r = 0.1 * (t + 1);
    const double a1 = angle(rng);
    const double a2 = angle(rng);
    Vector x1(2), x2(2);
    x1 << c(0) + r * std::cos(a1), c(1) + r * std::sin(a1);
    x2 << c(0) + r * std::cos(a2), c(1) + r * std::sin(a2);
    EXPECT_NEAR(b.phi(x1)(0), b.phi(x2)(0), 1e-14);
  }
}

TEST(Approximator, PartitionConsistency) {
  const BasisSet basis = make_rbf_basis(uniform_centers(-2.0, 2.0, 5), 1.2, 1);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  for (int t = 0; t < 100; ++t) {
    const Matrix theta = Matrix::NullaryExpr(basis.dim(), 1, [&]() { return U(rng); });
    const Approximator approx(basis, theta);
    const Vector x = scalar(U(rng));
    const Vector u = scalar(U(rng));
    const Vector split = approx.drift(x) + approx.input_gain(x) * u;
    const Vector whole = theta.transpose() * eval_regressor(basis, x, u);
    EXPECT_NEAR((split - whole).cwiseAbs().maxCoeff(), 0.0, 1e-12);
    EXPECT_NEAR((approx.predict(x, u) - whole).cwiseAbs().maxCoeff(), 0.0, 1e-12);
  }
}

TEST(Approximator, RejectsWrongShape) {
  EXPECT_THROW(Approximator(make_example1_basis(), Matrix::Zero(2, 1)), std::invalid_argument);
}

TEST(Example1, ThetaStarReproducesSystem) {
  const DiscreteSystem sys = make_example1_system();
  const Approximator approx(make_example1_basis(), example1_theta());
  for (double x : {0.0, 0.4, 1.3, 2.0}) {
    for (double u : {-0.3, 0.0, 0.8}) {
      EXPECT_NEAR(approx.predict(scalar(x), scalar(u))(0), sys.step(scalar(x), scalar(u))(0), 1e-14);
    }
  }
}

TEST(Domain, ValidateRejectsInverted) {
  DomainSpec d{scalar(1.0), scalar(0.0), 10};
  EXPECT_THROW(d.validate(), std::invalid_argument);
  DomainSpec e{scalar(0.0), scalar(1.0), 0};
  EXPECT_THROW(e.validate(), std::invalid_argument);
}

TEST(Domain, TrapezoidIntegratesConstantsAndLinears) {
  DomainSpec d{scalar(-1.0), scalar(3.0), 7};
  double w = 0.0;
  double lin = 0.0;
  for (const auto& node : trapezoid_nodes(d)) {
    w += node.weight;
    lin += node.weight * node.x(0);
  }
  EXPECT_NEAR(w, 4.0, 1e-14);
  EXPECT_NEAR(lin, 4.0, 1e-13);
}

TEST(Domain, TensorProductArea) {
  Vector lo(2), hi(2);
  lo << 0.0, -1.0;
  hi << 2.0, 2.0;
  double w = 0.0;
  for (const auto& node : trapezoid_nodes(DomainSpec{lo, hi, 5})) w += node.weight;
  EXPECT_NEAR(w, 6.0, 1e-13);
}

TEST(FitOptimalTheta, RecoversExactParameters) {
  const DiscreteSystem sys = make_example1_system();
  const Matrix theta = fit_optimal_theta(sys, make_example1_basis(), DomainSpec{scalar(0.0), scalar(2.0), 200});
  EXPECT_NEAR((theta - example1_theta()).cwiseAbs().maxCoeff(), 0.0, 1e-10);
}

TEST(GenericSystem, TwoDimensional) {
  const DiscreteSystem sys = make_system(
      "rot", 2, 1, [](const Vector& x) { return Vector(Vector{{x(1), -x(0)}}); },
      [](const Vector&) { return Matrix(Matrix::Ones(2, 1)); });
  const Vector y = sys.step(Vector{{1.0, 2.0}}, scalar(0.5));
  EXPECT_DOUBLE_EQ(y(0), 2.5);
  EXPECT_DOUBLE_EQ(y(1), -0.5);
}
