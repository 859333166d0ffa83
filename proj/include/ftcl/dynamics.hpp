#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ftcl/types.hpp"

namespace ftcl {

/// x(k+1) = f(x) + g(x) u with f : R^n -> R^n and g : R^n -> R^{n x m}.
/// The drift/input split is kept so benchmarks can score f and g separately.
struct DiscreteSystem {
  std::string name;
  int n = 1;
  int m = 1;
  std::function<Vector(const Vector&)> drift;
  std::function<Matrix(const Vector&)> input_gain;

  Vector step(const Vector& x, const Vector& u) const;
};

/// Basis functions for the drift (phi, p entries) and input (chi, q x m) terms.
struct BasisSet {
  std::string name;
  int p = 0;
  int q = 0;
  int m = 1;
  std::function<Vector(const Vector&)> phi;
  std::function<Matrix(const Vector&)> chi;

  int dim() const { return p + q; }
};

/// Linearly parameterized approximator with theta of shape (p+q) x n.
/// Rows [0, p) hold the drift weights, rows [p, p+q) the input weights.
class Approximator {
 public:
  Approximator(BasisSet basis, Matrix theta);

  const Matrix& theta() const { return theta_; }
  Matrix theta_f() const { return theta_.topRows(basis_.p); }
  Matrix theta_g() const { return theta_.bottomRows(basis_.q); }

  Vector drift(const Vector& x) const;
  Matrix input_gain(const Vector& x) const;
  Vector predict(const Vector& x, const Vector& u) const;

 private:
  BasisSet basis_;
  Matrix theta_;
};

/// Box domain with the uniform grid used for learning-error quadrature.
struct DomainSpec {
  Vector x_lo;
  Vector x_hi;
  int intervals = 500;

  void validate() const;
  int dim() const { return static_cast<int>(x_lo.size()); }
  /// Grid points along dimension i, x_lo(i) + j*(x_hi(i)-x_lo(i))/intervals.
  std::vector<double> grid(int i) const;
};

struct QuadraturePoint {
  Vector x;
  double weight = 0.0;
};

/// Tensor-product trapezoid nodes over the domain grid; the weights integrate
/// constants exactly.
std::vector<QuadraturePoint> trapezoid_nodes(const DomainSpec& domain);

Vector eval_system(const DiscreteSystem& sys, const Vector& x, const Vector& u);

/// z(x,u) = [phi(x); chi(x) u].
Vector eval_regressor(const BasisSet& basis, const Vector& x, const Vector& u);

// Example 1: x' = p1 e^{-x} + p2 e^{-x} cos x + p3 u/(1+x).
DiscreteSystem make_example1_system(double p1 = -1.0, double p2 = 1.5, double p3 = 1.0);
BasisSet make_example1_basis();
/// Theta* for Example 1 as a 3x1 matrix.
Matrix example1_theta(double p1 = -1.0, double p2 = 1.5, double p3 = 1.0);

// Example 2: x' = 0.5 x sin(0.5 x) + (2 + cos x) u.
DiscreteSystem make_example2_system();

/// Gaussian kernels exp(-||x-c_i||^2 / (2 spread^2)) shared by phi and chi,
/// so p = q = centers.size().
BasisSet make_rbf_basis(const std::vector<Vector>& centers, double spread, int m);

/// `count` scalar centers spread uniformly over [lo, hi].
std::vector<Vector> uniform_centers(double lo, double hi, int count);

/// Generic closure-backed system for callers that wire their own dynamics.
DiscreteSystem make_system(std::string name, int n, int m,
                           std::function<Vector(const Vector&)> drift,
                           std::function<Matrix(const Vector&)> input_gain);

/// Optimal parameters in the weighted least-squares sense over the trapezoid
/// nodes: theta_f fits f against phi, theta_g fits every input column of g
/// against the matching column of chi.
Matrix fit_optimal_theta(const DiscreteSystem& sys, const BasisSet& basis, const DomainSpec& domain);

}  // namespace ftcl
