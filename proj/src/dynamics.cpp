#include "ftcl/dynamics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace ftcl {

namespace {

void require_dim(const char* what, Eigen::Index got, Eigen::Index want) {
  if (got != want) {
    throw std::invalid_argument(std::string(what) + ": expected dimension " + std::to_string(want) +
                                ", got " + std::to_string(got));
  }
}

}  // namespace

Vector DiscreteSystem::step(const Vector& x, const Vector& u) const {
  require_dim("system state", x.size(), n);
  require_dim("system input", u.size(), m);
  return drift(x) + input_gain(x) * u;
}

Approximator::Approximator(BasisSet basis, Matrix theta) : basis_(std::move(basis)), theta_(std::move(theta)) {
  require_dim("approximator theta rows", theta_.rows(), basis_.dim());
}

Vector Approximator::drift(const Vector& x) const { return theta_f().transpose() * basis_.phi(x); }

Matrix Approximator::input_gain(const Vector& x) const { return theta_g().transpose() * basis_.chi(x); }

Vector Approximator::predict(const Vector& x, const Vector& u) const {
  return theta_.transpose() * eval_regressor(basis_, x, u);
}

void DomainSpec::validate() const {
  if (x_lo.size() == 0 || x_lo.size() != x_hi.size()) {
    throw std::invalid_argument("domain: x_lo and x_hi must be non-empty with equal size");
  }
  for (Eigen::Index i = 0; i < x_lo.size(); ++i) {
    if (!(x_lo(i) < x_hi(i))) {
      throw std::invalid_argument("domain: x_lo must be below x_hi in dimension " + std::to_string(i));
    }
  }
  if (intervals < 1) throw std::invalid_argument("domain: intervals must be >= 1");
}

std::vector<double> DomainSpec::grid(int i) const {
  std::vector<double> pts(static_cast<size_t>(intervals) + 1);
  const double h = (x_hi(i) - x_lo(i)) / intervals;
  for (int j = 0; j <= intervals; ++j) pts[static_cast<size_t>(j)] = x_lo(i) + j * h;
  // Pin the endpoint so the grid ends exactly at x_hi.
  pts.back() = x_hi(i);
  return pts;
}

std::vector<QuadraturePoint> trapezoid_nodes(const DomainSpec& domain) {
  domain.validate();
  const int n = domain.dim();
  std::vector<std::vector<double>> axes;
  axes.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) axes.push_back(domain.grid(i));

  std::vector<QuadraturePoint> nodes;
  std::vector<int> idx(static_cast<size_t>(n), 0);
  const int last = domain.intervals;
  while (true) {
    QuadraturePoint qp{Vector(n), 1.0};
    for (int i = 0; i < n; ++i) {
      const int j = idx[static_cast<size_t>(i)];
      qp.x(i) = axes[static_cast<size_t>(i)][static_cast<size_t>(j)];
      const double h = (domain.x_hi(i) - domain.x_lo(i)) / last;
      qp.weight *= (j == 0 || j == last) ? 0.5 * h : h;
    }
    nodes.push_back(std::move(qp));
    int d = 0;
    while (d < n && ++idx[static_cast<size_t>(d)] > last) {
      idx[static_cast<size_t>(d)] = 0;
      ++d;
    }
    if (d == n) break;
  }
  return nodes;
}

Vector eval_system(const DiscreteSystem& sys, const Vector& x, const Vector& u) { return sys.step(x, u); }

Vector eval_regressor(const BasisSet& basis, const Vector& x, const Vector& u) {
  require_dim("regressor input", u.size(), basis.m);
  const Vector phi = basis.phi(x);
  const Matrix chi = basis.chi(x);
  require_dim("phi output", phi.size(), basis.p);
  require_dim("chi rows", chi.rows(), basis.q);
  require_dim("chi cols", chi.cols(), basis.m);

  Vector z(basis.dim());
  z.head(basis.p) = phi;
  z.tail(basis.q) = chi * u;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (!std::isfinite(z(i))) {
      throw std::domain_error("regressor component " + std::to_string(i) + " is not finite");
    }
  }
  return z;
}

DiscreteSystem make_system(std::string name, int n, int m, std::function<Vector(const Vector&)> drift,
                           std::function<Matrix(const Vector&)> input_gain) {
  if (n < 1 || m < 1) throw std::invalid_argument("make_system: n and m must be positive");
  return DiscreteSystem{std::move(name), n, m, std::move(drift), std::move(input_gain)};
}

DiscreteSystem make_example1_system(double p1, double p2, double p3) {
  return make_system(
      "example1", 1, 1,
      [p1, p2](const Vector& x) {
        const double e = std::exp(-x(0));
        return Vector::Constant(1, p1 * e + p2 * e * std::cos(x(0)));
      },
      [p3](const Vector& x) { return Matrix::Constant(1, 1, p3 / (1.0 + x(0))); });
}

BasisSet make_example1_basis() {
  BasisSet b;
  b.name = "example1";
  b.p = 2;
  b.q = 1;
  b.m = 1;
  b.phi = [](const Vector& x) {
    const double e = std::exp(-x(0));
    Vector v(2);
    v << e, e * std::cos(x(0));
    return v;
  };
  b.chi = [](const Vector& x) { return Matrix::Constant(1, 1, 1.0 / (1.0 + x(0))); };
  return b;
}

Matrix example1_theta(double p1, double p2, double p3) {
  Matrix t(3, 1);
  t << p1, p2, p3;
  return t;
}

DiscreteSystem make_example2_system() {
  return make_system(
      "example2", 1, 1, [](const Vector& x) { return Vector::Constant(1, 0.5 * x(0) * std::sin(0.5 * x(0))); },
      [](const Vector& x) { return Matrix::Constant(1, 1, 2.0 + std::cos(x(0))); });
}

BasisSet make_rbf_basis(const std::vector<Vector>& centers, double spread, int m) {
  if (!(spread > 0.0)) throw std::invalid_argument("make_rbf_basis: spread must be positive");
  if (centers.empty()) throw std::invalid_argument("make_rbf_basis: no centers");
  if (m < 1) throw std::invalid_argument("make_rbf_basis: m must be positive");
  const Eigen::Index dim = centers.front().size();
  for (const auto& c : centers) require_dim("rbf center", c.size(), dim);

  const int count = static_cast<int>(centers.size());
  const double inv_two_var = 1.0 / (2.0 * spread * spread);
  auto kernels = [centers, inv_two_var](const Vector& x) {
    Vector k(static_cast<Eigen::Index>(centers.size()));
    for (size_t i = 0; i < centers.size(); ++i) {
      k(static_cast<Eigen::Index>(i)) = std::exp(-(x - centers[i]).squaredNorm() * inv_two_var);
    }
    return k;
  };

  BasisSet b;
  b.name = "rbf";
  b.p = count;
  b.q = count;
  b.m = m;
  b.phi = kernels;
  // Each kernel multiplies the summed input channels, so chi u = k(x) * sum(u).
  b.chi = [kernels, m](const Vector& x) {
    const Vector k = kernels(x);
    return Matrix(k.replicate(1, m));
  };
  return b;
}

std::vector<Vector> uniform_centers(double lo, double hi, int count) {
  if (count < 1) throw std::invalid_argument("uniform_centers: count must be positive");
  std::vector<Vector> out;
  out.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double c = count == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * i / (count - 1);
    out.push_back(Vector::Constant(1, c));
  }
  return out;
}

Matrix fit_optimal_theta(const DiscreteSystem& sys, const BasisSet& basis, const DomainSpec& domain) {
  require_dim("domain", domain.dim(), sys.n);
  require_dim("basis input", basis.m, sys.m);
  const auto nodes = trapezoid_nodes(domain);
  const auto rows = static_cast<Eigen::Index>(nodes.size());

  Matrix phi_design(rows, basis.p);
  Matrix f_target(rows, sys.n);
  Matrix chi_design(rows * sys.m, basis.q);
  Matrix g_target(rows * sys.m, sys.n);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& node = nodes[static_cast<size_t>(r)];
    const double w = std::sqrt(node.weight);
    phi_design.row(r) = w * basis.phi(node.x).transpose();
    f_target.row(r) = w * sys.drift(node.x).transpose();
    const Matrix chi = basis.chi(node.x);
    const Matrix g = sys.input_gain(node.x);
    for (int j = 0; j < sys.m; ++j) {
      chi_design.row(r * sys.m + j) = w * chi.col(j).transpose();
      g_target.row(r * sys.m + j) = w * g.col(j).transpose();
    }
  }

  Matrix theta(basis.dim(), sys.n);
  theta.topRows(basis.p) = phi_design.colPivHouseholderQr().solve(f_target);
  theta.bottomRows(basis.q) = chi_design.colPivHouseholderQr().solve(g_target);
  return theta;
}

}  // namespace ftcl
