#pragma once

// Independent reference computations used by the tests. None of these call
// into the library's potential kernels.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <random>

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// c_t(R^d) as a plain floating product.
inline long double design_constant(int t, int d) {
  long double c = 1.0L;
  for (int j = 0; j < t; ++j) c *= static_cast<long double>(2 * j + 1) / (d + 2 * j);
  return c;
}

struct Potential {
  long double lhs = 0, rhs = 0, f = 0;
};

// Direct double loop over all ordered pairs.
inline Potential potential(const MatrixXd& V, int t) {
  Potential p;
  long double norms = 0;
  for (int j = 0; j < V.cols(); ++j) {
    for (int k = 0; k < V.cols(); ++k) {
      long double ip = 0;
      for (int i = 0; i < V.rows(); ++i) ip += static_cast<long double>(V(i, j)) * V(i, k);
      p.lhs += std::pow(ip, 2 * t);
    }
    long double r = 0;
    for (int i = 0; i < V.rows(); ++i) r += static_cast<long double>(V(i, j)) * V(i, j);
    norms += std::pow(r, t);
  }
  p.rhs = design_constant(t, static_cast<int>(V.rows())) * norms * norms;
  p.f = p.lhs - p.rhs;
  return p;
}

// Central differences of a scalar function of a matrix.
inline MatrixXd fd_gradient(const std::function<double(const MatrixXd&)>& f, const MatrixXd& X, double h = 1e-5) {
  MatrixXd G(X.rows(), X.cols());
  for (int i = 0; i < X.rows(); ++i) {
    for (int j = 0; j < X.cols(); ++j) {
      MatrixXd a = X, b = X;
      a(i, j) += h;
      b(i, j) -= h;
      G(i, j) = (f(a) - f(b)) / (2 * h);
    }
  }
  return G;
}

inline MatrixXd gaussian(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  MatrixXd M(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) M(i, j) = g(rng);
  return M;
}

inline MatrixXd unit_columns(int rows, int cols, std::mt19937_64& rng) {
  MatrixXd M = gaussian(rows, cols, rng);
  M.colwise().normalize();
  return M;
}

inline MatrixXd random_orthogonal(int d, std::mt19937_64& rng) {
  Eigen::HouseholderQR<MatrixXd> qr(gaussian(d, d, rng));
  return qr.householderQ();
}

inline VectorXd random_signs(int n, std::mt19937_64& rng) {
  VectorXd s(n);
  for (int i = 0; i < n; ++i) s(i) = (rng() & 1) ? 1.0 : -1.0;
  return s;
}

// Σ_j ⟨x, v_j⟩^{2t} for a single x.
inline long double power_sum(const MatrixXd& V, const VectorXd& x, int t) {
  long double s = 0;
  for (int j = 0; j < V.cols(); ++j) s += std::pow(static_cast<long double>(x.dot(V.col(j))), 2 * t);
  return s;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace oracle
