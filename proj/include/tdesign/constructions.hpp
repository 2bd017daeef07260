#pragma once

// Closed-form designs and configuration families.

#include "tdesign/core.hpp"
#include "tdesign/manifold_opt.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace tdesign {

struct MercedesAngles {
  std::array<double, 4> theta{};
};

/// Orthonormal basis of a k-plane in R^d, stored as the columns of a d×k matrix.
class SubspaceBasis {
 public:
  explicit SubspaceBasis(Matrix columns) : columns_(std::move(columns)) {
    const Eigen::Index k = columns_.cols();
    if (k < 1 || columns_.rows() < k) throw std::invalid_argument("subspace basis needs 1 <= k <= d");
    const double err = (columns_.transpose() * columns_ - Matrix::Identity(k, k)).cwiseAbs().maxCoeff();
    if (err > 1e-13) {
      throw std::invalid_argument("subspace basis columns are not orthonormal (error " +
                                  std::to_string(err) + ")");
    }
  }
  const Matrix& columns() const { return columns_; }
  int dim() const { return static_cast<int>(columns_.rows()); }
  int rank() const { return static_cast<int>(columns_.cols()); }
  Matrix projector() const { return columns_ * columns_.transpose(); }

 private:
  Matrix columns_;
};

inline Eigen::Matrix2d rotation_2d(double angle) {
  Eigen::Matrix2d R;
  R << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return R;
}

/// k = 0..t at angles kπ/(t+1); optimal (t,t)-design for R².
inline Configuration equally_spaced_lines(int t) {
  if (t < 1) throw std::invalid_argument("equally_spaced_lines needs t >= 1");
  Matrix V(2, t + 1);
  for (int k = 0; k <= t; ++k) {
    const double a = k * std::numbers::pi / (t + 1);
    V(0, k) = std::cos(a);
    V(1, k) = std::sin(a);
  }
  return Configuration(V, NormMode::EqualNorm);
}

/// [u, Ru, R²u] with u = (cos θ, sin θ) and R the rotation by 2π/3.
inline Matrix mercedes_benz(double theta) {
  const Eigen::Matrix2d R = rotation_2d(2.0 * std::numbers::pi / 3.0);
  const Eigen::Vector2d u(std::cos(theta), std::sin(theta));
  Matrix M(2, 3);
  M.col(0) = u;
  M.col(1) = R * u;
  M.col(2) = R * R * u;
  return M;
}

/// The unique four equi-isoclinic planes in R⁴, σ² = 1/3.
inline std::array<SubspaceBasis, 4> equiisoclinic_planes_R4() {
  const double s2 = std::sqrt(2.0), s3 = std::sqrt(3.0), s6 = std::sqrt(6.0);
  Matrix V(4, 8);
  V << s6, 0, s2, 0, s2, 0, s2, 0,
       0, s6, 0, s2, 0, s2, 0, s2,
       0, 0, -2, 0, 1, -s3, 1, s3,
       0, 0, 0, -2, s3, 1, -s3, 1;
  V /= s6;
  // Re-orthonormalize each block so the bases are exact to working precision.
  auto block = [&](int j) {
    Eigen::HouseholderQR<Matrix> qr(V.middleCols(2 * j, 2));
    Matrix Q = qr.householderQ() * Matrix::Identity(4, 2);
    // Keep the orientation of the displayed columns.
    for (int c = 0; c < 2; ++c) {
      if (Q.col(c).dot(V.col(2 * j + c)) < 0) Q.col(c) = -Q.col(c);
    }
    return SubspaceBasis(Q);
  };
  return {block(0), block(1), block(2), block(3)};
}

/// V = [V₁M₁, …, V₄M₄]: four Mercedes-Benz frames in the equi-isoclinic planes.
inline Configuration twelve_point_design(const MercedesAngles& angles) {
  const auto planes = equiisoclinic_planes_R4();
  Matrix V(4, 12);
  for (int j = 0; j < 4; ++j) {
    if (!std::isfinite(angles.theta[j])) throw std::invalid_argument("non-finite Mercedes angle");
    V.middleCols(3 * j, 3) = planes[j].columns() * mercedes_benz(angles.theta[j]);
  }
  V.colwise().normalize();
  return Configuration(V, NormMode::EqualNorm);
}

/// Three real mutually unbiased bases of R⁴, as [B₁, B₂, B₃].
inline Configuration three_mubs_R4() {
  Matrix V(4, 12);
  V << 1, 1, 0, 0, 1, 1, 0, 0, 1, 1, 0, 0,
       1, -1, 0, 0, 0, 0, 1, 1, 0, 0, 1, 1,
       0, 0, 1, 1, 1, -1, 0, 0, 0, 0, 1, -1,
       0, 0, 1, -1, 0, 0, 1, -1, 1, -1, 0, 0;
  V *= std::sqrt(0.5);
  V.colwise().normalize();
  return Configuration(V, NormMode::EqualNorm);
}

/// Reznick's 11-point (3,3)-design for R³: Σ⟨x,v_j⟩⁶ = 540‖x‖⁶.
inline Configuration reznick_11pt() {
  const double a = std::pow(378.0, 1.0 / 6.0), b = std::pow(280.0, 1.0 / 6.0), r = std::sqrt(3.0);
  Matrix V(3, 11);
  V << a, 0, 0, r, r, 0, 0, r, r, r, r,
       0, a, 0, 0, 0, r, r, r, -r, r, -r,
       0, 0, b, 2, -2, 2, -2, 1, 1, -1, -1;
  return Configuration(V, NormMode::Weighted);
}

/// The 11-point (3,3)-design for R³ with D5 symmetry:
///   V = [a₁E, a₂E, 0; b₁1ᵀ, -b₂1ᵀ, -b₃], E the 5th roots of unity in R².
inline Configuration new_11pt_d5() {
  const double r = std::sqrt(105.0);
  const double a1 = std::pow(12960.0 + 864.0 * r, 1.0 / 6.0);
  const double a2 = std::pow(12960.0 - 864.0 * r, 1.0 / 6.0);
  const double b1 = std::pow(1425.0 - 139.0 * r, 1.0 / 6.0);
  const double b2 = std::pow(1425.0 + 139.0 * r, 1.0 / 6.0);
  const double b3 = std::pow(26250.0, 1.0 / 6.0);
  Matrix V = Matrix::Zero(3, 11);
  for (int k = 0; k < 5; ++k) {
    const double ang = 2.0 * std::numbers::pi * k / 5.0;
    V(0, k) = a1 * std::cos(ang);
    V(1, k) = a1 * std::sin(ang);
    V(2, k) = b1;
    V(0, 5 + k) = a2 * std::cos(ang);
    V(1, 5 + k) = a2 * std::sin(ang);
    V(2, 5 + k) = -b2;
  }
  V(2, 10) = -b3;
  return Configuration(V, NormMode::Weighted);
}

struct StroudCoefficients {
  double g, a1, a2, a3, a4, a5, C;
};

/// sign = +1 or -1 selects the upper or lower branch of every ±/∓.
inline StroudCoefficients stroud_coefficients(int d, int sign) {
  if (d < 4 || d > 6) throw std::invalid_argument("stroud_design needs d in {4,5,6}");
  if (sign != 1 && sign != -1) throw std::invalid_argument("stroud_design sign must be +1 or -1");
  const double s = sign * 2.0 * std::sqrt(2.0);
  StroudCoefficients c{};
  c.g = std::pow(8.0 - d, 0.25);
  const double g2 = c.g * c.g, g3 = g2 * c.g, g4 = g2 * g2;
  c.a1 = 8.0 * (g4 - 1.0) * std::pow(g2 + s, 4);
  c.a2 = 2.0 * g2 + s;
  c.a3 = -s * g4 - 8.0 * g2;
  c.a4 = 2.0 * c.g;
  c.a5 = -s * g3 - 8.0 * c.g;
  c.C = 3.0 * std::pow(c.a5, 4);
  return c;
}

/// Stroud's antipodal degree-5 rule as a weighted (2,2)-design for R^d,
/// n = 1 + d + d(d-1)/2.
inline Configuration stroud_design(int d, int sign) {
  const StroudCoefficients c = stroud_coefficients(d, sign);
  const Vector u = Vector::Ones(d);
  Matrix V(d, 1 + d + d * (d - 1) / 2);
  V.col(0) = std::pow(c.a1, 0.25) * u;
  int col = 1;
  for (int j = 0; j < d; ++j) {
    V.col(col) = c.a2 * u;
    V(j, col) += c.a3;
    ++col;
  }
  for (int j = 0; j < d; ++j) {
    for (int k = j + 1; k < d; ++k) {
      V.col(col) = c.a4 * u;
      V(j, col) += c.a5;
      V(k, col) += c.a5;
      ++col;
    }
  }
  return Configuration(V, NormMode::Weighted);
}

/// Kempner's 24 vectors {2e_i}, 8^{1/6}{e_i ± e_j}, {e₁ ± e₂ ± e₃ ± e₄}, all of
/// norm 2, with Σ⟨x,v⟩⁶ = 120‖x‖⁶.
inline Configuration kempner_24pt_weighted() {
  Matrix V = Matrix::Zero(4, 24);
  int col = 0;
  for (int i = 0; i < 4; ++i) V(i, col++) = 2.0;
  const double w = std::pow(8.0, 1.0 / 6.0);
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      for (double s : {1.0, -1.0}) {
        V(i, col) = w;
        V(j, col) = s * w;
        ++col;
      }
    }
  }
  for (int signs = 0; signs < 8; ++signs) {
    V(0, col) = 1.0;
    for (int i = 1; i < 4; ++i) V(i, col) = (signs >> (i - 1)) & 1 ? -1.0 : 1.0;
    ++col;
  }
  return Configuration(V, NormMode::Weighted);
}

/// Kempner's design rescaled to unit vectors.
inline Configuration kempner_24pt() {
  Matrix V = kempner_24pt_weighted().entries();
  V.colwise().normalize();
  return Configuration(V, NormMode::EqualNorm);
}

// ---------------------------------------------------------------------------
// Z3-orbit designs in R³

/// g = diag(1, R) with R the rotation by 2π/3.
inline Eigen::Matrix3d z3_generator() {
  Eigen::Matrix3d g = Eigen::Matrix3d::Zero();
  g(0, 0) = 1.0;
  g.bottomRightCorner<2, 2>() = rotation_2d(2.0 * std::numbers::pi / 3.0);
  return g;
}

namespace kernel {

inline Matrix z3_orbit(const Matrix& seeds) {
  const Eigen::Matrix3d g = z3_generator();
  Matrix V(3, 3 * seeds.cols());
  for (Eigen::Index j = 0; j < seeds.cols(); ++j) {
    Eigen::Vector3d v = seeds.col(j);
    for (int r = 0; r < 3; ++r) {
      V.col(3 * j + r) = v;
      v = g * v;
    }
  }
  return V;
}

/// Adjoint of z3_orbit: column j collects Σ_r (g^r)ᵀ m_{3j+r}.
inline Matrix z3_pullback(const Matrix& M) {
  const Eigen::Matrix3d gt = z3_generator().transpose();
  Matrix S(3, M.cols() / 3);
  for (Eigen::Index j = 0; j < S.cols(); ++j) {
    Eigen::Vector3d acc = M.col(3 * j + 2);
    acc = gt * acc + M.col(3 * j + 1);
    acc = gt * acc + M.col(3 * j);
    S.col(j) = acc;
  }
  return S;
}

}  // namespace kernel

inline constexpr int kZ3SeedCount = 8;

/// [v₁, gv₁, g²v₁, …, v₈, gv₈, g²v₈].
inline Configuration z3_orbit(const Matrix& seeds) {
  if (seeds.rows() != 3 || seeds.cols() != kZ3SeedCount) {
    throw std::invalid_argument("z3_orbit needs 8 seed vectors in R^3");
  }
  for (int j = 0; j < kZ3SeedCount; ++j) {
    if (std::abs(seeds.col(j).norm() - 1.0) > 1e-12) {
      throw std::invalid_argument("z3_orbit seed " + std::to_string(j) + " is not a unit vector");
    }
  }
  Matrix V = kernel::z3_orbit(seeds);
  V.colwise().normalize();
  return Configuration(V, NormMode::EqualNorm);
}

namespace detail {

// f_{4,3,24} of the orbit, as a function of the 8 seeds.
struct Z3OrbitCost {
  double value(const Matrix& s) const { return kernel::potential(kernel::z3_orbit(s), 4).f; }
  Matrix gradient(const Matrix& s) const {
    return kernel::z3_pullback(kernel::potential_gradient(kernel::z3_orbit(s), 4));
  }
  Matrix hessian(const Matrix& s, const Matrix& w) const {
    return kernel::z3_pullback(
        kernel::potential_hessian_vector(kernel::z3_orbit(s), 4, kernel::z3_orbit(w)));
  }
};

}  // namespace detail

struct Z3SeedResult {
  Matrix seeds;  // 3×8, unit columns
  double f_value = 0.0;
  Convergence converged = Convergence::IterationCap;
};

/// Minimizes f_{4,3,24}(z3_orbit(S)) over unit seeds S, starting from random
/// seeds drawn with options.seed.
inline Z3SeedResult minimize_z3_seeds(const SolverOptions& options) {
  options.validate();
  const Matrix start = random_configuration(3, kZ3SeedCount, NormMode::EqualNorm, options.seed).entries();
  const double zero_level = options.zero_threshold_for(3 * kZ3SeedCount);
  TrustRegionOutcome out = trust_region<ObliqueDomain>(detail::Z3OrbitCost{}, start, options, zero_level);
  Z3SeedResult result;
  result.seeds = out.x;
  result.seeds.colwise().normalize();
  result.f_value = potential(z3_orbit(result.seeds), 4).f;
  result.converged = out.converged;
  return result;
}

}  // namespace tdesign
