#pragma once

// Certification oracles that do not go through the potential: monomial
// cubature, isoclinic plane checks and the Z3-orbit equation system.

#include "tdesign/constructions.hpp"
#include "tdesign/core.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tdesign {

struct MultiIndex {
  std::vector<int> alpha;

  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> a) : alpha(std::move(a)) {
    for (int e : alpha) {
      if (e < 0) throw std::invalid_argument("multi-index entries must be nonnegative");
    }
  }
  int dim() const { return static_cast<int>(alpha.size()); }
  int degree() const {
    int s = 0;
    for (int e : alpha) s += e;
    return s;
  }
};

/// All exponent vectors of length d and total degree k, in lexicographic order
/// (largest first coordinate first).
inline std::vector<MultiIndex> monomials_of_degree(int d, int k) {
  if (d < 1 || k < 0) throw std::invalid_argument("monomials_of_degree needs d >= 1, k >= 0");
  std::vector<MultiIndex> out;
  std::vector<int> a(static_cast<std::size_t>(d), 0);
  auto rec = [&](auto&& self, int pos, int left) -> void {
    if (pos == d - 1) {
      a[static_cast<std::size_t>(pos)] = left;
      out.emplace_back(a);
      return;
    }
    for (int e = left; e >= 0; --e) {
      a[static_cast<std::size_t>(pos)] = e;
      self(self, pos + 1, left - e);
    }
  };
  rec(rec, 0, k);
  return out;
}

/// Normalized surface integral of x^α over the unit sphere in R^d:
/// 0 unless α = 2β, in which case (1/2)_β / (d/2)_{|β|}.
inline Rational sphere_monomial_integral(const MultiIndex& alpha, int d) {
  if (alpha.dim() != d) {
    throw std::invalid_argument("multi-index length " + std::to_string(alpha.dim()) +
                                " does not match d = " + std::to_string(d));
  }
  Rational num = 1, den = 1;
  int total = 0;
  for (int e : alpha.alpha) {
    if (e % 2 != 0) return 0;
    for (int i = 0; i < e / 2; ++i) num *= Rational(2 * i + 1, 2);
    total += e / 2;
  }
  for (int i = 0; i < total; ++i) den *= Rational(d + 2 * i, 2);
  return num / den;
}

/// max over |α| = 2t of |(1/n) Σ_j v_j^α − ∫ x^α dσ|. Zero iff the unit
/// vectors form a (t,t)-design.
inline double cubature_residual(const Configuration& config, int t) {
  if (t < 1) throw std::invalid_argument("cubature_residual needs t >= 1");
  const Matrix& V = config.entries();
  for (int j = 0; j < config.size(); ++j) {
    if (std::abs(V.col(j).norm() - 1.0) > 1e-12) {
      throw std::invalid_argument("cubature_residual needs unit columns; column " +
                                  std::to_string(j) + " has norm " + std::to_string(V.col(j).norm()));
    }
  }
  const int d = config.dim(), n = config.size();
  double worst = 0.0;
  for (const MultiIndex& a : monomials_of_degree(d, 2 * t)) {
    long double sum = 0.0L;
    for (int j = 0; j < n; ++j) {
      long double term = 1.0L;
      for (int i = 0; i < d; ++i) term *= ipow(static_cast<long double>(V(i, j)), a.alpha[static_cast<std::size_t>(i)]);
      sum += term;
    }
    const double exact = static_cast<double>(sphere_monomial_integral(a, d));
    worst = std::max(worst, static_cast<double>(std::abs(sum / n - exact)));
  }
  return worst;
}

/// max over j≠k of ‖P_j P_k P_j − σ² P_j‖ (spectral norm).
inline double equiisoclinic_residual(std::span<const SubspaceBasis> bases, double sigma_squared) {
  if (bases.empty()) return 0.0;
  const int d = bases.front().dim(), k = bases.front().rank();
  for (const auto& b : bases) {
    if (b.dim() != d || b.rank() != k) {
      throw std::invalid_argument("equiisoclinic_residual needs bases of equal ambient dimension and rank");
    }
  }
  std::vector<Matrix> P;
  for (const auto& b : bases) P.push_back(b.projector());
  double worst = 0.0;
  for (std::size_t j = 0; j < P.size(); ++j) {
    for (std::size_t l = 0; l < P.size(); ++l) {
      if (j == l) continue;
      Matrix E = P[j] * P[l] * P[j] - sigma_squared * P[j];
      E = 0.5 * (E + E.transpose());
      Eigen::SelfAdjointEigenSolver<Matrix> es(E, Eigen::EigenvaluesOnly);
      worst = std::max(worst, es.eigenvalues().cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

/// Residuals of the equation system characterizing when the Z3 orbit of eight
/// seeds (b_j, y_j, z_j) is a 24-point (4,4)-design for R³.
struct Z3Residuals {
  std::array<double, 4> power_sums{};     // (1/8)Σb^{2k} − 1/(2k+1), k = 1..4
  std::array<double, 3> y_moments{};      // Σ b^{2k−1} y (3−3b²−4y²), k = 1..3
  std::array<double, 3> z_moments{};      // same with z
  double quadratic = 0.0;                 // (1/8)Σ b²y²(3−3b²−4y²)² − 8/315
  std::array<double, 2> mixed{};          // Σ b^{2k} yz(3z²−y²)(3y²−z²), k = 0,1
  double quartic = 0.0;                   // Σ (y⁴−z⁴)(y⁴−14y²z²+z⁴)
  std::array<double, 8> norms{};          // b² + y² + z² − 1 per seed

  std::vector<double> theorem() const {
    std::vector<double> r(power_sums.begin(), power_sums.end());
    r.insert(r.end(), y_moments.begin(), y_moments.end());
    r.insert(r.end(), z_moments.begin(), z_moments.end());
    r.push_back(quadratic);
    r.insert(r.end(), mixed.begin(), mixed.end());
    r.push_back(quartic);
    return r;
  }
  std::vector<double> all() const {
    std::vector<double> r = theorem();
    r.insert(r.end(), norms.begin(), norms.end());
    return r;
  }
  double max_abs() const {
    double m = 0.0;
    for (double x : all()) m = std::max(m, std::abs(x));
    return m;
  }
};

inline Z3Residuals z3_design_residual(const Matrix& seeds) {
  if (seeds.rows() != 3 || seeds.cols() != kZ3SeedCount) {
    throw std::invalid_argument("z3_design_residual needs exactly 8 seeds in R^3");
  }
  Z3Residuals r;
  for (int j = 0; j < kZ3SeedCount; ++j) {
    const double b = seeds(0, j), y = seeds(1, j), z = seeds(2, j);
    const double b2 = b * b, y2 = y * y, z2 = z * z;
    const double py = 3.0 - 3.0 * b2 - 4.0 * y2, pz = 3.0 - 3.0 * b2 - 4.0 * z2;
    for (int k = 1; k <= 4; ++k) r.power_sums[k - 1] += ipow(b, 2 * k) / 8.0;
    for (int k = 1; k <= 3; ++k) {
      r.y_moments[k - 1] += ipow(b, 2 * k - 1) * y * py;
      r.z_moments[k - 1] += ipow(b, 2 * k - 1) * z * pz;
    }
    r.quadratic += b2 * y2 * py * py / 8.0;
    const double m = y * z * (3.0 * z2 - y2) * (3.0 * y2 - z2);
    r.mixed[0] += m;
    r.mixed[1] += b2 * m;
    r.quartic += (y2 * y2 - z2 * z2) * (y2 * y2 - 14.0 * y2 * z2 + z2 * z2);
    r.norms[static_cast<std::size_t>(j)] = b2 + y2 + z2 - 1.0;
  }
  for (int k = 1; k <= 4; ++k) r.power_sums[k - 1] -= 1.0 / (2 * k + 1);
  r.quadratic -= 8.0 / 315.0;
  return r;
}

struct DesignCheck {
  bool is_design = false;
  double f_value = 0.0;
};

/// Potential test with the numerical-zero policy f ≤ tolerance·n² on the
/// trace-normalized configuration.
inline DesignCheck is_design(const Configuration& config, int t, double tolerance = kZeroFactor) {
  const double f = potential(normalize_trace(config), t).f;
  return {f <= tolerance * static_cast<double>(config.size()) * config.size(), f};
}

}  // namespace tdesign
