#pragma once

// Structure discovery on designs: repeated angles and norms, per-vector
// incidence, m-product fingerprints, and recovery of the Mercedes-Benz
// parameters of a 12-point (2,2)-design for R⁴.

#include "tdesign/constructions.hpp"
#include "tdesign/core.hpp"
#include "tdesign/verify.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

namespace tdesign {

struct Cluster {
  double representative = 0.0;  // cluster mean
  int multiplicity = 0;
};

struct AngleProfile {
  std::vector<Cluster> clusters;  // increasing representatives
  double cluster_tolerance = 0.0;

  int total() const {
    int s = 0;
    for (const auto& c : clusters) s += c.multiplicity;
    return s;
  }
};

inline constexpr double kClusterTolerance = 1e-6;

/// Single-linkage clustering on the line: sorted values split wherever the
/// gap to the next value exceeds `tolerance`.
inline std::vector<Cluster> cluster_values(std::vector<double> values, double tolerance) {
  if (!(tolerance > 0.0)) throw std::invalid_argument("cluster tolerance must be positive");
  std::sort(values.begin(), values.end());
  std::vector<Cluster> out;
  std::size_t start = 0;
  for (std::size_t i = 1; i <= values.size(); ++i) {
    if (i == values.size() || values[i] - values[i - 1] > tolerance) {
      double sum = 0.0;
      for (std::size_t k = start; k < i; ++k) sum += values[k];
      out.push_back({sum / static_cast<double>(i - start), static_cast<int>(i - start)});
      start = i;
    }
  }
  return out;
}

namespace detail {

inline Matrix unit_columns(const Configuration& config) {
  Matrix U = config.entries();
  U.colwise().normalize();
  return U;
}

}  // namespace detail

/// Clusters the n(n-1)/2 squared angles |⟨u_j,u_k⟩|² between the lines
/// (columns are normalized first, so weights do not enter).
inline AngleProfile angle_profile(const Configuration& config, double cluster_tolerance = kClusterTolerance) {
  const Matrix U = detail::unit_columns(config);
  const Matrix G = U.transpose() * U;
  std::vector<double> sq;
  sq.reserve(static_cast<std::size_t>(config.size()) * (config.size() - 1) / 2);
  for (int j = 0; j < config.size(); ++j) {
    for (int k = j + 1; k < config.size(); ++k) sq.push_back(G(j, k) * G(j, k));
  }
  return {cluster_values(std::move(sq), cluster_tolerance), cluster_tolerance};
}

/// For each line j, the number of k ≠ j with ||⟨u_j,u_k⟩|² − target| ≤ tolerance.
inline std::vector<int> per_vector_angle_incidence(const Configuration& config, double target_squared_angle,
                                                   double tolerance = kClusterTolerance) {
  if (!(tolerance > 0.0)) throw std::invalid_argument("incidence tolerance must be positive");
  const Matrix U = detail::unit_columns(config);
  const Matrix G = U.transpose() * U;
  std::vector<int> counts(static_cast<std::size_t>(config.size()), 0);
  for (int j = 0; j < config.size(); ++j) {
    for (int k = 0; k < config.size(); ++k) {
      if (k != j && std::abs(G(j, k) * G(j, k) - target_squared_angle) <= tolerance) {
        ++counts[static_cast<std::size_t>(j)];
      }
    }
  }
  return counts;
}

inline std::vector<Cluster> norm_profile(const Configuration& config, double cluster_tolerance = kClusterTolerance) {
  std::vector<double> norms;
  for (int j = 0; j < config.size(); ++j) norms.push_back(config.entries().col(j).norm());
  return cluster_values(std::move(norms), cluster_tolerance);
}

// ---------------------------------------------------------------------------
// m-products Δ(v_1..v_m) = ⟨v_1,v_2⟩⟨v_2,v_3⟩⋯⟨v_m,v_1⟩

struct MProductFingerprint {
  int m = 2;
  double quantum = 1e-8;
  std::vector<std::int64_t> values;  // sorted, in units of quantum

  /// Elementwise comparison of the sorted multisets, allowing `slack` grid
  /// steps for values that straddle a rounding boundary.
  bool matches(const MProductFingerprint& other, std::int64_t slack = 1) const {
    if (m != other.m || quantum != other.quantum || values.size() != other.values.size()) return false;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (std::abs(values[i] - other.values[i]) > slack) return false;
    }
    return true;
  }
  bool operator==(const MProductFingerprint&) const = default;
};

/// m = 2: unordered pairs j<k. m = 3: index sets j<k<l (Δ is invariant under
/// rotation and reversal of the cycle, so one value per set).
inline MProductFingerprint m_product_fingerprint(const Configuration& config, int m, double quantum = 1e-8) {
  if (m != 2 && m != 3) throw std::invalid_argument("m_product_fingerprint supports m = 2 or 3");
  if (!(quantum > 0.0)) throw std::invalid_argument("fingerprint quantum must be positive");
  const Matrix G = gram_matrix(config);
  const int n = config.size();
  MProductFingerprint fp{m, quantum, {}};
  auto push = [&](double x) { fp.values.push_back(std::llround(x / quantum)); };
  for (int j = 0; j < n; ++j) {
    for (int k = j + 1; k < n; ++k) {
      if (m == 2) {
        push(G(j, k) * G(j, k));
      } else {
        for (int l = k + 1; l < n; ++l) push(G(j, k) * G(k, l) * G(l, j));
      }
    }
  }
  std::sort(fp.values.begin(), fp.values.end());
  return fp;
}

// ---------------------------------------------------------------------------
// Membership in the 12-point family

namespace detail {

inline constexpr double kFamilyTolerance = 1e-6;

// Exact covers of {0..11} by four of the candidate triples.
inline void triple_covers(const std::vector<std::array<int, 3>>& triples, std::vector<int>& chosen,
                          unsigned used, std::vector<std::vector<int>>& out) {
  if (used == (1u << 12) - 1) {
    out.push_back(chosen);
    return;
  }
  int first = 0;
  while (used & (1u << first)) ++first;
  for (std::size_t i = 0; i < triples.size(); ++i) {
    const auto& tr = triples[i];
    if (tr[0] != first) continue;  // triples are sorted, so tr[0] is the smallest index
    const unsigned mask = (1u << tr[0]) | (1u << tr[1]) | (1u << tr[2]);
    if (used & mask) continue;
    chosen.push_back(static_cast<int>(i));
    triple_covers(triples, chosen, used | mask, out);
    chosen.pop_back();
  }
}

// Orthogonal U with U P_j Uᵀ = Q_j for all j, if one exists.
inline std::optional<Matrix> align_planes(const std::vector<Matrix>& P, const std::vector<Matrix>& Q) {
  const int d = static_cast<int>(P.front().rows());
  const int unknowns = d * d;
  Matrix L = Matrix::Zero(static_cast<Eigen::Index>(P.size()) * unknowns, unknowns);
  // vec(A P − Q A) = (Pᵀ ⊗ I − I ⊗ Q) vec(A), column-major vec.
  const Matrix I = Matrix::Identity(d, d);
  for (std::size_t j = 0; j < P.size(); ++j) {
    for (int a = 0; a < d; ++a) {
      for (int b = 0; b < d; ++b) {
        L.block(static_cast<Eigen::Index>(j) * unknowns + a * d, b * d, d, d) += P[j](b, a) * I;
        L.block(static_cast<Eigen::Index>(j) * unknowns + a * d, a * d, d, d) -= (a == b ? 1.0 : 0.0) * Q[j];
      }
    }
  }
  Eigen::JacobiSVD<Matrix> svd(L, Eigen::ComputeFullV);
  const Vector x = svd.matrixV().col(unknowns - 1);
  const Matrix A = Eigen::Map<const Matrix>(x.data(), d, d);
  Eigen::JacobiSVD<Matrix> polar(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (polar.singularValues().minCoeff() < 1e-3 * polar.singularValues().maxCoeff()) return std::nullopt;
  const Matrix U = polar.matrixU() * polar.matrixV().transpose();
  for (std::size_t j = 0; j < P.size(); ++j) {
    if ((U * P[j] * U.transpose() - Q[j]).cwiseAbs().maxCoeff() > kFamilyTolerance) return std::nullopt;
  }
  return U;
}

}  // namespace detail

/// Recovers θ with twelve_point_design(θ) projectively equivalent to `config`:
/// four triples of mutual angle 1/2 with triple product −1/8 span four
/// equi-isoclinic planes, which an orthogonal map carries onto the canonical
/// ones, and each triple then reads off its rotation angle. Returns nullopt
/// when any step's residual exceeds 1e-6.
inline std::optional<MercedesAngles> match_to_family(const Configuration& config) {
  if (config.dim() != 4 || config.size() != 12 || config.mode() != NormMode::EqualNorm) {
    throw std::invalid_argument("match_to_family needs a 4x12 equal-norm configuration");
  }
  const double f = potential(config, 2).f;
  if (f > 1e-10 * 144.0) {
    throw std::invalid_argument("match_to_family needs a (2,2)-design; f = " + std::to_string(f));
  }
  const Matrix& V = config.entries();
  const Matrix G = V.transpose() * V;
  constexpr double tol = detail::kFamilyTolerance;

  std::vector<std::array<int, 3>> triples;
  for (int i = 0; i < 12; ++i) {
    for (int j = i + 1; j < 12; ++j) {
      if (std::abs(G(i, j) * G(i, j) - 0.25) > tol) continue;
      for (int k = j + 1; k < 12; ++k) {
        if (std::abs(G(j, k) * G(j, k) - 0.25) > tol || std::abs(G(i, k) * G(i, k) - 0.25) > tol) continue;
        if (std::abs(G(i, j) * G(j, k) * G(k, i) + 0.125) > tol) continue;
        triples.push_back({i, j, k});
      }
    }
  }
  std::vector<std::vector<int>> covers;
  std::vector<int> chosen;
  detail::triple_covers(triples, chosen, 0u, covers);

  const auto canonical = equiisoclinic_planes_R4();
  std::vector<Matrix> Q;
  for (const auto& b : canonical) Q.push_back(b.projector());

  for (const auto& cover : covers) {
    std::vector<Matrix> P;
    std::vector<SubspaceBasis> planes;
    bool planar = true;
    for (int idx : cover) {
      const auto& tr = triples[static_cast<std::size_t>(idx)];
      Eigen::Matrix4d S = Eigen::Matrix4d::Zero();
      for (int c : tr) S += V.col(c) * V.col(c).transpose();
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(S);
      // Eigenvalues ascending: a planar triple has two zero eigenvalues.
      if (es.eigenvalues()(1) > tol) {
        planar = false;
        break;
      }
      Matrix W = es.eigenvectors().rightCols(2);
      planes.emplace_back(W);
      P.push_back(W * W.transpose());
    }
    if (!planar || equiisoclinic_residual(planes, 1.0 / 3.0) > tol) continue;

    std::array<int, 4> perm{0, 1, 2, 3};
    do {
      std::vector<Matrix> Qp;
      for (int p : perm) Qp.push_back(Q[static_cast<std::size_t>(p)]);
      const std::optional<Matrix> U = detail::align_planes(P, Qp);
      if (!U) continue;
      MercedesAngles angles;
      for (int j = 0; j < 4; ++j) {
        const auto& tr = triples[static_cast<std::size_t>(cover[static_cast<std::size_t>(j)])];
        const Vector w = canonical[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])].columns().transpose() *
                         (*U * V.col(tr[0]));
        angles.theta[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])] = std::atan2(w(1), w(0));
      }
      // Every mapped vector must be (up to sign) a vector of the regenerated design.
      const Matrix R = twelve_point_design(angles).entries();
      const Matrix mapped = *U * V;
      bool ok = true;
      for (int c = 0; c < 12 && ok; ++c) {
        double best = 1.0;
        for (int r = 0; r < 12; ++r) best = std::min(best, 1.0 - std::abs(mapped.col(c).dot(R.col(r))));
        ok = best <= tol;
      }
      if (ok) return angles;
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  return std::nullopt;
}

}  // namespace tdesign
