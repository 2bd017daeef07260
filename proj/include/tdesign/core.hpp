#pragma once

// Core types and the design potential
//
//   f(V) = sum_j sum_k <v_j,v_k>^{2t} - c_t(R^d) (sum_l |v_l|^{2t})^2
//
// which is nonnegative and vanishes exactly on projective spherical
// (t,t)-designs. Everything else in the library builds on this header.

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace tdesign {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Rational = boost::multiprecision::cpp_rational;

enum class NormMode { EqualNorm, Weighted };

inline std::string_view to_string(NormMode mode) {
  return mode == NormMode::EqualNorm ? "equal_norm" : "weighted";
}

inline NormMode parse_norm_mode(std::string_view text) {
  if (text == "equal_norm" || text == "equal-norm" || text == "equal") {
    return NormMode::EqualNorm;
  }
  if (text == "weighted") {
    return NormMode::Weighted;
  }
  throw std::invalid_argument("unknown norm mode '" + std::string(text) +
                              "' (expected equal_norm or weighted)");
}

/// Absolute tolerance on |‖v_j‖ - 1| for equal-norm configurations.
inline constexpr double kUnitNormTolerance = 1e-14;
/// Relative tolerance on trace(VᵀV) = n for normalized weighted configurations.
inline constexpr double kTraceTolerance = 1e-12;
/// A normalized configuration is a numerical design when f <= kZeroFactor * n^2.
inline constexpr double kZeroFactor = 1e-12;

/// x^k for a small nonnegative integer k; 0^0 = 1.
template <typename T>
constexpr T ipow(T x, int k) {
  T result = 1;
  while (k > 0) {
    if (k & 1) result *= x;
    x *= x;
    k >>= 1;
  }
  return result;
}

/// Design vectors v_1..v_n as the columns of a d×n matrix, plus the
/// constraint set they belong to. Immutable once constructed.
class Configuration {
 public:
  Configuration(Matrix entries, NormMode mode, bool normalized = false)
      : entries_(std::move(entries)), mode_(mode), normalized_(normalized) {
    validate();
  }

  const Matrix& entries() const { return entries_; }
  NormMode mode() const { return mode_; }
  /// True when the trace has been scaled to n (always true for EqualNorm).
  bool normalized() const { return normalized_ || mode_ == NormMode::EqualNorm; }
  int dim() const { return static_cast<int>(entries_.rows()); }
  int size() const { return static_cast<int>(entries_.cols()); }
  Eigen::VectorXd column(int j) const { return entries_.col(j); }

  bool operator==(const Configuration& other) const {
    return mode_ == other.mode_ && entries_.rows() == other.entries_.rows() &&
           entries_.cols() == other.entries_.cols() && entries_ == other.entries_;
  }

 private:
  void validate() const {
    if (entries_.rows() < 1 || entries_.cols() < 1) {
      throw std::invalid_argument("configuration needs d >= 1 and n >= 1");
    }
    if (!entries_.allFinite()) {
      throw std::invalid_argument("configuration has non-finite entries");
    }
    for (Eigen::Index j = 0; j < entries_.cols(); ++j) {
      const double norm = entries_.col(j).norm();
      if (norm == 0.0) {
        throw std::invalid_argument("configuration column " + std::to_string(j) +
                                    " is the zero vector");
      }
      if (mode_ == NormMode::EqualNorm && std::abs(norm - 1.0) > kUnitNormTolerance) {
        throw std::invalid_argument("equal-norm configuration column " + std::to_string(j) +
                                    " has norm " + std::to_string(norm));
      }
    }
    if (mode_ == NormMode::Weighted && normalized_) {
      const double n = static_cast<double>(entries_.cols());
      if (std::abs(entries_.squaredNorm() - n) > kTraceTolerance * n) {
        throw std::invalid_argument("configuration flagged normalized but trace != n");
      }
    }
  }

  Matrix entries_;
  NormMode mode_;
  bool normalized_;
};

struct DesignProblem {
  int t = 1;
  int d = 1;
  int n = 1;
  NormMode mode = NormMode::EqualNorm;

  DesignProblem() = default;
  DesignProblem(int t_, int d_, int n_, NormMode mode_) : t(t_), d(d_), n(n_), mode(mode_) {
    if (t < 1 || d < 1 || n < 1) {
      throw std::invalid_argument("design problem needs t, d, n >= 1");
    }
  }
};

struct PotentialValue {
  double f = 0.0;    // lhs - rhs
  double lhs = 0.0;  // double power sum over all ordered pairs, diagonal included
  double rhs = 0.0;  // Welch bound term
};

/// c_t(R^d) = prod_{j<t} (2j+1)/(d+2j), exact.
inline Rational design_constant(int t, int d) {
  if (t < 1 || d < 1) throw std::invalid_argument("design_constant needs t, d >= 1");
  Rational c = 1;
  for (int j = 0; j < t; ++j) c *= Rational(2 * j + 1, d + 2 * j);
  return c;
}

inline double design_constant_value(int t, int d) {
  return design_constant(t, d).convert_to<double>();
}

inline Matrix gram_matrix(const Configuration& config) {
  return config.entries().transpose() * config.entries();
}

namespace kernel {

// Raw-matrix versions used by the optimizer; no Configuration validation.

template <typename Real>
Real design_constant_as(int t, int d) {
  Real c = 1;
  for (int j = 0; j < t; ++j) c = c * Real(2 * j + 1) / Real(d + 2 * j);
  return c;
}

template <typename Real>
struct PotentialTerms {
  Real lhs;
  Real rhs;
};

template <typename Real>
PotentialTerms<Real> potential_terms(const Matrix& V, int t) {
  const Eigen::Index n = V.cols();
  const int two_t = 2 * t;
  Real lhs = 0;
  Real norm_sum = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    Real rj = 0;
    for (Eigen::Index i = 0; i < V.rows(); ++i) rj += Real(V(i, j)) * Real(V(i, j));
    lhs += ipow(rj, two_t);
    norm_sum += ipow(rj, t);
    for (Eigen::Index k = j + 1; k < n; ++k) {
      Real g = 0;
      for (Eigen::Index i = 0; i < V.rows(); ++i) g += Real(V(i, j)) * Real(V(i, k));
      lhs += Real(2) * ipow(g, two_t);
    }
  }
  const Real c = design_constant_as<Real>(t, static_cast<int>(V.rows()));
  return {lhs, c * norm_sum * norm_sum};
}

/// f, lhs and rhs. Sums run in long double; when f falls into the cancellation
/// regime (|f| below ~1e-9 lhs) it is recomputed in binary128 so that values
/// near a design stay meaningful down to ~1e-30 lhs.
inline PotentialValue potential(const Matrix& V, int t) {
  const auto ext = potential_terms<long double>(V, t);
  long double f = ext.lhs - ext.rhs;
  if (std::abs(f) <= 1e-9L * ext.lhs) {
    const auto quad = potential_terms<__float128>(V, t);
    f = static_cast<long double>(quad.lhs - quad.rhs);
  }
  return {static_cast<double>(f), static_cast<double>(ext.lhs), static_cast<double>(ext.rhs)};
}

/// ∂f/∂v_i = 4t Σ_k g_ik^{2t-1} v_k - 4t c S |v_i|^{2t-2} v_i,  S = Σ_l |v_l|^{2t}.
inline Matrix potential_gradient(const Matrix& V, int t) {
  const Matrix G = V.transpose() * V;
  const Matrix Gp = G.unaryExpr([t](double g) { return ipow(g, 2 * t - 1); });
  const Vector r = V.colwise().squaredNorm().transpose();
  const Vector q = r.unaryExpr([t](double x) { return ipow(x, t - 1); });
  const double S = r.unaryExpr([t](double x) { return ipow(x, t); }).sum();
  const double c = design_constant_value(t, static_cast<int>(V.rows()));
  Matrix grad = V * Gp;
  grad -= c * S * (V * q.asDiagonal());
  return 4.0 * t * grad;
}

/// Euclidean Hessian of f applied to the direction W.
inline Matrix potential_hessian_vector(const Matrix& V, int t, const Matrix& W) {
  const Matrix G = V.transpose() * V;
  const Matrix Gp1 = G.unaryExpr([t](double g) { return ipow(g, 2 * t - 1); });
  const Matrix Gp2 = G.unaryExpr([t](double g) { return ipow(g, 2 * t - 2); });
  const Matrix WV = W.transpose() * V;
  const Matrix dG = WV + WV.transpose();

  Matrix out = W * Gp1 + (2.0 * t - 1.0) * (V * Gp2.cwiseProduct(dG));

  const Vector r = V.colwise().squaredNorm().transpose();
  const Vector vw = V.cwiseProduct(W).colwise().sum().transpose();  // <v_i, w_i>
  const Vector q = r.unaryExpr([t](double x) { return ipow(x, t - 1); });
  Vector dq = Vector::Zero(r.size());
  if (t >= 2) {
    dq = 2.0 * (t - 1) * r.unaryExpr([t](double x) { return ipow(x, t - 2); }).cwiseProduct(vw);
  }
  const double S = r.unaryExpr([t](double x) { return ipow(x, t); }).sum();
  const double dS = 2.0 * t * q.dot(vw);
  const double c = design_constant_value(t, static_cast<int>(V.rows()));

  out -= c * (dS * (V * q.asDiagonal()) + S * (V * dq.asDiagonal()) + S * (W * q.asDiagonal()));
  return 4.0 * t * out;
}

inline Matrix normalize_trace(const Matrix& V) {
  const double trace = V.squaredNorm();
  if (trace == 0.0) throw std::invalid_argument("cannot normalize an all-zero configuration");
  return V * std::sqrt(static_cast<double>(V.cols()) / trace);
}

}  // namespace kernel

inline PotentialValue potential(const Configuration& config, int t) {
  if (t < 1) throw std::invalid_argument("potential needs t >= 1");
  return kernel::potential(config.entries(), t);
}

inline Matrix potential_gradient(const Configuration& config, int t) {
  if (t < 1) throw std::invalid_argument("potential_gradient needs t >= 1");
  return kernel::potential_gradient(config.entries(), t);
}

/// Scales V so that Σ‖v_j‖² = n. Idempotent up to roundoff.
inline Configuration normalize_trace(const Configuration& config) {
  if (config.mode() == NormMode::EqualNorm) return config;
  const double trace = config.entries().squaredNorm();
  const double n = static_cast<double>(config.size());
  if (std::abs(trace - n) <= 1e-15 * n) {
    return Configuration(config.entries(), NormMode::Weighted, true);
  }
  return Configuration(kernel::normalize_trace(config.entries()), NormMode::Weighted, true);
}

/// m seeded standard-Gaussian directions in R^d, normalized to unit length.
inline Matrix random_unit_vectors(int d, int m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  Matrix X(d, m);
  for (int j = 0; j < m; ++j) {
    do {
      for (int i = 0; i < d; ++i) X(i, j) = gauss(rng);
    } while (X.col(j).norm() == 0.0);
    X.col(j).normalize();
  }
  return X;
}

inline constexpr std::uint64_t kDefaultProbeSeed = 20220101;
inline constexpr int kDefaultProbeCount = 100;

/// Max over probes x of the relative defect in the Bessel identity
///   Σ_j <x,v_j>^{2t} = c_t (Σ_l ‖v_l‖^{2t}) ‖x‖^{2t}.
inline double bessel_residual(const Configuration& config, int t, const Matrix& probes) {
  if (probes.cols() == 0) throw std::invalid_argument("bessel_residual needs at least one probe");
  if (probes.rows() != config.dim()) throw std::invalid_argument("probe dimension mismatch");
  const Matrix& V = config.entries();
  const Vector r = V.colwise().squaredNorm().transpose();
  const double S = r.unaryExpr([t](double x) { return ipow(x, t); }).sum();
  const double c = design_constant_value(t, config.dim());
  double worst = 0.0;
  for (Eigen::Index p = 0; p < probes.cols(); ++p) {
    const double xx = probes.col(p).squaredNorm();
    if (xx == 0.0) throw std::invalid_argument("bessel_residual probe is the zero vector");
    const Vector ip = V.transpose() * probes.col(p);
    long double sum = 0.0L;
    for (Eigen::Index j = 0; j < ip.size(); ++j) sum += ipow(static_cast<long double>(ip(j)), 2 * t);
    const double expected = c * S * ipow(xx, t);
    worst = std::max(worst, static_cast<double>(std::abs(sum - expected) / expected));
  }
  return worst;
}

inline double bessel_residual(const Configuration& config, int t) {
  return bessel_residual(config, t,
                         random_unit_vectors(config.dim(), kDefaultProbeCount, kDefaultProbeSeed));
}

inline std::int64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::int64_t result = 1;
  for (int i = 1; i <= k; ++i) result = result * (n - k + i) / i;
  return result;
}

struct SizeBounds {
  std::int64_t lower;  // dim Hom(t)
  std::int64_t upper;  // dim Hom(2t)
};

/// dim Hom(t) <= n_w <= n_e <= dim Hom(2t) on R^d.
inline SizeBounds n_bounds(int t, int d) {
  if (t < 1 || d < 1) throw std::invalid_argument("n_bounds needs t, d >= 1");
  return {binomial(t + d - 1, t), binomial(2 * t + d - 1, 2 * t)};
}

/// Numerical-zero policy on the trace-normalized configuration.
inline double zero_threshold(int n, double factor = kZeroFactor) {
  return factor * static_cast<double>(n) * static_cast<double>(n);
}

}  // namespace tdesign
