#pragma once

// Minimization of the design potential.
//
// Equal-norm problems live on the oblique manifold (product of unit spheres,
// one per column); weighted problems live on R^{d×n} with the penalty
// (‖v_1‖² - 1)² pinning the scale. Both are solved with a Riemannian
// trust-region method whose subproblems are handled by truncated conjugate
// gradients (Steihaug-Toint).

#include "tdesign/core.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <thread>
#include <vector>

namespace tdesign {

enum class Convergence { ZeroFound, GradientSmall, IterationCap };

inline std::string_view to_string(Convergence c) {
  switch (c) {
    case Convergence::ZeroFound: return "zero_found";
    case Convergence::GradientSmall: return "gradient_small";
    case Convergence::IterationCap: return "iteration_cap";
  }
  return "unknown";
}

struct SolverOptions {
  int max_iterations = 2000;
  double gradient_tolerance = 1e-10;
  /// Absolute early-stop level for the objective; unset means 1e-14·n².
  std::optional<double> zero_threshold;
  /// Maximum trust radius as a fraction of the domain's typical distance.
  double initial_trust_radius_factor = 0.1;
  std::uint64_t seed = 0;
  /// Extra trust-region steps taken after the objective first drops below
  /// zero_threshold; they sharpen the design to near machine precision.
  int polish_iterations = 20;

  void validate() const {
    if (max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
    if (!(gradient_tolerance > 0)) throw std::invalid_argument("gradient_tolerance must be > 0");
    if (zero_threshold && !(*zero_threshold > 0)) {
      throw std::invalid_argument("zero_threshold must be > 0");
    }
    if (!(initial_trust_radius_factor > 0 && initial_trust_radius_factor <= 1)) {
      throw std::invalid_argument("initial_trust_radius_factor must lie in (0, 1]");
    }
    if (polish_iterations < 0) throw std::invalid_argument("polish_iterations must be >= 0");
  }

  double zero_threshold_for(int n) const {
    return zero_threshold.value_or(1e-14 * static_cast<double>(n) * n);
  }
};

struct SolveResult {
  Configuration config;  // trace-normalized in weighted mode
  double f_value = 0.0;
  int iterations = 0;
  Convergence converged = Convergence::IterationCap;
  std::uint64_t seed = 0;
  /// Objective value after every accepted step, starting with the initial point.
  std::vector<double> objective_history;
};

// ---------------------------------------------------------------------------
// Domains

struct ObliqueDomain {
  static Matrix project(const Matrix& x, const Matrix& g) {
    const Eigen::RowVectorXd ip = x.cwiseProduct(g).colwise().sum();
    return g - x * ip.asDiagonal();
  }

  /// Columnwise (x_i + s_i)/‖x_i + s_i‖; nullopt when some column vanishes.
  static std::optional<Matrix> retract(const Matrix& x, const Matrix& step) {
    Matrix y = x + step;
    for (Eigen::Index j = 0; j < y.cols(); ++j) {
      const double norm = y.col(j).norm();
      if (!(norm > 0) || !std::isfinite(norm)) return std::nullopt;
      y.col(j) /= norm;
    }
    return y;
  }

  static Matrix hessian(const Matrix& x, const Matrix& egrad, const Matrix& ehess_eta,
                        const Matrix& eta) {
    const Eigen::RowVectorXd radial = x.cwiseProduct(egrad).colwise().sum();
    return project(x, ehess_eta) - eta * radial.asDiagonal();
  }

  static double typical_distance(Eigen::Index, Eigen::Index n) {
    return std::numbers::pi * std::sqrt(static_cast<double>(n));
  }
};

struct EuclideanDomain {
  static Matrix project(const Matrix&, const Matrix& g) { return g; }

  static std::optional<Matrix> retract(const Matrix& x, const Matrix& step) {
    Matrix y = x + step;
    if (!y.allFinite()) return std::nullopt;
    return y;
  }

  static Matrix hessian(const Matrix&, const Matrix&, const Matrix& ehess_eta, const Matrix&) {
    return ehess_eta;
  }

  static double typical_distance(Eigen::Index d, Eigen::Index n) {
    return std::sqrt(static_cast<double>(d * n));
  }
};

// ---------------------------------------------------------------------------
// Generic trust-region driver

struct TrustRegionOutcome {
  Matrix x;
  double cost = 0.0;
  int iterations = 0;
  Convergence converged = Convergence::IterationCap;
  std::vector<double> history;
};

namespace detail {

inline double inner(const Matrix& a, const Matrix& b) { return a.cwiseProduct(b).sum(); }

struct TcgStep {
  Matrix eta;
  Matrix Heta;
  bool hit_boundary = false;
};

template <typename Domain, typename HessFn>
TcgStep truncated_cg(const Matrix& x, const Matrix& grad, double radius, HessFn&& hess,
                     int max_inner) {
  constexpr double kappa = 0.1;
  constexpr double theta = 1.0;
  TcgStep out{Matrix::Zero(grad.rows(), grad.cols()), Matrix::Zero(grad.rows(), grad.cols())};
  Matrix r = grad;
  double r_r = inner(r, r);
  const double norm_r0 = std::sqrt(r_r);
  Matrix p = -r;
  double e_Pe = 0.0;
  for (int j = 0; j < max_inner; ++j) {
    const Matrix Hp = hess(p);
    const double d_Hd = inner(p, Hp);
    const double e_Pd = inner(out.eta, p);
    const double d_Pd = inner(p, p);
    const double alpha = r_r / d_Hd;
    const double new_e_Pe = e_Pe + 2.0 * alpha * e_Pd + alpha * alpha * d_Pd;
    if (!(d_Hd > 0) || new_e_Pe >= radius * radius) {
      const double tau =
          (-e_Pd + std::sqrt(e_Pd * e_Pd + d_Pd * (radius * radius - e_Pe))) / d_Pd;
      out.eta += tau * p;
      out.Heta += tau * Hp;
      out.hit_boundary = true;
      break;
    }
    out.eta += alpha * p;
    out.Heta += alpha * Hp;
    e_Pe = new_e_Pe;
    r = Domain::project(x, r + alpha * Hp);
    const double r_r_new = inner(r, r);
    const double norm_r = std::sqrt(r_r_new);
    if (norm_r <= norm_r0 * std::min(std::pow(norm_r0, theta), kappa)) break;
    const double beta = r_r_new / r_r;
    r_r = r_r_new;
    p = Domain::project(x, -r + beta * p);
  }
  return out;
}

}  // namespace detail

/// Minimizes a smooth cost over `Domain` starting at x0. `cost` must provide
///   double value(const Matrix&), Matrix gradient(const Matrix&) (Euclidean),
///   Matrix hessian(const Matrix& x, const Matrix& w) (Euclidean Hessian · w).
/// The accepted objective sequence is non-increasing.
template <typename Domain, typename Cost>
TrustRegionOutcome trust_region(const Cost& cost, Matrix x0, const SolverOptions& options,
                                double zero_level) {
  options.validate();
  const double max_radius =
      Domain::typical_distance(x0.rows(), x0.cols()) * options.initial_trust_radius_factor;
  double radius = max_radius / 8.0;
  const int max_inner = static_cast<int>(x0.size());
  constexpr double rho_prime = 0.1;
  const double eps = std::numeric_limits<double>::epsilon();

  TrustRegionOutcome out;
  out.x = std::move(x0);
  out.cost = cost.value(out.x);
  out.history.push_back(out.cost);
  Matrix egrad = cost.gradient(out.x);
  Matrix grad = Domain::project(out.x, egrad);

  bool zero_reached = false;
  int polish_steps = 0;
  auto stop = [&](Convergence fallback) {
    out.converged = zero_reached ? Convergence::ZeroFound : fallback;
    return out;
  };

  for (int iter = 0;; ++iter) {
    if (out.cost < zero_level) zero_reached = true;
    if (zero_reached && polish_steps >= options.polish_iterations) return stop(Convergence::ZeroFound);
    if (std::sqrt(detail::inner(grad, grad)) < options.gradient_tolerance) {
      return stop(Convergence::GradientSmall);
    }
    if (iter >= options.max_iterations) return stop(Convergence::IterationCap);
    out.iterations = iter + 1;

    auto hess = [&](const Matrix& eta) {
      return Domain::hessian(out.x, egrad, cost.hessian(out.x, eta), eta);
    };
    detail::TcgStep step = detail::truncated_cg<Domain>(out.x, grad, radius, hess, max_inner);

    const double model_decrease =
        -(detail::inner(grad, step.eta) + 0.5 * detail::inner(step.eta, step.Heta));
    const std::optional<Matrix> proposal = Domain::retract(out.x, step.eta);
    double proposal_cost = std::numeric_limits<double>::infinity();
    if (proposal) proposal_cost = cost.value(*proposal);

    // Costs are evaluated in extended precision, so the regularization scales
    // with |f| rather than with max(1, |f|).
    const double reg = 1e3 * eps * std::abs(out.cost);
    const double rho = (out.cost - proposal_cost + reg) / (model_decrease + reg);

    if (!std::isfinite(rho) || rho < 0.25 || !(proposal_cost <= out.cost)) {
      radius /= 4.0;
    } else if (rho > 0.75 && step.hit_boundary) {
      radius = std::min(2.0 * radius, max_radius);
    }

    const bool accept =
        proposal && std::isfinite(rho) && rho > rho_prime && proposal_cost <= out.cost;
    if (accept) {
      out.x = *proposal;
      out.cost = proposal_cost;
      out.history.push_back(out.cost);
      egrad = cost.gradient(out.x);
      grad = Domain::project(out.x, egrad);
    }
    if (zero_reached) ++polish_steps;
    // Radius collapse: no representable step improves the cost any more.
    if (radius < 1e-14 * max_radius) return stop(Convergence::GradientSmall);
  }
}

// ---------------------------------------------------------------------------
// Design-potential objectives

namespace detail {

struct EqualNormCost {
  int t;
  double value(const Matrix& x) const { return kernel::potential(x, t).f; }
  Matrix gradient(const Matrix& x) const { return kernel::potential_gradient(x, t); }
  Matrix hessian(const Matrix& x, const Matrix& w) const {
    return kernel::potential_hessian_vector(x, t, w);
  }
};

struct WeightedCost {
  int t;
  double value(const Matrix& x) const {
    const double pen = x.col(0).squaredNorm() - 1.0;
    return kernel::potential(x, t).f + pen * pen;
  }
  Matrix gradient(const Matrix& x) const {
    Matrix g = kernel::potential_gradient(x, t);
    g.col(0) += 4.0 * (x.col(0).squaredNorm() - 1.0) * x.col(0);
    return g;
  }
  Matrix hessian(const Matrix& x, const Matrix& w) const {
    Matrix h = kernel::potential_hessian_vector(x, t, w);
    h.col(0) += 4.0 * (x.col(0).squaredNorm() - 1.0) * w.col(0) +
                8.0 * x.col(0).dot(w.col(0)) * x.col(0);
    return h;
  }
};

}  // namespace detail

/// Columns drawn i.i.d. from the standard Gaussian; deterministic in seed.
inline Configuration random_configuration(int d, int n, NormMode mode, std::uint64_t seed) {
  if (d < 1 || n < 1) throw std::invalid_argument("random_configuration needs d, n >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  Matrix V(d, n);
  for (int j = 0; j < n; ++j) {
    do {
      for (int i = 0; i < d; ++i) V(i, j) = gauss(rng);
    } while (V.col(j).norm() == 0.0);
  }
  if (mode == NormMode::EqualNorm) {
    V.colwise().normalize();
    return Configuration(V, mode);
  }
  return Configuration(kernel::normalize_trace(V), mode, true);
}

/// Tangent projection g_i - <g_i, v_i> v_i on the sphere product.
inline Matrix riemannian_gradient(const Configuration& config, const Matrix& euclidean_grad) {
  if (config.mode() != NormMode::EqualNorm) {
    throw std::invalid_argument("riemannian_gradient needs an equal-norm configuration");
  }
  if (euclidean_grad.rows() != config.dim() || euclidean_grad.cols() != config.size()) {
    throw std::invalid_argument("gradient shape mismatch");
  }
  return ObliqueDomain::project(config.entries(), euclidean_grad);
}

inline Configuration retract(const Configuration& config, const Matrix& step) {
  if (config.mode() != NormMode::EqualNorm) {
    throw std::invalid_argument("retract needs an equal-norm configuration");
  }
  if (step.rows() != config.dim() || step.cols() != config.size()) {
    throw std::invalid_argument("step shape mismatch");
  }
  auto y = ObliqueDomain::retract(config.entries(), step);
  if (!y) throw std::domain_error("degenerate retraction step: v_i + s_i = 0");
  return Configuration(*y, NormMode::EqualNorm);
}

struct ObjectiveValue {
  double value;
  Matrix gradient;
};

/// f(V) + (‖v_1‖² - 1)² and its Euclidean gradient.
inline ObjectiveValue weighted_objective(const Configuration& config, int t) {
  detail::WeightedCost cost{t};
  return {cost.value(config.entries()), cost.gradient(config.entries())};
}

inline SolveResult minimize(const DesignProblem& problem, const Configuration& start,
                            SolverOptions options) {
  options.validate();
  if (start.dim() != problem.d || start.size() != problem.n || start.mode() != problem.mode) {
    throw std::invalid_argument("start configuration does not match the problem (d, n, mode)");
  }
  const double zero_level = options.zero_threshold_for(problem.n);
  SolveResult result{start, 0.0, 0, Convergence::IterationCap, options.seed, {}};
  TrustRegionOutcome outcome;
  if (problem.mode == NormMode::EqualNorm) {
    outcome = trust_region<ObliqueDomain>(detail::EqualNormCost{problem.t}, start.entries(),
                                          options, zero_level);
    result.config = Configuration(outcome.x, NormMode::EqualNorm);
  } else {
    // The penalty keeps ‖v_1‖ near one, so the trace of V stays near n and the
    // early-stop level is comparable with the normalized one.
    outcome = trust_region<EuclideanDomain>(detail::WeightedCost{problem.t}, start.entries(),
                                            options, zero_level);
    result.config = normalize_trace(Configuration(outcome.x, NormMode::Weighted));
  }
  result.f_value = potential(result.config, problem.t).f;
  result.iterations = outcome.iterations;
  result.converged = outcome.converged;
  result.objective_history = std::move(outcome.history);
  return result;
}

struct MultiStartResult {
  SolveResult best;
  std::vector<SolveResult> all;  // ordered by seed
};

/// `restarts` independent minimizations with seeds seed+0 .. seed+restarts-1.
/// Output does not depend on `threads`.
inline MultiStartResult multi_start(const DesignProblem& problem, int restarts,
                                    const SolverOptions& options, int threads = 1) {
  if (restarts < 1) throw std::invalid_argument("multi_start needs restarts >= 1");
  options.validate();
  std::vector<std::optional<SolveResult>> slots(static_cast<std::size_t>(restarts));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < restarts; i = next++) {
      SolverOptions opts = options;
      opts.seed = options.seed + static_cast<std::uint64_t>(i);
      const Configuration start = random_configuration(problem.d, problem.n, problem.mode, opts.seed);
      slots[static_cast<std::size_t>(i)] = minimize(problem, start, opts);
    }
  };
  const int pool = std::clamp(threads, 1, restarts);
  if (pool == 1) {
    worker();
  } else {
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(pool));
    for (int k = 0; k < pool; ++k) workers.emplace_back(worker);
    for (auto& w : workers) w.join();
  }

  std::vector<SolveResult> all;
  all.reserve(slots.size());
  for (auto& s : slots) all.push_back(std::move(*s));
  std::size_t best = 0;
  for (std::size_t i = 1; i < all.size(); ++i) {
    if (all[i].f_value < all[best].f_value ||
        (all[i].f_value == all[best].f_value && all[i].seed < all[best].seed)) {
      best = i;
    }
  }
  return {all[best], std::move(all)};
}

}  // namespace tdesign
