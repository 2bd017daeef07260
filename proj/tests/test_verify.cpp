#include "oracles.hpp"

#include "tdesign/constructions.hpp"
#include "tdesign/manifold_opt.hpp"
#include "tdesign/verify.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace tdesign;

namespace {

Rational multinomial(int k, const std::vector<int>& alpha) {
  Rational r = 1;
  int left = k;
  for (int a : alpha) {
    for (int i = 0; i < a; ++i) r = r * (left - i) / (i + 1);
    left -= a;
  }
  return r;
}

}  // namespace

TEST(SphereMonomialIntegral, Examples) {
  EXPECT_EQ(sphere_monomial_integral(MultiIndex({2, 0, 0}), 3), Rational(1, 3));
  EXPECT_EQ(sphere_monomial_integral(MultiIndex({8, 0, 0}), 3), Rational(1, 9));
  for (int k = 1; k <= 6; ++k) {
    EXPECT_EQ(sphere_monomial_integral(MultiIndex({2 * k, 0, 0}), 3), Rational(1, 2 * k + 1));
  }
  EXPECT_EQ(sphere_monomial_integral(MultiIndex({1, 1}), 2), Rational(0));
  // On the circle, the mean of cos⁴ is 3/8.
  EXPECT_EQ(sphere_monomial_integral(MultiIndex({4, 0}), 2), Rational(3, 8));
  EXPECT_THROW(sphere_monomial_integral(MultiIndex({2, 0}), 3), std::invalid_argument);
  EXPECT_THROW(MultiIndex({-1, 2}), std::invalid_argument);
}

TEST(SphereMonomialIntegral, ExpansionOfOneSumsToOne) {
  for (int d = 1; d <= 5; ++d) {
    for (int t = 1; t <= 4; ++t) {
      Rational total = 0;
      for (const MultiIndex& a : monomials_of_degree(d, 2 * t)) {
        // (Σx²)^t = Σ_{|β|=t} multinomial(t, β) x^{2β}
        bool even = true;
        std::vector<int> half;
        for (int e : a.alpha) {
          even = even && e % 2 == 0;
          half.push_back(e / 2);
        }
        if (even) total += multinomial(t, half) * sphere_monomial_integral(a, d);
      }
      EXPECT_EQ(total, Rational(1)) << "d=" << d << " t=" << t;
    }
  }
}

TEST(SphereMonomialIntegral, MonteCarloAgreement) {
  std::mt19937_64 rng(1);
  const Matrix X = oracle::unit_columns(3, 200000, rng);
  for (const MultiIndex& a : monomials_of_degree(3, 4)) {
    double mean = 0;
    for (int j = 0; j < X.cols(); ++j) {
      double term = 1;
      for (int i = 0; i < 3; ++i) term *= std::pow(X(i, j), a.alpha[i]);
      mean += term;
    }
    mean /= X.cols();
    EXPECT_NEAR(mean, sphere_monomial_integral(a, 3).convert_to<double>(), 5e-3);
  }
}

TEST(Monomials, CountAndDegree) {
  for (int d = 1; d <= 5; ++d) {
    for (int k = 0; k <= 8; ++k) {
      const auto ms = monomials_of_degree(d, k);
      EXPECT_EQ(static_cast<std::int64_t>(ms.size()), binomial(k + d - 1, k));
      for (const auto& m : ms) EXPECT_EQ(m.degree(), k);
    }
  }
}

TEST(CubatureResidual, Examples) {
  EXPECT_LT(cubature_residual(equally_spaced_lines(2), 2), 1e-14);
  EXPECT_EQ(monomials_of_degree(2, 4).size(), 5u);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int trial = 0; trial < 20; ++trial) {
    EXPECT_LT(cubature_residual(twelve_point_design({{u(rng), u(rng), u(rng), u(rng)}}), 2), 1e-12);
  }
  EXPECT_EQ(monomials_of_degree(4, 4).size(), 35u);
  for (int trial = 0; trial < 20; ++trial) {
    EXPECT_GT(cubature_residual(Configuration(oracle::unit_columns(3, 10, rng), NormMode::EqualNorm), 2), 1e-4);
  }
  EXPECT_THROW(cubature_residual(reznick_11pt(), 3), std::invalid_argument);
}

TEST(EquiisoclinicResidual, Examples) {
  const auto planes = equiisoclinic_planes_R4();
  EXPECT_LT(equiisoclinic_residual(planes, 1.0 / 3.0), 1e-13);
  EXPECT_GT(equiisoclinic_residual(planes, 0.3), 1e-2);

  Matrix A = Matrix::Zero(4, 2), B = Matrix::Zero(4, 2);
  A(0, 0) = A(1, 1) = B(2, 0) = B(3, 1) = 1;
  const std::vector<SubspaceBasis> orth{SubspaceBasis(A), SubspaceBasis(B)};
  EXPECT_EQ(equiisoclinic_residual(orth, 0.0), 0.0);
  EXPECT_EQ(equiisoclinic_residual(std::vector<SubspaceBasis>{SubspaceBasis(A)}, 0.7), 0.0);

  const std::vector<SubspaceBasis> mixed{SubspaceBasis(A), SubspaceBasis(Matrix::Identity(3, 2))};
  EXPECT_THROW(equiisoclinic_residual(mixed, 0.0), std::invalid_argument);
}

TEST(EquiisoclinicResidual, InvariantUnderInPlaneRotation) {
  auto planes = equiisoclinic_planes_R4();
  std::vector<SubspaceBasis> rotated;
  std::mt19937_64 rng(3);
  for (const auto& p : planes) rotated.emplace_back(p.columns() * oracle::random_orthogonal(2, rng));
  for (double s : {1.0 / 3.0, 0.2, 0.5}) {
    EXPECT_NEAR(equiisoclinic_residual(rotated, s), equiisoclinic_residual(planes, s), 1e-13);
  }
}

TEST(Z3Residual, RandomSeedsFail) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const Z3Residuals r = z3_design_residual(oracle::unit_columns(3, 8, rng));
    EXPECT_EQ(r.theorem().size(), 14u);
    EXPECT_EQ(r.all().size(), 22u);
    EXPECT_GT(r.max_abs(), 1e-2);
  }
  EXPECT_THROW(z3_design_residual(Matrix::Ones(3, 7)), std::invalid_argument);
  EXPECT_THROW(z3_design_residual(Matrix::Ones(2, 8)), std::invalid_argument);
}

TEST(Z3Residual, NormConstraintsReported) {
  std::mt19937_64 rng(5);
  Matrix S = oracle::unit_columns(3, 8, rng);
  S.col(1) *= 2;
  const Z3Residuals r = z3_design_residual(S);
  EXPECT_NEAR(r.norms[1], 3.0, 1e-14);
  EXPECT_NEAR(r.norms[0], 0.0, 1e-15);
}

TEST(Z3Residual, OptimizedSeedsSatisfyTheSystem) {
  int checked = 0;
  for (std::uint64_t seed = 1; checked < 3 && seed < 20; ++seed) {
    SolverOptions o;
    o.seed = seed;
    const Z3SeedResult r = minimize_z3_seeds(o);
    if (r.f_value > 1e-12 * 576) continue;
    ++checked;
    EXPECT_LT(z3_design_residual(r.seeds).max_abs(), 1e-8);
    EXPECT_LT(cubature_residual(z3_orbit(r.seeds), 4), 1e-10);
  }
  EXPECT_EQ(checked, 3);
}

TEST(IsDesign, Examples) {
  EXPECT_TRUE(is_design(reznick_11pt(), 3).is_design);
  EXPECT_FALSE(is_design(reznick_11pt(), 4).is_design);
  EXPECT_TRUE(is_design(equally_spaced_lines(3), 3).is_design);
  EXPECT_FALSE(is_design(equally_spaced_lines(3), 4).is_design);
  const DesignCheck c = is_design(kempner_24pt(), 3);
  EXPECT_TRUE(c.is_design);
  EXPECT_NEAR(c.f_value, potential(kempner_24pt(), 3).f, 1e-20);
}

TEST(OracleAgreement, ConstructionsAndRandom) {
  std::mt19937_64 rng(6);
  struct Case {
    Configuration c;
    int t;
  };
  std::vector<Case> cases{{equally_spaced_lines(4), 4}, {three_mubs_R4(), 2}, {kempner_24pt(), 3},
                          {twelve_point_design({{0.1, 0.2, 0.3, 0.4}}), 2}};
  for (int trial = 0; trial < 50; ++trial) {
    cases.push_back({Configuration(oracle::unit_columns(2 + trial % 3, 3 + trial % 10, rng), NormMode::EqualNorm),
                     1 + trial % 3});
  }
  for (const auto& [c, t] : cases) {
    const bool p = is_design(c, t).is_design;
    EXPECT_EQ(p, cubature_residual(c, t) <= 1e-10);
    EXPECT_EQ(p, bessel_residual(c, t) <= 1e-10);
  }
}

TEST(Z3Residual, AgreesWithPotentialOnRandomSeeds) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix S = oracle::unit_columns(3, 8, rng);
    const bool system = z3_design_residual(S).max_abs() < 1e-10;
    const bool zero = potential(z3_orbit(S), 4).f < 1e-10 * 576;
    EXPECT_EQ(system, zero);
  }
}
