#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "cdlab/bergman.hpp"
#include "cdlab/error.hpp"
#include "cdlab/intertwiner.hpp"

using namespace cdlab;

namespace {

ModelSpec random_spec(double lambda0, double valency, std::size_t n, std::size_t trunc, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ModelSpec s = ModelSpec::make(lambda0, valency, n, trunc);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) s.mu(i, j) = cplx(u(rng), u(rng));
  }
  return s;
}

// Dense A X - X B - C with the Sylvester interior window applied.
double dense_interior_residual(const TruncatedOperator& A, const TruncatedOperator& B, const TruncatedOperator& C,
                               const TruncatedOperator& X) {
  const InteriorMargins mg = sylvester_margins(A, B);
  Eigen::MatrixXcd r = A.to_dense() * X.to_dense() - X.to_dense() * B.to_dense() - C.to_dense();
  r.bottomRows(static_cast<Eigen::Index>(mg.rows)).setZero();
  r.rightCols(static_cast<Eigen::Index>(mg.cols)).setZero();
  return r.norm();
}

}  // namespace

TEST(GrowthExponent, PowerLaws) {
  std::vector<double> sq(400), flat(400), decay(400);
  for (std::size_t l = 0; l < 400; ++l) {
    const double x = static_cast<double>(std::max<std::size_t>(l, 1));
    sq[l] = x * x;
    flat[l] = 3.0;
    decay[l] = std::pow(x, -0.75);
  }
  EXPECT_NEAR(growth_exponent(sq), 2.0, 1e-10);
  EXPECT_NEAR(growth_exponent(flat), 0.0, 1e-12);
  EXPECT_NEAR(growth_exponent(decay), -0.75, 1e-10);
  std::vector<cplx> rotated(400);
  for (std::size_t l = 0; l < 400; ++l) rotated[l] = std::polar(sq[l], 0.1 * static_cast<double>(l));
  EXPECT_NEAR(growth_exponent(rotated), 2.0, 1e-10);
}

TEST(GrowthExponent, RejectsZerosAndShortInput) {
  std::vector<double> v(100, 1.0);
  v[80] = 0.0;
  EXPECT_THROW(growth_exponent(v), ArgumentError);
  EXPECT_THROW(growth_exponent(std::vector<double>(10, 1.0)), ArgumentError);
}

TEST(ForwardShift, Layout) {
  const TruncatedOperator x = forward_shift({cplx(1.0, 0.0), cplx(2.0, 0.0), cplx(3.0, 0.0)}, 2, 6);
  const Eigen::MatrixXcd d = x.to_dense();
  EXPECT_EQ(d(2, 0), cplx(1.0, 0.0));
  EXPECT_EQ(d(3, 1), cplx(2.0, 0.0));
  EXPECT_EQ(d(4, 2), cplx(3.0, 0.0));
  EXPECT_EQ(x.nonzero_count(), 3u);
}

TEST(ShiftRecursion, SolvesTheRecurrence) {
  const std::vector<cplx> rhs{cplx(1.0, 0.5), cplx(-0.3, 0.0), cplx(2.0, 1.0), cplx(0.0, 0.0), cplx(0.7, -0.2)};
  const double la = 1.3, lb = 2.9;
  for (std::size_t k : {0u, 1u, 2u}) {
    const std::vector<cplx> x = shift_recursion(la, lb, k, rhs);
    ASSERT_EQ(x.size(), rhs.size());
    EXPECT_LT(std::abs(x[0] * shift_weight(la, k) - rhs[0]), 1e-14);
    for (std::size_t l = 1; l < x.size(); ++l) {
      const cplx lhs = x[l] * shift_weight(la, l + k) - x[l - 1] * shift_weight(lb, l - 1);
      EXPECT_LT(std::abs(lhs - rhs[l]), 1e-13) << k << " " << l;
    }
  }
}

TEST(SolveSylvesterClosed, FirstCoefficientExample) {
  const SylvesterSolution s = solve_sylvester_closed(1.0, 3.0, 0, 256);
  ASSERT_FALSE(s.coeffs.empty());
  EXPECT_NEAR(std::abs(s.coeffs[0] - 1.0), 0.0, 1e-14);
}

TEST(SolveSylvesterClosed, ResidualAgainstDenseProduct) {
  for (std::size_t k : {0u, 1u, 2u}) {
    const double l0 = 1.5, lk1 = 1.5 + 2.0 * static_cast<double>(k + 1);
    const std::size_t N = 96;
    const SylvesterSolution s = solve_sylvester_closed(l0, lk1, k, N);
    const TruncatedOperator A = build_atom(l0, N), B = build_atom(lk1, N), C = build_connector(l0, lk1, k, N);
    EXPECT_LE(s.residual, 1e-9);
    EXPECT_LE(dense_interior_residual(A, B, C, s.X), 1e-9);
    EXPECT_NEAR(s.residual, dense_interior_residual(A, B, C, s.X), 1e-12);
  }
}

TEST(SolveSylvesterClosed, FittedExponentsAndVerdicts) {
  for (double l0 : {1.0, 2.0}) {
    for (double v : {1.0, 2.0, 3.0}) {
      for (std::size_t k : {0u, 1u, 2u}) {
        const double lk1 = l0 + static_cast<double>(k + 1) * v;
        const SylvesterSolution s = solve_sylvester_closed(l0, lk1, k, 4096);
        ASSERT_TRUE(s.fitted_exponent.has_value());
        const double expected = (l0 - lk1 + 2.0 * static_cast<double>(k) + 2.0) / 2.0;
        EXPECT_NEAR(*s.fitted_exponent, expected, 0.15) << l0 << " " << v << " " << k;
        EXPECT_TRUE(expected < 0.25 || s.bounded_verdict == Verdict::kDivergent);
        EXPECT_TRUE(expected > -0.05 || s.bounded_verdict == Verdict::kBounded);
      }
    }
  }
}

TEST(SolveSylvesterClosed, ShortTruncationHasNoExponent) {
  const SylvesterSolution s = solve_sylvester_closed(1.0, 3.0, 0, 32);
  EXPECT_FALSE(s.fitted_exponent.has_value());
}

TEST(SolveSylvesterClosed, DomainChecks) {
  EXPECT_THROW(solve_sylvester_closed(2.0, 2.0, 0, 64), DomainError);
  EXPECT_THROW(solve_sylvester_closed(1.0, 3.0, 5, 6), ArgumentError);
}

TEST(SolveSylvesterGeneric, RecoversPlantedSolution) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const std::size_t N = 48;
  const TruncatedOperator A = build_atom(1.0, N), B = build_atom(3.0, N);
  TruncatedOperator Z(N);
  for (std::size_t l = 0; l + 1 < N; ++l) Z.set(l + 1, l, cplx(u(rng), u(rng)) / static_cast<double>(l + 1));
  const TruncatedOperator C = A * Z - Z * B;
  const SylvesterSolution s = solve_sylvester_generic(A, B, C);
  EXPECT_LE(s.residual, 1e-8 * std::max(1.0, C.frobenius()));
  EXPECT_LE(dense_interior_residual(A, B, C, s.X), 1e-8 * std::max(1.0, C.frobenius()));
  EXPECT_LE(s.X.frobenius(), 10.0 * Z.frobenius());
  EXPECT_EQ(s.bounded_verdict, Verdict::kBounded);
  EXPECT_GT(s.iterations, 0u);
}

TEST(SolveSylvesterGeneric, AgreesWithClosedForm) {
  const std::size_t N = 128;
  const TruncatedOperator A = build_atom(1.0, N), B = build_atom(5.0, N), C = build_connector(1.0, 5.0, 1, N);
  const SylvesterSolution closed = solve_sylvester_closed(1.0, 5.0, 1, N);
  GenericSolveOptions o;
  o.initial_guess = closed.X;
  o.relative_tolerance = 1e-9;
  const SylvesterSolution generic = solve_sylvester_generic(A, B, C, o);
  EXPECT_LE(generic.residual, 1e-9);
  ASSERT_EQ(generic.coeffs.size(), closed.coeffs.size());
  for (std::size_t l = 0; l < closed.coeffs.size(); ++l) EXPECT_LT(std::abs(generic.coeffs[l] - closed.coeffs[l]), 1e-8);
}

TEST(SolveSylvesterGeneric, ShapeMismatch) {
  EXPECT_THROW(solve_sylvester_generic(build_atom(1.0, 8), build_atom(1.0, 9), TruncatedOperator(8)), ArgumentError);
}

TEST(RangeMembershipProbe, BoundedAndDivergentConnectors) {
  const std::vector<std::size_t> truncations{64, 128, 256};
  auto problem = [](double la, double lb, std::size_t k) {
    return [=](std::size_t N) {
      return SylvesterProblem{build_atom(la, N), build_atom(lb, N), build_connector(la, lb, k, N)};
    };
  };
  // X grows like l^{k+1-gap/2}: gap 6 at k = 0 decays, gap 1 grows.
  const RangeProbe stable = range_membership_probe(problem(1.0, 7.0, 0), truncations);
  EXPECT_EQ(stable.verdict, Verdict::kBounded);
  ASSERT_EQ(stable.ratios.size(), 2u);
  for (double r : stable.ratios) EXPECT_LE(r, kStableNormRatio);
  const RangeProbe growing = range_membership_probe(problem(1.0, 2.0, 0), truncations);
  EXPECT_EQ(growing.verdict, Verdict::kDivergent);
}

TEST(SimilarityReduce, ClearsOffDiagonalBlocks) {
  for (std::size_t n : {2u, 3u}) {
    const ModelSpec s = random_spec(1.0, 2.5, n, 256, 40 + n);
    const ReductionResult r = similarity_reduce(s);
    EXPECT_LE(r.offdiag_residual, 1e-6) << n;
    const TruncatedOperator inner = r.interior_conjugated();
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_LT((inner.block(i, i) - build_atom(s.lambda(i), 256).interior(r.margin)).max_abs(), 1e-8);
    }
    // Y Y⁻¹ = I up to the truncation edge, Y unit upper triangular by blocks.
    Eigen::MatrixXcd defect = (r.Y * r.Y_inverse).to_dense() - Eigen::MatrixXcd::Identity(n * 256, n * 256);
    for (std::size_t row = 0; row < n * 256; ++row) {
      if (row % 256 >= 256 - r.margin) defect.row(static_cast<Eigen::Index>(row)).setZero();
    }
    EXPECT_LT(defect.cwiseAbs().maxCoeff(), 1e-8);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_TRUE(r.Y.block(i, i).identical(TruncatedOperator::identity(256)));
      for (std::size_t j = 0; j < i; ++j) EXPECT_TRUE(r.Y.block(i, j).empty());
    }
    EXPECT_GE(r.cond_Y, 1.0);
  }
}

TEST(SimilarityReduce, ValencyBelowTwoRejected) {
  EXPECT_THROW(similarity_reduce(random_spec(1.0, 1.5, 2, 64, 1)), ValencyTooSmall);
}

TEST(SimilarityReduce, DecoupledIsIdentity) {
  const ReductionResult r = similarity_reduce(ModelSpec::make(1.0, 2.0, 3, 64));
  EXPECT_EQ((r.Y.to_dense() - Eigen::MatrixXcd::Identity(192, 192)).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(r.offdiag_residual, 0.0);
}

TEST(CommutantElement, ConstantPolynomialIsScalar) {
  const ModelSpec s = random_spec(1.0, 2.0, 3, 128, 3);
  const cplx c(2.0, -0.5);
  const CommutantResult r = commutant_element(s, {c});
  const Eigen::MatrixXcd expected = c * Eigen::MatrixXcd::Identity(384, 384);
  EXPECT_LT((r.X.to_dense() - expected).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LE(r.residual, 1e-12);
}

TEST(CommutantElement, TwoAtomsDiagonalBlocksArePolynomials) {
  const ModelSpec s = random_spec(1.0, 2.0, 2, 128, 4);
  const std::vector<cplx> phi{cplx(0.5, 0.0), cplx(1.0, 1.0), cplx(-0.25, 0.0)};
  const CommutantResult r = commutant_element(s, phi);
  EXPECT_LE(r.residual, 1e-9);
  for (std::size_t i = 0; i < 2; ++i) {
    const Eigen::MatrixXcd a = build_atom(s.lambda(i), 128).to_dense();
    const Eigen::MatrixXcd p = phi[0] * Eigen::MatrixXcd::Identity(128, 128) + phi[1] * a + phi[2] * a * a;
    EXPECT_LT((r.X.block(i, i).to_dense() - p).cwiseAbs().maxCoeff(), 1e-12);
  }
  // n = 2 has no higher jet term: the corner block vanishes.
  EXPECT_TRUE(r.X.block(0, 1).empty() || r.X.block(0, 1).max_abs() < 1e-14);
}

TEST(CommutantElement, CommutesForThreeAtoms) {
  ModelSpec s = ModelSpec::make(1.0, 2.0, 3, 256);
  s.mu = Eigen::MatrixXcd::Ones(3, 3).triangularView<Eigen::Upper>();
  const std::vector<cplx> phi{cplx(0.0, 0.0), cplx(1.0, 0.0), cplx(0.5, 0.0), cplx(0.0, 0.25)};
  const CommutantResult r = commutant_element(s, phi);
  EXPECT_LE(r.residual, 1e-8);
  // Independent check of the commutator away from the truncation edge.
  const TruncatedOperator T = assemble(s);
  const TruncatedOperator comm = (T * r.X - r.X * T).interior(8);
  EXPECT_LE(comm.frobenius(), 1e-8);
  EXPECT_FALSE(r.X.block(0, 2).empty());
}

TEST(CommutantElement, DegreeLimit) {
  EXPECT_THROW(commutant_element(ModelSpec::make(1.0, 2.0, 2, 64), std::vector<cplx>(34, 1.0)), ArgumentError);
  EXPECT_THROW(commutant_element(ModelSpec::make(1.0, 2.0, 2, 64), {}), ArgumentError);
}

TEST(IdempotentProbe, DecoupledPairSplits) {
  const IdempotentReport r = idempotent_probe(ModelSpec::make(1.0, 2.0, 2, 32));
  EXPECT_EQ(r.survivors, 4u);
  EXPECT_EQ(r.components, 2u);
  EXPECT_FALSE(r.only_trivial);
  EXPECT_TRUE(r.rule_matches_matrix);
}

TEST(IdempotentProbe, ChainIsIrreducible) {
  ModelSpec s = ModelSpec::make(1.0, 2.0, 3, 32);
  s.mu(0, 1) = 1.0;
  s.mu(1, 2) = 1.0;
  const IdempotentReport r = idempotent_probe(s);
  EXPECT_EQ(r.survivors, 2u);
  EXPECT_EQ(r.components, 1u);
  EXPECT_TRUE(r.only_trivial);
  EXPECT_TRUE(r.rule_matches_matrix);
}

TEST(IdempotentProbe, SurvivorCountIsPowerOfComponents) {
  ModelSpec s = ModelSpec::make(1.0, 2.0, 5, 16);
  s.mu(0, 1) = 1.0;
  s.mu(3, 4) = -2.0;
  // m keeps (0, 1) and (3, 4); atom 2 stays alone.
  const IdempotentReport r = idempotent_probe(s);
  EXPECT_EQ(r.components, 3u);
  EXPECT_EQ(r.survivors, 8u);
  EXPECT_TRUE(r.rule_matches_matrix);
  for (const IdempotentPattern& p : r.patterns) EXPECT_EQ(p.survives_rule, p.survives_matrix);
}
