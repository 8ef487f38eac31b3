#include <random>

#include <gtest/gtest.h>

#include "cdlab/atomic_model.hpp"
#include "cdlab/bergman.hpp"
#include "cdlab/error.hpp"

using namespace cdlab;

namespace {

Eigen::MatrixXcd random_upper(std::size_t n, bool unit_diagonal, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  if (unit_diagonal) m.setIdentity();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) m(i, j) = cplx(u(rng), u(rng));
  }
  return m;
}

}  // namespace

TEST(MuToM, StatedExamples) {
  Eigen::MatrixXcd mu2 = Eigen::MatrixXcd::Identity(2, 2);
  mu2(0, 1) = cplx(0.4, -1.3);
  EXPECT_LT(std::abs(mu_to_m(mu2)(0, 1) + mu2(0, 1)), 1e-15);

  Eigen::MatrixXcd ones = Eigen::MatrixXcd::Ones(3, 3).triangularView<Eigen::Upper>();
  const Eigen::MatrixXcd m = mu_to_m(ones);
  EXPECT_LT(std::abs(m(0, 1) + 1.0), 1e-15);
  EXPECT_LT(std::abs(m(1, 2) + 1.0), 1e-15);
  EXPECT_LT(std::abs(m(0, 2) + 1.0), 1e-15);

  Eigen::MatrixXcd mu3 = Eigen::MatrixXcd::Identity(3, 3);
  mu3(0, 1) = 1.0;
  mu3(1, 2) = 1.0;
  mu3(0, 2) = 2.0;
  EXPECT_LT(std::abs(mu_to_m(mu3)(0, 2) + 3.0), 1e-14);
}

TEST(MuToM, RejectsNonUnitDiagonal) {
  Eigen::MatrixXcd mu = Eigen::MatrixXcd::Identity(3, 3);
  mu(1, 1) = 2.0;
  EXPECT_THROW(mu_to_m(mu), ArgumentError);
  Eigen::MatrixXcd lower = Eigen::MatrixXcd::Identity(3, 3);
  lower(2, 0) = 1.0;
  EXPECT_THROW(mu_to_m(lower), ArgumentError);
}

TEST(MToMu, AdjacentSeed) {
  std::mt19937_64 rng(23);
  const Eigen::MatrixXcd m = random_upper(5, false, rng);
  const Eigen::MatrixXcd mu = m_to_mu(m);
  for (long i = 0; i < 4; ++i) EXPECT_LT(std::abs(mu(i, i + 1) + m(i, i + 1)), 1e-15);
  for (long i = 0; i < 5; ++i) EXPECT_EQ(mu(i, i), cplx(1.0, 0.0));
}

TEST(CoefficientRecursions, RoundTripsBothWays) {
  std::mt19937_64 rng(29);
  for (std::size_t n = 1; n <= 8; ++n) {
    for (int rep = 0; rep < 4; ++rep) {
      const Eigen::MatrixXcd mu = random_upper(n, true, rng);
      const Eigen::MatrixXcd m = random_upper(n, false, rng);
      EXPECT_LT((m_to_mu(mu_to_m(mu)) - mu).cwiseAbs().maxCoeff(), 1e-10);
      EXPECT_LT((mu_to_m(m_to_mu(m)) - m).cwiseAbs().maxCoeff(), 1e-10);
    }
  }
  Eigen::MatrixXcd minus_ones = -Eigen::MatrixXcd::Ones(3, 3).triangularView<Eigen::StrictlyUpper>().toDenseMatrix();
  const Eigen::MatrixXcd mu = m_to_mu(minus_ones);
  EXPECT_LT(std::abs(mu(0, 1) - 1.0), 1e-15);
  EXPECT_LT(std::abs(mu(1, 2) - 1.0), 1e-15);
  EXPECT_LT((mu_to_m(mu) - minus_ones).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(CoefficientTable, MatchesSpec) {
  ModelSpec s = ModelSpec::make(1.0, 2.0, 3);
  s.mu(0, 1) = 0.5;
  s.mu(1, 2) = cplx(0.0, 1.0);
  const CoefficientTable t = coefficient_table(s);
  EXPECT_EQ(t.mu, s.mu);
  EXPECT_TRUE(t.m.cwiseEqual(mu_to_m(s.mu)).all());
}

TEST(ModelSpec, Validation) {
  ModelSpec s = ModelSpec::make(1.0, 1.0, 3, 64);
  EXPECT_NO_THROW(s.validate());
  EXPECT_DOUBLE_EQ(s.lambda(2), 3.0);
  s.mu(2, 2) = 2.0;
  EXPECT_THROW(s.validate(), ArgumentError);
  EXPECT_THROW(ModelSpec::make(0.0, 1.0, 2).validate(), DomainError);
  EXPECT_THROW(ModelSpec::make(1.0, 1.0, 4, 4).validate(), ArgumentError);
}

TEST(ClassifyBoundedness, StatedExamples) {
  for (double v : {0.0, 0.3, 1.0, 2.0, 5.0}) {
    const BoundednessVerdict b = classify_boundedness(ModelSpec::make(1.0, v, 2));
    EXPECT_EQ(b.tags[0][1], EntryTag::kBoundedNonzero) << v;
  }
  const BoundednessVerdict low = classify_boundedness(ModelSpec::make(1.0, 0.9, 3));
  EXPECT_TRUE(low.forced_zero(0, 2));
  EXPECT_FALSE(low.forced_zero(0, 1));
  EXPECT_FALSE(low.forced_zero(1, 2));
  EXPECT_EQ(low.regime, ValencyRegime::kBidiagonal);
  EXPECT_EQ(low.max_bounded_span, 1u);

  const BoundednessVerdict two = classify_boundedness(ModelSpec::make(1.0, 2.0, 3));
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = i + 1; j < 3; ++j) EXPECT_EQ(two.tags[i][j], EntryTag::kBoundedNonzero);
    EXPECT_EQ(two.tags[i][i], EntryTag::kDiagonal);
  }
  EXPECT_EQ(two.regime, ValencyRegime::kAtLeastTwo);
}

TEST(ClassifyBoundedness, RuleAndBoundaryCase) {
  // Span s is forced to zero exactly when sΛ < 2s - 2.
  for (std::size_t n = 2; n <= 7; ++n) {
    for (double v : {0.0, 0.25, 0.5, 2.0 / 3.0, 0.8, 1.0, 1.2, 1.5, 1.75, 2.0}) {
      const BoundednessVerdict b = classify_boundedness(ModelSpec::make(0.7, v, n));
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          const double s = static_cast<double>(j - i);
          const bool expected = s * v < 2.0 * s - 2.0 - 1e-12;
          EXPECT_EQ(b.forced_zero(i, j), expected) << n << " " << v << " " << i << " " << j;
        }
      }
    }
  }
  // λ_j - λ_i = 2(j - i) - 2 exactly: span 3 at Λ = 4/3 stays bounded.
  EXPECT_FALSE(span_forced_zero(4.0 / 3.0, 3));
  EXPECT_TRUE(span_forced_zero(4.0 / 3.0 - 1e-6, 3));
}

TEST(ClassifyBoundedness, MonotoneInValency) {
  for (std::size_t n = 2; n <= 8; ++n) {
    BoundednessVerdict previous = classify_boundedness(ModelSpec::make(1.0, 0.0, n));
    for (int step = 1; step <= 60; ++step) {
      const BoundednessVerdict b = classify_boundedness(ModelSpec::make(1.0, 0.05 * step, n));
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          if (!previous.forced_zero(i, j)) {
            EXPECT_FALSE(b.forced_zero(i, j));
          }
        }
      }
      EXPECT_GE(b.max_bounded_span, previous.max_bounded_span);
      previous = b;
    }
  }
}

TEST(ClassifyBoundedness, Regimes) {
  EXPECT_EQ(classify_boundedness(ModelSpec::make(1.0, 2.5, 4)).regime, ValencyRegime::kAtLeastTwo);
  // n = 4: every span bounded once Λ ≥ 2 - 2/3.
  EXPECT_EQ(classify_boundedness(ModelSpec::make(1.0, 1.5, 4)).regime, ValencyRegime::kAllBounded);
  EXPECT_EQ(classify_boundedness(ModelSpec::make(1.0, 1.2, 4)).regime, ValencyRegime::kBanded);
  EXPECT_EQ(classify_boundedness(ModelSpec::make(1.0, 0.5, 4)).regime, ValencyRegime::kBidiagonal);
}

TEST(Assemble, TwoAtomBlocks) {
  ModelSpec s = ModelSpec::make(1.0, 2.0, 2, 64);
  s.mu(0, 1) = 1.0;
  const TruncatedOperator t = assemble(s);
  EXPECT_EQ(t.dim(), 128u);
  EXPECT_EQ(t.block_dim(), 64u);
  EXPECT_TRUE(t.block(0, 0).identical(build_atom(1.0, 64)));
  EXPECT_TRUE(t.block(1, 1).identical(build_atom(3.0, 64)));
  const Eigen::MatrixXcd expected = -build_connector(1.0, 3.0, 0, 64).to_dense();
  EXPECT_LT((t.block(0, 1).to_dense() - expected).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_TRUE(t.block(1, 0).empty());
}

TEST(Assemble, UnboundedEntryRaised) {
  ModelSpec s = ModelSpec::make(1.0, 0.5, 3, 32);
  s.mu(0, 2) = 1.0;
  try {
    assemble(s);
    FAIL() << "expected UnboundedEntry";
  } catch (const UnboundedEntry& e) {
    EXPECT_EQ(e.row(), 0u);
    EXPECT_EQ(e.col(), 2u);
  }
}

TEST(Assemble, ZeroCouplingIsBlockDiagonal) {
  const TruncatedOperator t = assemble(ModelSpec::make(1.5, 0.7, 4, 32));
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      if (i == j) {
        EXPECT_TRUE(t.block(i, i).identical(build_atom(1.5 + 0.7 * static_cast<double>(i), 32)));
      } else {
        EXPECT_TRUE(t.block(i, j).empty());
      }
    }
  }
}

TEST(Assemble, UpperBlockTriangular) {
  std::mt19937_64 rng(31);
  ModelSpec s = ModelSpec::make(0.8, 2.0, 5, 40);
  s.mu = random_upper(5, true, rng);
  const TruncatedOperator t = assemble(s);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < i; ++j) EXPECT_TRUE(t.block(i, j).empty());
  }
}

TEST(CheckIntertwining, SeededSpecs) {
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  for (double v : {0.5, 1.0, 2.0, 3.0}) {
    for (std::size_t n = 2; n <= 5; ++n) {
      ModelSpec s = ModelSpec::make(u(rng), v, n, 256);
      const BoundednessVerdict b = classify_boundedness(s);
      Eigen::MatrixXcd m = random_upper(n, false, rng);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          if (b.forced_zero(i, j)) m(i, j) = 0.0;
        }
      }
      s.mu = m_to_mu(m);
      EXPECT_LE(check_intertwining(s), 1e-10) << v << " " << n;
    }
  }
}

TEST(CheckIntertwining, DetectsPerturbedWeight) {
  ModelSpec s = ModelSpec::make(1.0, 2.0, 2, 256);
  s.mu(0, 1) = 1.0;
  TruncatedOperator t = assemble(s);
  EXPECT_LE(check_intertwining(t), 1e-10);
  t.set(0, 1, t.at(0, 1) + 1e-3);
  EXPECT_GE(check_intertwining(t), 1e-4);
}

TEST(CheckIntertwining, ZeroCouplingExact) {
  EXPECT_EQ(check_intertwining(ModelSpec::make(1.0, 1.0, 2, 128)), 0.0);
}

TEST(IsHomogeneous, RecoversGeneratingWeights) {
  const std::vector<double> weights{1.0, 2.0, 5.0};
  ModelSpec s = ModelSpec::make(1.5, 2.0, 3, 64);
  for (std::size_t p = 0; p < 3; ++p) {
    for (std::size_t q = p + 1; q < 3; ++q) {
      // Γ_{p,q} = C(q, p) / (λ_p)_{q-p}, computed here from the definition.
      double binom = 1.0;
      for (std::size_t t = 0; t < p; ++t) binom = binom * static_cast<double>(q - t) / static_cast<double>(t + 1);
      double rising = 1.0;
      for (std::size_t t = 0; t < q - p; ++t) rising *= s.lambda(p) + static_cast<double>(t);
      s.mu(p, q) = binom / rising * weights[q] / weights[p];
    }
  }
  const HomogeneityResult r = is_homogeneous(s, 1e-12);
  ASSERT_TRUE(r.homogeneous);
  ASSERT_TRUE(r.recovered.has_value());
  for (std::size_t p = 0; p < 3; ++p) EXPECT_NEAR((*r.recovered)[p], weights[p], 1e-9);

  s.mu(0, 2) *= 1.01;
  EXPECT_FALSE(is_homogeneous(s, 1e-9).homogeneous);
}

TEST(IsHomogeneous, RejectsDecoupledAndWrongValency) {
  EXPECT_FALSE(is_homogeneous(ModelSpec::make(1.0, 2.0, 3), 1e-9).homogeneous);
  ModelSpec s = ModelSpec::make(1.0, 1.0, 2);
  s.mu(0, 1) = homogeneity_gamma(s, 0, 1);
  EXPECT_FALSE(is_homogeneous(s, 1e-9).homogeneous);
  EXPECT_FALSE(is_homogeneous(s, 1e-9).recovered.has_value());
}

TEST(FrameVector, EigenvectorOfAssembledOperator) {
  std::mt19937_64 rng(41);
  ModelSpec s = ModelSpec::make(1.0, 2.0, 3, 512);
  s.mu = random_upper(3, true, rng);
  const TruncatedOperator t = assemble(s);
  for (double x : {-0.5, -0.25, 0.0, 0.25, 0.5}) {
    for (double y : {-0.5, -0.25, 0.0, 0.25, 0.5}) {
      const cplx w(x, y);
      if (std::abs(w) > 0.5) continue;
      for (std::size_t j = 0; j < 3; ++j) {
        const Eigen::VectorXcd g = frame_vector(s, w, j);
        Eigen::VectorXcd r = t.apply(g) - w * g;
        // Drop the trailing rows of each block touched by the cut.
        for (std::size_t b = 0; b < 3; ++b) r.segment(static_cast<long>(b * 512 + 509), 3).setZero();
        EXPECT_LE(r.norm(), 1e-7) << w << " " << j;
      }
    }
  }
}
