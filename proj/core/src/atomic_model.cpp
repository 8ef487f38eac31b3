#include "cdlab/atomic_model.hpp"

#include <algorithm>
#include <cmath>

#include "cdlab/bergman.hpp"
#include "cdlab/error.hpp"

namespace cdlab {

namespace {

constexpr double kDiagonalTol = 1e-12;
constexpr double kValencyTol = 1e-12;

void require_square(const Eigen::MatrixXcd& a, const char* what) {
  if (a.rows() != a.cols()) throw ArgumentError(std::string(what) + " must be square");
}

void require_upper(const Eigen::MatrixXcd& a, const char* what) {
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      if (a(i, j) != cplx(0.0, 0.0)) {
        throw ArgumentError(std::string(what) + " must be upper triangular; entry (" + std::to_string(i) +
                            "," + std::to_string(j) + ") is nonzero");
      }
    }
  }
}

}  // namespace

ModelSpec ModelSpec::make(double lambda0, double valency, std::size_t n, std::size_t trunc) {
  ModelSpec s;
  s.lambda0 = lambda0;
  s.valency = valency;
  s.n = n;
  s.trunc = trunc;
  s.mu = Eigen::MatrixXcd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  return s;
}

void ModelSpec::validate() const {
  if (n == 0) throw ArgumentError("rank n must be at least 1");
  if (!(lambda0 > 0.0) || !std::isfinite(lambda0)) throw DomainError("lambda0 must be positive");
  if (!(valency >= 0.0) || !std::isfinite(valency)) throw DomainError("valency must be nonnegative");
  if (trunc < 2) throw ArgumentError("truncation must be at least 2");
  if (static_cast<std::size_t>(mu.rows()) != n || static_cast<std::size_t>(mu.cols()) != n) {
    throw ArgumentError("mu must be an n x n matrix");
  }
  require_upper(mu, "mu");
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(mu(i, i) - cplx(1.0, 0.0)) > kDiagonalTol) {
      throw ArgumentError("mu(" + std::to_string(i) + "," + std::to_string(i) + ") must equal 1");
    }
  }
  if (n > 1 && trunc <= n) throw ArgumentError("truncation must exceed the rank");
}

Eigen::MatrixXcd mu_to_m(const Eigen::MatrixXcd& mu) {
  require_square(mu, "mu");
  require_upper(mu, "mu");
  const Eigen::Index n = mu.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(mu(i, i) - cplx(1.0, 0.0)) > kDiagonalTol) throw ArgumentError("mu must have unit diagonal");
  }
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index d = 1; d < n; ++d) {
    for (Eigen::Index k = 0; k + d < n; ++k) {
      const Eigen::Index j = k + d;
      cplx acc = mu(k, j) * static_cast<double>(d);
      for (Eigen::Index l = 1; l < d; ++l) acc += mu(k + l, j) * m(k, k + l);
      m(k, j) = -acc / mu(j, j);
    }
  }
  return m;
}

Eigen::MatrixXcd m_to_mu(const Eigen::MatrixXcd& m) {
  require_square(m, "m");
  const Eigen::Index n = m.rows();
  Eigen::MatrixXcd mu = Eigen::MatrixXcd::Identity(n, n);
  for (Eigen::Index q = 1; q < n; ++q) {
    mu(q - 1, q) = -m(q - 1, q);
    for (Eigen::Index d = 2; d <= q; ++d) {
      const Eigen::Index p = q - d;
      cplx acc = m(p, q);
      for (Eigen::Index l = 1; l < d; ++l) acc += m(p, p + l) * mu(p + l, q);
      mu(p, q) = -acc / static_cast<double>(d);
    }
  }
  return mu;
}

CoefficientTable coefficient_table(const ModelSpec& spec) { return {spec.mu, mu_to_m(spec.mu)}; }

std::string to_string(EntryTag tag) {
  switch (tag) {
    case EntryTag::kDiagonal: return "diagonal";
    case EntryTag::kBoundedNonzero: return "bounded-nonzero";
    case EntryTag::kForcedZero: return "forced-zero";
  }
  return "unknown";
}

std::string to_string(ValencyRegime regime) {
  switch (regime) {
    case ValencyRegime::kAtLeastTwo: return "valency-at-least-two";
    case ValencyRegime::kAllBounded: return "all-bounded";
    case ValencyRegime::kBanded: return "banded";
    case ValencyRegime::kBidiagonal: return "bidiagonal";
  }
  return "unknown";
}

bool span_forced_zero(double valency, std::size_t span) {
  if (span < 2) return false;
  const double s = static_cast<double>(span);
  return s * valency < 2.0 * s - 2.0 - kValencyTol;
}

BoundednessVerdict classify_boundedness(const ModelSpec& spec) {
  spec.validate();
  BoundednessVerdict v;
  v.tags.assign(spec.n, std::vector<EntryTag>(spec.n, EntryTag::kDiagonal));
  v.max_bounded_span = spec.n > 0 ? spec.n - 1 : 0;
  for (std::size_t span = 1; span < spec.n; ++span) {
    if (span_forced_zero(spec.valency, span)) {
      v.max_bounded_span = std::min(v.max_bounded_span, span - 1);
    }
  }
  for (std::size_t i = 0; i < spec.n; ++i) {
    for (std::size_t j = i + 1; j < spec.n; ++j) {
      v.tags[i][j] = span_forced_zero(spec.valency, j - i) ? EntryTag::kForcedZero : EntryTag::kBoundedNonzero;
    }
  }
  if (spec.valency >= 2.0 - kValencyTol) {
    v.regime = ValencyRegime::kAtLeastTwo;
  } else if (spec.n < 2 || v.max_bounded_span == spec.n - 1) {
    v.regime = ValencyRegime::kAllBounded;
  } else if (v.max_bounded_span <= 1) {
    v.regime = ValencyRegime::kBidiagonal;
  } else {
    v.regime = ValencyRegime::kBanded;
  }
  return v;
}

TruncatedOperator assemble(const ModelSpec& spec) {
  const BoundednessVerdict verdict = classify_boundedness(spec);
  const Eigen::MatrixXcd m = mu_to_m(spec.mu);
  const std::size_t N = spec.trunc;
  TruncatedOperator t(spec.n * N, N);
  for (std::size_t i = 0; i < spec.n; ++i) t.add_block(i, i, build_atom(spec.lambda(i), N));
  for (std::size_t i = 0; i < spec.n; ++i) {
    for (std::size_t j = i + 1; j < spec.n; ++j) {
      const cplx mij = m(i, j);
      if (std::abs(mij) <= kCoefficientZeroTol) continue;
      if (verdict.forced_zero(i, j)) throw UnboundedEntry(i, j);
      t.add_block(i, j, build_connector(spec.lambda(i), spec.lambda(j), j - i - 1, N) * mij);
    }
  }
  t.prune();
  t.set_source({OperatorSource::Kind::kAssembled, spec.lambda0, spec.valency, static_cast<int>(spec.n)});
  return t;
}

double check_intertwining(const TruncatedOperator& assembled) {
  double worst = 0.0;
  const std::size_t nb = assembled.num_blocks();
  for (std::size_t i = 0; i + 1 < nb; ++i) {
    const TruncatedOperator tii = assembled.block(i, i);
    const TruncatedOperator s = assembled.block(i, i + 1);
    const TruncatedOperator tjj = assembled.block(i + 1, i + 1);
    const TruncatedOperator lhs = tii * s - s * tjj;
    const long margin = std::max({tii.local_upper_band(), s.local_upper_band(), 0L});
    worst = std::max(worst, lhs.interior_frobenius(static_cast<std::size_t>(margin)));
  }
  return worst;
}

double check_intertwining(const ModelSpec& spec) { return check_intertwining(assemble(spec)); }

double homogeneity_gamma(const ModelSpec& spec, std::size_t p, std::size_t q) {
  if (p >= q) throw ArgumentError("homogeneity factor needs p < q");
  double binom = 1.0;
  for (std::size_t t = 1; t <= p; ++t) binom = binom * static_cast<double>(q - p + t) / static_cast<double>(t);
  return binom / rising_factorial(spec.lambda(p), q - p);
}

HomogeneityResult is_homogeneous(const ModelSpec& spec, double tol) {
  spec.validate();
  HomogeneityResult result;
  if (std::abs(spec.valency - 2.0) > kValencyTol || spec.n < 2) return result;
  std::vector<double> weights(spec.n, 1.0);
  for (std::size_t p = 0; p + 1 < spec.n; ++p) {
    const cplx next = spec.mu(p, p + 1) * weights[p] / homogeneity_gamma(spec, p, p + 1);
    if (std::abs(next.imag()) > tol * std::max(1.0, std::abs(next)) || !(next.real() > tol)) return result;
    weights[p + 1] = next.real();
  }
  for (std::size_t p = 0; p < spec.n; ++p) {
    for (std::size_t q = p + 1; q < spec.n; ++q) {
      const double expected = homogeneity_gamma(spec, p, q) * weights[q] / weights[p];
      if (std::abs(spec.mu(p, q) - expected) > tol * std::max(1.0, std::abs(expected))) return result;
    }
  }
  result.homogeneous = true;
  result.recovered = weights;
  return result;
}

Eigen::VectorXcd frame_vector(const ModelSpec& spec, cplx w, std::size_t j) {
  if (j >= spec.n) throw ArgumentError("frame index out of range");
  const std::size_t N = spec.trunc;
  Eigen::VectorXcd g = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(spec.n * N));
  for (std::size_t i = 0; i <= j; ++i) {
    if (spec.mu(i, j) == cplx(0.0, 0.0)) continue;
    const SectionVector t = section(spec.lambda(i), w, j - i, N);
    g.segment(static_cast<Eigen::Index>(i * N), static_cast<Eigen::Index>(N)) = spec.mu(i, j) * t.coeffs;
  }
  return g;
}

}  // namespace cdlab
