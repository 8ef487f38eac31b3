#include "cdlab/bergman.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cdlab/error.hpp"

namespace cdlab {

namespace {

void require_positive(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw DomainError("kernel weight must be positive, got " + std::to_string(lambda));
  }
}

cplx ipow(cplx base, std::size_t e) {
  cplx r(1.0, 0.0);
  for (std::size_t t = 0; t < e; ++t) r *= base;
  return r;
}

void require_disc(cplx w, const char* what) {
  if (!(std::abs(w) < 1.0)) throw DomainError(std::string(what) + " must lie in the open unit disc");
}

}  // namespace

KernelParam::KernelParam(double l) : lambda(l) { require_positive(l); }

double log_gamma(double x) {
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgamma_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

double log_pochhammer_coeff(double lambda, std::size_t n) {
  require_positive(lambda);
  if (n == 0) return 0.0;
  const double dn = static_cast<double>(n);
  return log_gamma(lambda + dn) - log_gamma(lambda) - log_gamma(dn + 1.0);
}

double pochhammer_coeff(double lambda, std::size_t n) { return std::exp(log_pochhammer_coeff(lambda, n)); }

double rising_factorial(double x, std::size_t k) {
  double r = 1.0;
  for (std::size_t t = 0; t < k; ++t) r *= x + static_cast<double>(t);
  return r;
}

double falling_factorial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  double r = 1.0;
  for (std::size_t t = 0; t < k; ++t) r *= static_cast<double>(n - t);
  return r;
}

double shift_weight(double lambda, std::size_t n) {
  require_positive(lambda);
  const double dn = static_cast<double>(n);
  return std::sqrt((dn + 1.0) / (dn + lambda));
}

cplx kernel_value(double lambda, cplx z, cplx w) {
  require_positive(lambda);
  require_disc(z, "z");
  require_disc(w, "w");
  return std::pow(cplx(1.0, 0.0) - z * std::conj(w), -lambda);
}

cplx kernel_diagonal_derivative(double lambda, std::size_t p, std::size_t q, cplx w) {
  require_positive(lambda);
  require_disc(w, "w");
  // ∂̄^q gives (λ)_q w^q (1-x)^{-λ-q}; Leibniz in ∂ then splits into r terms
  // where r derivatives hit w^q.
  const double s = 1.0 - std::norm(w);
  const cplx wb = std::conj(w);
  const std::size_t rmax = std::min(p, q);
  cplx sum(0.0, 0.0);
  double binom = 1.0;  // C(p, r)
  for (std::size_t r = 0; r <= rmax; ++r) {
    if (r > 0) binom = binom * static_cast<double>(p - r + 1) / static_cast<double>(r);
    const double coef = binom * falling_factorial(q, r) * rising_factorial(lambda + static_cast<double>(q), p - r);
    const double expo = -lambda - static_cast<double>(p + q - r);
    sum += coef * ipow(w, q - r) * ipow(wb, p - r) * std::pow(s, expo);
  }
  return rising_factorial(lambda, q) * sum;
}

TruncatedOperator build_atom(double lambda, std::size_t N) {
  require_positive(lambda);
  if (N < 2) throw ArgumentError("truncation must be at least 2");
  TruncatedOperator t(N);
  auto& d = t.diagonal(1);
  for (std::size_t n = 0; n + 1 < N; ++n) d[n] = shift_weight(lambda, n);
  t.set_source({OperatorSource::Kind::kAtom, lambda, lambda, 0});
  return t;
}

SectionVector section(double lambda, cplx w, std::size_t order, std::size_t N) {
  require_positive(lambda);
  require_disc(w, "w");
  if (order >= N) throw ArgumentError("derivative order must be below the truncation");
  SectionVector s;
  s.lambda = lambda;
  s.point = w;
  s.order = order;
  s.coeffs = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(N));
  const double r = std::abs(w);
  if (r == 0.0) {
    s.coeffs[order] = std::exp(0.5 * log_pochhammer_coeff(lambda, order) + log_gamma(order + 1.0));
    return s;
  }
  const double log_r = std::log(r);
  const double theta = std::arg(w);
  for (std::size_t n = order; n < N; ++n) {
    const double p = static_cast<double>(n - order);
    const double log_mag = 0.5 * log_pochhammer_coeff(lambda, n) + log_gamma(n + 1.0) -
                           log_gamma(p + 1.0) + p * log_r;
    s.coeffs[n] = std::polar(std::exp(log_mag), p * theta);
  }
  return s;
}

double connector_entry(double lambda_i, double lambda_j, std::size_t k, std::size_t l) {
  const double log_ratio = log_pochhammer_coeff(lambda_i, l + k) - log_pochhammer_coeff(lambda_j, l);
  if (k <= 24) return falling_factorial(l + k, k) * std::exp(0.5 * log_ratio);
  return std::exp(log_gamma(l + k + 1.0) - log_gamma(l + 1.0) + 0.5 * log_ratio);
}

TruncatedOperator build_connector(double lambda_i, double lambda_j, std::size_t k, std::size_t N) {
  require_positive(lambda_i);
  require_positive(lambda_j);
  if (N < 2) throw ArgumentError("truncation must be at least 2");
  if (k >= N) throw ArgumentError("connector shift must be below the truncation");
  TruncatedOperator s(N);
  auto& d = s.diagonal(-static_cast<long>(k));
  for (std::size_t l = 0; l + k < N; ++l) d[l] = connector_entry(lambda_i, lambda_j, k, l);
  s.set_source({OperatorSource::Kind::kConnector, lambda_i, lambda_j, static_cast<int>(k)});
  return s;
}

}  // namespace cdlab
