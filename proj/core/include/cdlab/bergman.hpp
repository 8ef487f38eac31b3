#pragma once

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

#include "cdlab/truncated_operator.hpp"

namespace cdlab {

// Weight of the kernel (1 - z conj(w))^(-lambda).
struct KernelParam {
  double lambda;
  explicit KernelParam(double l);
};

// log Γ(x) for x > 0, safe to call from several threads.
double log_gamma(double x);

// log a_n(λ) with a_n(λ) = (λ)_n / n!.
double log_pochhammer_coeff(double lambda, std::size_t n);
double pochhammer_coeff(double lambda, std::size_t n);

// Rising factorial (x)_k = x (x+1) ... (x+k-1).
double rising_factorial(double x, std::size_t k);
// n! / (n-k)!, zero when k > n.
double falling_factorial(std::size_t n, std::size_t k);

// sqrt((n+1)/(n+λ)).
double shift_weight(double lambda, std::size_t n);

// (1 - z conj(w))^(-λ), principal branch.
cplx kernel_value(double lambda, cplx z, cplx w);

// ∂_w^p ∂_{w̄}^q of (1 - w w̄)^(-λ), treating w and w̄ as independent.
cplx kernel_diagonal_derivative(double lambda, std::size_t p, std::size_t q, cplx w);

// Backward weighted shift: entry (n-1, n) = w_{n-1}.
TruncatedOperator build_atom(double lambda, std::size_t N);

// Coefficients of the order-th w-derivative of the eigenvector t(w).
struct SectionVector {
  Eigen::VectorXcd coeffs;
  double lambda = 0.0;
  cplx point;
  std::size_t order = 0;
};

SectionVector section(double lambda, cplx w, std::size_t order, std::size_t N);

// Forward shift of multiplicity k taking t_j(w) to t_i^{(k)}(w):
// e_l ↦ ((l+k)!/l!) sqrt(a_{l+k}(λ_i)/a_l(λ_j)) e_{l+k}.
TruncatedOperator build_connector(double lambda_i, double lambda_j, std::size_t k, std::size_t N);

// Single entry of build_connector for column l.
double connector_entry(double lambda_i, double lambda_j, std::size_t k, std::size_t l);

}  // namespace cdlab
