#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cdlab/atomic_model.hpp"
#include "cdlab/truncated_operator.hpp"

namespace cdlab {

enum class Verdict { kBounded, kDivergent };
std::string to_string(Verdict v);

// Solution of A X - X B = C on the interior window.
struct SylvesterSolution {
  TruncatedOperator X;
  double residual = 0.0;
  std::vector<cplx> coeffs;               // x_l when X is a forward shift
  std::optional<double> fitted_exponent;  // present when coeffs has >= 64 entries
  Verdict bounded_verdict = Verdict::kBounded;
  std::size_t iterations = 0;
};

// Fitted exponents below this count as bounded growth.
inline constexpr double kBoundedExponent = 0.1;

// Least-squares slope of log|x_l| against log l over the second half.
double growth_exponent(const std::vector<double>& coeffs);
double growth_exponent(const std::vector<cplx>& coeffs);

// x_l solving x_l w_{l+k}(λ_a) - x_{l-1} w_{l-1}(λ_b) = c_l for l = 0..L-1,
// the forward-shift ansatz for S_aa X - X S_bb = C with C a shift of
// multiplicity k and X a shift of multiplicity k+1.
std::vector<cplx> shift_recursion(double lambda_a, double lambda_b, std::size_t k, const std::vector<cplx>& rhs);

// Forward shift of multiplicity `shift` with entries (l + shift, l) = x_l.
TruncatedOperator forward_shift(const std::vector<cplx>& x, std::size_t shift, std::size_t N);

SylvesterSolution solve_sylvester_closed(double lambda0, double lambda_k1, std::size_t k, std::size_t N);

struct GenericSolveOptions {
  std::size_t max_iterations = 50000;
  double relative_tolerance = 1e-12;  // stop when ‖R‖ ≤ tol·‖C‖
  double acceptance = 1e-6;           // residual ≤ acceptance·‖C‖ counts as solved
  std::optional<TruncatedOperator> initial_guess;
};

// Rows within local_upper(A) of a block end and columns within local_lower(B)
// of a block end are excluded from the residual.
struct InteriorMargins {
  std::size_t rows = 0;
  std::size_t cols = 0;
};
InteriorMargins sylvester_margins(const TruncatedOperator& A, const TruncatedOperator& B);

// Conjugate gradients on the normal equations of X ↦ P(AX - XB), with P the
// interior-window projection.
SylvesterSolution solve_sylvester_generic(const TruncatedOperator& A, const TruncatedOperator& B,
                                          const TruncatedOperator& C, const GenericSolveOptions& options = {});

// Generic solve repeated at several truncations; bounded when every solve
// reaches the acceptance residual and ‖X‖ changes by at most
// kStableNormRatio per step.
inline constexpr double kStableNormRatio = 1.1;

struct RangeProbe {
  std::vector<std::size_t> truncations;
  std::vector<double> residuals;
  std::vector<double> relative_residuals;
  std::vector<double> norms;
  std::vector<double> ratios;
  Verdict verdict = Verdict::kBounded;
};

struct SylvesterProblem {
  TruncatedOperator A, B, C;
};

RangeProbe range_membership_probe(const std::function<SylvesterProblem(std::size_t)>& make_problem,
                                  const std::vector<std::size_t>& truncations,
                                  const GenericSolveOptions& options = {});

struct ReductionResult {
  TruncatedOperator Y;
  TruncatedOperator Y_inverse;
  TruncatedOperator conjugated;  // Y T Y⁻¹
  double offdiag_residual = 0.0;
  double cond_Y = 0.0;
  std::size_t margin = 0;        // trailing rows per block excluded from residuals

  // conjugated with the trailing `margin` rows of every block cleared.
  TruncatedOperator interior_conjugated() const { return conjugated.interior(margin); }
};

ReductionResult similarity_reduce(const ModelSpec& spec);

struct CommutantResult {
  TruncatedOperator X;
  double residual = 0.0;
};

// φ given by coefficients φ_0, φ_1, ... (degree ≤ 32).
CommutantResult commutant_element(const ModelSpec& spec, const std::vector<cplx>& phi);

struct IdempotentPattern {
  std::uint32_t mask = 0;        // bit i set: P_ii = I
  bool survives_rule = false;    // P_ii = P_jj whenever S_ij ≠ 0
  bool survives_matrix = false;  // ‖PT - TP‖ = 0 on the assembled matrix
};

struct IdempotentReport {
  std::vector<IdempotentPattern> patterns;
  std::size_t survivors = 0;
  std::size_t components = 0;  // connected components of the coupling graph
  bool only_trivial = false;
  bool rule_matches_matrix = true;
};

IdempotentReport idempotent_probe(const ModelSpec& spec);

}  // namespace cdlab
