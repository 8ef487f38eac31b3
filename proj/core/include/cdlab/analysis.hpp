#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cdlab/atomic_model.hpp"
#include "cdlab/truncated_operator.hpp"

namespace cdlab {

enum class NormMethod {
  kAuto,            // exact per decoupled component when components are small
  kPowerIteration,  // power iteration on M*M for the whole matrix
};

struct NormEstimate {
  double value = 0.0;
  bool converged = true;
  std::size_t iterations = 0;
};

// Components up to this many columns are handled by a dense SVD.
inline constexpr std::size_t kExactComponentLimit = 256;

NormEstimate operator_norm(const TruncatedOperator& M, double tol = 1e-10,
                           NormMethod method = NormMethod::kAuto, std::size_t max_iterations = 20000);

enum class PowerClass { kPowerBounded, kDivergent, kInconclusive };
std::string to_string(PowerClass c);

inline constexpr double kDivergentSlope = 0.1;
inline constexpr double kDivergentR2 = 0.9;
inline constexpr double kTailTolerance = 1e-6;

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

// Least squares y = slope·x + intercept.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// Roughly geometric integers 1 = n_0 < n_1 < ... = n_max.
std::vector<std::size_t> geometric_schedule(std::size_t n_max, std::size_t points = 24);

struct PowerTrace {
  std::vector<std::size_t> n_values;
  std::vector<double> norms;
  std::vector<double> cumulative_slopes;  // slope of the fit over the first k points
  PowerClass classification = PowerClass::kInconclusive;
  double slope = 0.0;
  double r2 = 0.0;
  double max_tail_ratio = 0.0;
};

struct PowerTraceOptions {
  // Trailing rows per block of T that are not exact; they spread by the upper
  // band with every power and are excluded from the norm.
  std::size_t edge_margin = 0;
  double tol = 1e-9;
};

// Slope fitted over schedule points with n ≥ sqrt(n_max).
PowerTrace power_trace(const TruncatedOperator& T, std::size_t n_max, const PowerTraceOptions& options = {});
PowerTrace power_trace(const ModelSpec& spec, std::size_t n_max, std::size_t N);

struct CrossTermTrace {
  std::vector<std::size_t> n_values;
  std::vector<double> norms;  // ‖n T_0^{n-1} S_01‖
  double slope = 0.0;
  double r2 = 0.0;
};

CrossTermTrace cross_term_trace(double lambda0, double lambda1, std::size_t n_max, std::size_t N,
                                cplx coupling = {1.0, 0.0});

}  // namespace cdlab
