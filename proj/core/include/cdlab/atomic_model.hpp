#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cdlab/truncated_operator.hpp"

namespace cdlab {

// Coefficients smaller than this in modulus are treated as zero when deciding
// whether a forced-zero position is occupied.
inline constexpr double kCoefficientZeroTol = 1e-12;

// Defining data of a quasi-homogeneous operator: atoms with weights
// λ_i = λ0 + iΛ, frame coefficients μ (unit diagonal), truncation N per atom.
struct ModelSpec {
  double lambda0 = 1.0;
  double valency = 2.0;
  std::size_t n = 2;
  Eigen::MatrixXcd mu;
  std::size_t trunc = 512;

  // μ = identity; off-diagonal entries set afterwards.
  static ModelSpec make(double lambda0, double valency, std::size_t n, std::size_t trunc = 512);

  double lambda(std::size_t i) const { return lambda0 + static_cast<double>(i) * valency; }
  // Throws ArgumentError or DomainError describing the first violated rule.
  void validate() const;
};

// μ and the connector coefficients m linked by the frame recursion.
struct CoefficientTable {
  Eigen::MatrixXcd mu;
  Eigen::MatrixXcd m;
};

Eigen::MatrixXcd mu_to_m(const Eigen::MatrixXcd& mu);
Eigen::MatrixXcd m_to_mu(const Eigen::MatrixXcd& m);
CoefficientTable coefficient_table(const ModelSpec& spec);

enum class EntryTag { kDiagonal, kBoundedNonzero, kForcedZero };

// Which valency interval the model falls in.
enum class ValencyRegime {
  kAtLeastTwo,   // Λ ≥ 2: every connector bounded
  kAllBounded,   // 2 - 2/(n-1) ≤ Λ < 2: every connector bounded
  kBanded,       // some spans forced to zero, the first superdiagonal and more survive
  kBidiagonal,   // only adjacent connectors survive
};

std::string to_string(EntryTag tag);
std::string to_string(ValencyRegime regime);

struct BoundednessVerdict {
  std::vector<std::vector<EntryTag>> tags;  // n x n; entries with i >= j carry kDiagonal
  ValencyRegime regime = ValencyRegime::kAtLeastTwo;
  // Largest j - i whose connector stays bounded (n - 1 when nothing is forced).
  std::size_t max_bounded_span = 0;

  bool forced_zero(std::size_t i, std::size_t j) const { return tags[i][j] == EntryTag::kForcedZero; }
};

// True when (λ_j - λ_i) < 2(j - i) - 2 for a span of j - i atoms.
bool span_forced_zero(double valency, std::size_t span);

BoundednessVerdict classify_boundedness(const ModelSpec& spec);

// (nN) x (nN) block upper-triangular operator: atoms on the diagonal and
// m_{i,j} times the connector of shift j-i-1 in block (i, j).
TruncatedOperator assemble(const ModelSpec& spec);

// max_i of the interior Frobenius norm of T_ii S_{i,i+1} - S_{i,i+1} T_{i+1,i+1}.
double check_intertwining(const ModelSpec& spec);
double check_intertwining(const TruncatedOperator& assembled);

struct HomogeneityResult {
  bool homogeneous = false;
  std::optional<std::vector<double>> recovered;  // μ_0 = 1, μ_1, ...
};

// Γ for the pair p < q: binom(q, p) / (λ_p)_{q-p}.
double homogeneity_gamma(const ModelSpec& spec, std::size_t p, std::size_t q);
HomogeneityResult is_homogeneous(const ModelSpec& spec, double tol);

// γ_j(w) = Σ_{i≤j} μ_{i,j} t_i^{(j-i)}(w) in block coordinates (length nN).
Eigen::VectorXcd frame_vector(const ModelSpec& spec, cplx w, std::size_t j);

}  // namespace cdlab
