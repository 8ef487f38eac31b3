#pragma once

#include <complex>
#include <cstddef>
#include <map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace cdlab {

using cplx = std::complex<double>;

// Where a truncated matrix came from.
struct OperatorSource {
  enum class Kind { kAtom, kConnector, kAssembled, kDerived };
  Kind kind = Kind::kDerived;
  double lambda_i = 0.0;
  double lambda_j = 0.0;
  int shift = 0;
};

// Square complex matrix stored by diagonals.
//
// Only diagonals that have been written are stored, so weighted shifts and
// their products cost O(N) per diagonal. Offset d holds entries (r, r + d).
// The matrix may be partitioned into equal blocks of size block_dim(); the
// block structure only affects the interior-window helpers and block access.
class TruncatedOperator {
 public:
  using Diagonal = std::vector<cplx>;

  TruncatedOperator() = default;
  explicit TruncatedOperator(std::size_t dim, std::size_t block_dim = 0);

  static TruncatedOperator identity(std::size_t dim, std::size_t block_dim = 0);
  static TruncatedOperator from_dense(const Eigen::MatrixXcd& m, std::size_t block_dim = 0);

  std::size_t dim() const { return dim_; }
  std::size_t block_dim() const { return block_dim_; }
  std::size_t num_blocks() const { return block_dim_ == 0 ? 0 : dim_ / block_dim_; }

  // (lower, upper): every stored offset d satisfies -lower <= d <= upper.
  std::pair<long, long> band() const;
  // Largest (column - row) and (row - column) over nonzero entries, measured
  // inside the block each entry belongs to. Zero when the matrix is empty.
  long local_upper_band() const;
  long local_lower_band() const;

  const OperatorSource& source() const { return source_; }
  void set_source(const OperatorSource& s) { source_ = s; }

  cplx at(std::size_t r, std::size_t c) const;
  void set(std::size_t r, std::size_t c, cplx v);
  void add(std::size_t r, std::size_t c, cplx v);

  const std::map<long, Diagonal>& diagonals() const { return diags_; }
  const Diagonal* find_diagonal(long offset) const;
  Diagonal& diagonal(long offset);
  static std::size_t diagonal_length(std::size_t dim, long offset);
  // Row of element `idx` on diagonal `offset`.
  static std::size_t diagonal_row(long offset, std::size_t idx) {
    return idx + static_cast<std::size_t>(offset < 0 ? -offset : 0);
  }

  TruncatedOperator adjoint() const;
  TruncatedOperator operator*(const TruncatedOperator& rhs) const;
  TruncatedOperator operator+(const TruncatedOperator& rhs) const;
  TruncatedOperator operator-(const TruncatedOperator& rhs) const;
  TruncatedOperator operator*(cplx s) const;
  TruncatedOperator& operator+=(const TruncatedOperator& rhs);
  TruncatedOperator& operator-=(const TruncatedOperator& rhs);
  // this += alpha * rhs
  TruncatedOperator& axpy(cplx alpha, const TruncatedOperator& rhs);

  Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const;
  Eigen::VectorXcd apply_adjoint(const Eigen::VectorXcd& x) const;
  Eigen::MatrixXcd to_dense() const;

  // Block (i, j) as a block_dim x block_dim operator, and the reverse.
  TruncatedOperator block(std::size_t i, std::size_t j) const;
  void add_block(std::size_t i, std::size_t j, const TruncatedOperator& b);

  // Zero every entry whose in-block row is >= block_dim - row_margin or whose
  // in-block column is >= block_dim - col_margin.
  TruncatedOperator interior(std::size_t row_margin, std::size_t col_margin = 0) const;
  double frobenius() const;
  double squared_frobenius() const;
  double interior_frobenius(std::size_t row_margin, std::size_t col_margin = 0) const;
  double max_abs() const;

  // Drop diagonals whose entries are all exactly zero.
  void prune();
  bool empty() const { return diags_.empty(); }
  std::size_t nonzero_count() const;

  // Bitwise equality of dimensions and stored entries.
  bool identical(const TruncatedOperator& other) const;

 private:
  void check_same_shape(const TruncatedOperator& rhs) const;
  std::size_t block_of(std::size_t index) const { return index / block_dim_; }

  std::size_t dim_ = 0;
  std::size_t block_dim_ = 0;
  std::map<long, Diagonal> diags_;
  OperatorSource source_;
};

inline TruncatedOperator operator*(cplx s, const TruncatedOperator& m) { return m * s; }

}  // namespace cdlab
