#include "cdlab/truncated_operator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "cdlab/error.hpp"

namespace cdlab {

namespace {

long as_long(std::size_t v) { return static_cast<long>(v); }

}  // namespace

TruncatedOperator::TruncatedOperator(std::size_t dim, std::size_t block_dim)
    : dim_(dim), block_dim_(block_dim == 0 ? dim : block_dim) {
  if (dim == 0) throw ArgumentError("operator dimension must be positive");
  if (dim % block_dim_ != 0) throw ArgumentError("block size must divide the dimension");
}

TruncatedOperator TruncatedOperator::identity(std::size_t dim, std::size_t block_dim) {
  TruncatedOperator id(dim, block_dim);
  id.diagonal(0).assign(dim, cplx(1.0, 0.0));
  return id;
}

TruncatedOperator TruncatedOperator::from_dense(const Eigen::MatrixXcd& m, std::size_t block_dim) {
  if (m.rows() != m.cols()) throw ArgumentError("dense matrix must be square");
  TruncatedOperator out(static_cast<std::size_t>(m.rows()), block_dim);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (m(r, c) != cplx(0.0, 0.0)) out.set(r, c, m(r, c));
    }
  }
  return out;
}

std::size_t TruncatedOperator::diagonal_length(std::size_t dim, long offset) {
  const std::size_t a = static_cast<std::size_t>(std::labs(offset));
  return a >= dim ? 0 : dim - a;
}

std::pair<long, long> TruncatedOperator::band() const {
  if (diags_.empty()) return {0, 0};
  return {-diags_.begin()->first, diags_.rbegin()->first};
}

long TruncatedOperator::local_upper_band() const {
  long best = 0;
  bool any = false;
  for (const auto& [d, diag] : diags_) {
    for (std::size_t idx = 0; idx < diag.size(); ++idx) {
      if (diag[idx] == cplx(0.0, 0.0)) continue;
      const std::size_t r = diagonal_row(d, idx);
      const std::size_t c = r + d;
      const long local = as_long(c % block_dim_) - as_long(r % block_dim_);
      if (!any || local > best) best = local;
      any = true;
    }
  }
  return any ? best : 0;
}

long TruncatedOperator::local_lower_band() const {
  long best = 0;
  bool any = false;
  for (const auto& [d, diag] : diags_) {
    for (std::size_t idx = 0; idx < diag.size(); ++idx) {
      if (diag[idx] == cplx(0.0, 0.0)) continue;
      const std::size_t r = diagonal_row(d, idx);
      const std::size_t c = r + d;
      const long local = as_long(r % block_dim_) - as_long(c % block_dim_);
      if (!any || local > best) best = local;
      any = true;
    }
  }
  return any ? best : 0;
}

cplx TruncatedOperator::at(std::size_t r, std::size_t c) const {
  if (r >= dim_ || c >= dim_) throw ArgumentError("entry index out of range");
  const long d = as_long(c) - as_long(r);
  auto it = diags_.find(d);
  if (it == diags_.end()) return {0.0, 0.0};
  return it->second[std::min(r, c)];
}

void TruncatedOperator::set(std::size_t r, std::size_t c, cplx v) {
  if (r >= dim_ || c >= dim_) throw ArgumentError("entry index out of range");
  diagonal(as_long(c) - as_long(r))[std::min(r, c)] = v;
}

void TruncatedOperator::add(std::size_t r, std::size_t c, cplx v) {
  if (r >= dim_ || c >= dim_) throw ArgumentError("entry index out of range");
  diagonal(as_long(c) - as_long(r))[std::min(r, c)] += v;
}

const TruncatedOperator::Diagonal* TruncatedOperator::find_diagonal(long offset) const {
  auto it = diags_.find(offset);
  return it == diags_.end() ? nullptr : &it->second;
}

TruncatedOperator::Diagonal& TruncatedOperator::diagonal(long offset) {
  const std::size_t len = diagonal_length(dim_, offset);
  if (len == 0) throw ArgumentError("diagonal offset outside the matrix");
  auto it = diags_.find(offset);
  if (it == diags_.end()) it = diags_.emplace(offset, Diagonal(len, cplx(0.0, 0.0))).first;
  return it->second;
}

TruncatedOperator TruncatedOperator::adjoint() const {
  TruncatedOperator out(dim_, block_dim_);
  for (const auto& [d, diag] : diags_) {
    Diagonal& dst = out.diagonal(-d);
    for (std::size_t i = 0; i < diag.size(); ++i) dst[i] = std::conj(diag[i]);
  }
  return out;
}

void TruncatedOperator::check_same_shape(const TruncatedOperator& rhs) const {
  if (dim_ != rhs.dim_) throw ArgumentError("operator dimensions differ");
}

TruncatedOperator TruncatedOperator::operator*(const TruncatedOperator& rhs) const {
  check_same_shape(rhs);
  TruncatedOperator out(dim_, block_dim_);
  const long n = as_long(dim_);
  for (const auto& [da, a] : diags_) {
    for (const auto& [db, b] : rhs.diags_) {
      const long d = da + db;
      if (std::labs(d) >= n) continue;
      // r runs over rows valid on diagonal da whose image m = r + da is a
      // valid row of diagonal db.
      const long r_lo = std::max({0L, -da, -da - db});
      const long r_hi = std::min({n - da, n, n - da - db});  // exclusive
      if (r_lo >= r_hi) continue;
      Diagonal& dst = out.diagonal(d);
      const long off_a = da < 0 ? -da : 0;
      const long off_b = db < 0 ? -db : 0;
      const long off_d = d < 0 ? -d : 0;
      for (long r = r_lo; r < r_hi; ++r) {
        const long m = r + da;
        dst[r - off_d] += a[r - off_a] * b[m - off_b];
      }
    }
  }
  out.prune();
  return out;
}

TruncatedOperator TruncatedOperator::operator+(const TruncatedOperator& rhs) const {
  TruncatedOperator out = *this;
  out += rhs;
  out.source_ = OperatorSource{};
  return out;
}

TruncatedOperator TruncatedOperator::operator-(const TruncatedOperator& rhs) const {
  TruncatedOperator out = *this;
  out -= rhs;
  out.source_ = OperatorSource{};
  return out;
}

TruncatedOperator TruncatedOperator::operator*(cplx s) const {
  TruncatedOperator out(dim_, block_dim_);
  for (const auto& [d, diag] : diags_) {
    Diagonal& dst = out.diagonal(d);
    for (std::size_t i = 0; i < diag.size(); ++i) dst[i] = diag[i] * s;
  }
  return out;
}

TruncatedOperator& TruncatedOperator::operator+=(const TruncatedOperator& rhs) {
  return axpy(cplx(1.0, 0.0), rhs);
}

TruncatedOperator& TruncatedOperator::operator-=(const TruncatedOperator& rhs) {
  return axpy(cplx(-1.0, 0.0), rhs);
}

TruncatedOperator& TruncatedOperator::axpy(cplx alpha, const TruncatedOperator& rhs) {
  check_same_shape(rhs);
  for (const auto& [d, diag] : rhs.diags_) {
    Diagonal& dst = diagonal(d);
    for (std::size_t i = 0; i < diag.size(); ++i) dst[i] += alpha * diag[i];
  }
  return *this;
}

Eigen::VectorXcd TruncatedOperator::apply(const Eigen::VectorXcd& x) const {
  if (static_cast<std::size_t>(x.size()) != dim_) throw ArgumentError("vector length mismatch");
  Eigen::VectorXcd y = Eigen::VectorXcd::Zero(x.size());
  for (const auto& [d, diag] : diags_) {
    for (std::size_t i = 0; i < diag.size(); ++i) {
      const std::size_t r = diagonal_row(d, i);
      y[r] += diag[i] * x[r + d];
    }
  }
  return y;
}

Eigen::VectorXcd TruncatedOperator::apply_adjoint(const Eigen::VectorXcd& x) const {
  if (static_cast<std::size_t>(x.size()) != dim_) throw ArgumentError("vector length mismatch");
  Eigen::VectorXcd y = Eigen::VectorXcd::Zero(x.size());
  for (const auto& [d, diag] : diags_) {
    for (std::size_t i = 0; i < diag.size(); ++i) {
      const std::size_t r = diagonal_row(d, i);
      y[r + d] += std::conj(diag[i]) * x[r];
    }
  }
  return y;
}

Eigen::MatrixXcd TruncatedOperator::to_dense() const {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim_, dim_);
  for (const auto& [d, diag] : diags_) {
    for (std::size_t i = 0; i < diag.size(); ++i) {
      const std::size_t r = diagonal_row(d, i);
      m(r, r + d) = diag[i];
    }
  }
  return m;
}

TruncatedOperator TruncatedOperator::block(std::size_t i, std::size_t j) const {
  const std::size_t nb = num_blocks();
  if (i >= nb || j >= nb) throw ArgumentError("block index out of range");
  const std::size_t N = block_dim_;
  TruncatedOperator out(N);
  const long shift = as_long(j) * as_long(N) - as_long(i) * as_long(N);
  for (const auto& [d, diag] : diags_) {
    const long local = d - shift;
    if (std::labs(local) >= as_long(N)) continue;
    for (std::size_t lr = 0; lr < N; ++lr) {
      const long lc = as_long(lr) + local;
      if (lc < 0 || lc >= as_long(N)) continue;
      const std::size_t r = i * N + lr;
      const std::size_t c = j * N + static_cast<std::size_t>(lc);
      const cplx value = diag[std::min(r, c)];
      if (value != cplx(0.0, 0.0)) out.diagonal(local)[std::min(lr, static_cast<std::size_t>(lc))] = value;
    }
  }
  return out;
}

void TruncatedOperator::add_block(std::size_t i, std::size_t j, const TruncatedOperator& b) {
  const std::size_t nb = num_blocks();
  if (i >= nb || j >= nb) throw ArgumentError("block index out of range");
  if (b.dim_ != block_dim_) throw ArgumentError("block has the wrong size");
  const std::size_t N = block_dim_;
  for (const auto& [d, diag] : b.diags_) {
    const long global = d + as_long(j) * as_long(N) - as_long(i) * as_long(N);
    Diagonal& dst = diagonal(global);
    for (std::size_t idx = 0; idx < diag.size(); ++idx) {
      if (diag[idx] == cplx(0.0, 0.0)) continue;
      const std::size_t lr = diagonal_row(d, idx);
      const std::size_t r = i * N + lr;
      const std::size_t c = j * N + lr + d;
      dst[std::min(r, c)] += diag[idx];
    }
  }
}

TruncatedOperator TruncatedOperator::interior(std::size_t row_margin, std::size_t col_margin) const {
  TruncatedOperator out = *this;
  const std::size_t N = block_dim_;
  for (auto& [d, diag] : out.diags_) {
    for (std::size_t idx = 0; idx < diag.size(); ++idx) {
      const std::size_t r = diagonal_row(d, idx);
      const std::size_t c = r + d;
      if (r % N + row_margin >= N || c % N + col_margin >= N) diag[idx] = 0.0;
    }
  }
  out.prune();
  return out;
}

double TruncatedOperator::squared_frobenius() const {
  double s = 0.0;
  for (const auto& [d, diag] : diags_) {
    for (const cplx& v : diag) s += std::norm(v);
  }
  return s;
}

double TruncatedOperator::frobenius() const { return std::sqrt(squared_frobenius()); }

double TruncatedOperator::interior_frobenius(std::size_t row_margin, std::size_t col_margin) const {
  const std::size_t N = block_dim_;
  double s = 0.0;
  for (const auto& [d, diag] : diags_) {
    for (std::size_t idx = 0; idx < diag.size(); ++idx) {
      const std::size_t r = diagonal_row(d, idx);
      const std::size_t c = r + d;
      if (r % N + row_margin >= N || c % N + col_margin >= N) continue;
      s += std::norm(diag[idx]);
    }
  }
  return std::sqrt(s);
}

double TruncatedOperator::max_abs() const {
  double m = 0.0;
  for (const auto& [d, diag] : diags_) {
    for (const cplx& v : diag) m = std::max(m, std::abs(v));
  }
  return m;
}

void TruncatedOperator::prune() {
  for (auto it = diags_.begin(); it != diags_.end();) {
    const bool zero = std::all_of(it->second.begin(), it->second.end(),
                                  [](const cplx& v) { return v == cplx(0.0, 0.0); });
    it = zero ? diags_.erase(it) : std::next(it);
  }
}

std::size_t TruncatedOperator::nonzero_count() const {
  std::size_t count = 0;
  for (const auto& [d, diag] : diags_) {
    count += static_cast<std::size_t>(
        std::count_if(diag.begin(), diag.end(), [](const cplx& v) { return v != cplx(0.0, 0.0); }));
  }
  return count;
}

bool TruncatedOperator::identical(const TruncatedOperator& other) const {
  return dim_ == other.dim_ && block_dim_ == other.block_dim_ && diags_ == other.diags_;
}

}  // namespace cdlab
