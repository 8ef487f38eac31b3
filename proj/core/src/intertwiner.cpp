#include "cdlab/intertwiner.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "cdlab/analysis.hpp"
#include "cdlab/bergman.hpp"
#include "cdlab/error.hpp"

namespace cdlab {

namespace {

constexpr double kValencyTol = 1e-12;
constexpr std::size_t kMinFitLength = 64;
constexpr std::size_t kMaxPhiDegree = 32;
constexpr std::size_t kMaxProbeRank = 20;

double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  double r = 1.0;
  for (std::size_t t = 1; t <= k; ++t) r = r * static_cast<double>(n - k + t) / static_cast<double>(t);
  return r;
}

std::vector<double> log_coeff_table(double lambda, std::size_t N) {
  std::vector<double> out(N);
  for (std::size_t n = 0; n < N; ++n) out[n] = log_pochhammer_coeff(lambda, n);
  return out;
}

// Single stored diagonal of a pure forward shift, or nullptr.
const TruncatedOperator::Diagonal* single_diagonal(const TruncatedOperator& X) {
  if (X.diagonals().size() != 1) return nullptr;
  return &X.diagonals().begin()->second;
}

void attach_shift_coeffs(SylvesterSolution& sol) {
  const auto* diag = single_diagonal(sol.X);
  if (diag == nullptr || sol.X.diagonals().begin()->first > 0) return;
  sol.coeffs = *diag;
  if (sol.coeffs.size() < kMinFitLength) return;
  const std::size_t half = sol.coeffs.size() / 2;
  const bool nonzero = std::all_of(sol.coeffs.begin() + static_cast<long>(half), sol.coeffs.end(),
                                   [](const cplx& v) { return v != cplx(0.0, 0.0); });
  if (nonzero) sol.fitted_exponent = growth_exponent(sol.coeffs);
}

// Jet forms. An operator H_j → H_i is recorded by its action on the
// eigenvector t_j(w): either Σ_p a_p t_i^{(p)} (no φ) or
// Σ_{s,p} c_{s,p} φ^{(s)}(w) t_i^{(p)}(w) (linear in φ).
using ShiftJet = std::map<std::size_t, cplx>;
using PhiJet = std::map<std::pair<std::size_t, std::size_t>, cplx>;

// A ∘ B with A free of φ.
PhiJet compose(const ShiftJet& a, const PhiJet& b) {
  PhiJet out;
  for (const auto& [sp, c] : b) {
    for (const auto& [q, av] : a) out[{sp.first, q + sp.second}] += c * av;
  }
  return out;
}

// A ∘ B with B free of φ: A t^{(p)} = ∂^p (A t) and Leibniz on φ^{(s)} t^{(q)}.
PhiJet compose(const PhiJet& a, const ShiftJet& b) {
  PhiJet out;
  for (const auto& [p, bv] : b) {
    for (const auto& [sq, av] : a) {
      for (std::size_t u = 0; u <= p; ++u) out[{sq.first + u, sq.second + p - u}] += bv * av * binomial(p, u);
    }
  }
  return out;
}

void accumulate(PhiJet& into, const PhiJet& from, double sign) {
  for (const auto& [key, v] : from) into[key] += sign * v;
}

// Matrix of the operator t_j(w) ↦ Σ c_{s,p} φ^{(s)}(w) t_i^{(p)}(w).
TruncatedOperator instantiate(const PhiJet& jet, const std::vector<double>& log_a_i,
                              const std::vector<double>& log_a_j, const std::vector<cplx>& phi, std::size_t N) {
  TruncatedOperator Z(N);
  const std::size_t degree = phi.size() - 1;
  for (const auto& [sp, c] : jet) {
    const auto [s, p] = sp;
    if (c == cplx(0.0, 0.0) || s > degree) continue;
    for (std::size_t a = s; a <= degree; ++a) {
      if (phi[a] == cplx(0.0, 0.0)) continue;
      const cplx kappa = c * phi[a] * falling_factorial(a, s);
      const long offset = static_cast<long>(a) - static_cast<long>(s) - static_cast<long>(p);
      for (std::size_t row = p; row < N; ++row) {
        const long col = static_cast<long>(row) + offset;
        if (col < 0 || col >= static_cast<long>(N)) continue;
        const auto l = static_cast<std::size_t>(col);
        const double mag = falling_factorial(row, p) * std::exp(0.5 * (log_a_i[row] - log_a_j[l]));
        Z.add(row, l, kappa * mag);
      }
    }
  }
  Z.prune();
  return Z;
}

TruncatedOperator polynomial_of(const TruncatedOperator& t, const std::vector<cplx>& phi) {
  const std::size_t N = t.dim();
  TruncatedOperator p = TruncatedOperator::identity(N) * phi.back();
  for (std::size_t a = phi.size() - 1; a-- > 0;) {
    p = p * t;
    p += TruncatedOperator::identity(N) * phi[a];
  }
  p.prune();
  return p;
}

std::size_t positive(long v) { return static_cast<std::size_t>(std::max(0L, v)); }

}  // namespace

std::string to_string(Verdict v) { return v == Verdict::kBounded ? "bounded" : "divergent"; }

double growth_exponent(const std::vector<double>& coeffs) {
  if (coeffs.size() < kMinFitLength) throw ArgumentError("growth exponent needs at least 64 coefficients");
  const std::size_t start = coeffs.size() / 2;
  std::vector<double> x, y;
  for (std::size_t l = start; l < coeffs.size(); ++l) {
    if (coeffs[l] == 0.0) throw ArgumentError("zero coefficient inside the fit window");
    x.push_back(std::log(static_cast<double>(l)));
    y.push_back(std::log(std::abs(coeffs[l])));
  }
  return fit_line(x, y).slope;
}

double growth_exponent(const std::vector<cplx>& coeffs) {
  std::vector<double> mags(coeffs.size());
  std::transform(coeffs.begin(), coeffs.end(), mags.begin(), [](const cplx& v) { return std::abs(v); });
  return growth_exponent(mags);
}

std::vector<cplx> shift_recursion(double lambda_a, double lambda_b, std::size_t k, const std::vector<cplx>& rhs) {
  std::vector<cplx> x(rhs.size());
  cplx prev(0.0, 0.0);
  for (std::size_t l = 0; l < rhs.size(); ++l) {
    cplx acc = rhs[l];
    if (l > 0) acc += prev * shift_weight(lambda_b, l - 1);
    x[l] = acc / shift_weight(lambda_a, l + k);
    prev = x[l];
  }
  return x;
}

TruncatedOperator forward_shift(const std::vector<cplx>& x, std::size_t shift, std::size_t N) {
  TruncatedOperator X(N);
  if (shift >= N) return X;
  auto& d = X.diagonal(-static_cast<long>(shift));
  for (std::size_t l = 0; l < x.size() && l + shift < N; ++l) d[l] = x[l];
  X.prune();
  return X;
}

InteriorMargins sylvester_margins(const TruncatedOperator& A, const TruncatedOperator& B) {
  return {positive(A.local_upper_band()), positive(B.local_lower_band())};
}

SylvesterSolution solve_sylvester_closed(double lambda0, double lambda_k1, std::size_t k, std::size_t N) {
  if (!(lambda_k1 > lambda0)) throw DomainError("closed-form solve needs lambda_k1 > lambda0");
  if (k + 2 > N) throw ArgumentError("truncation too small for the requested shift");
  const TruncatedOperator A = build_atom(lambda0, N);
  const TruncatedOperator B = build_atom(lambda_k1, N);
  const TruncatedOperator C = build_connector(lambda0, lambda_k1, k, N);
  std::vector<cplx> rhs(N - k - 1);
  for (std::size_t l = 0; l < rhs.size(); ++l) rhs[l] = connector_entry(lambda0, lambda_k1, k, l);
  SylvesterSolution sol;
  sol.coeffs = shift_recursion(lambda0, lambda_k1, k, rhs);
  sol.X = forward_shift(sol.coeffs, k + 1, N);
  const InteriorMargins mg = sylvester_margins(A, B);
  sol.residual = (A * sol.X - sol.X * B - C).interior_frobenius(mg.rows, mg.cols);
  if (sol.coeffs.size() >= kMinFitLength) sol.fitted_exponent = growth_exponent(sol.coeffs);
  sol.bounded_verdict =
      sol.fitted_exponent && *sol.fitted_exponent >= kBoundedExponent ? Verdict::kDivergent : Verdict::kBounded;
  return sol;
}

SylvesterSolution solve_sylvester_generic(const TruncatedOperator& A, const TruncatedOperator& B,
                                          const TruncatedOperator& C, const GenericSolveOptions& options) {
  if (A.dim() != B.dim() || A.dim() != C.dim()) throw ArgumentError("A, B and C must share the truncation");
  const InteriorMargins mg = sylvester_margins(A, B);
  const TruncatedOperator A_adj = A.adjoint();
  const TruncatedOperator B_adj = B.adjoint();
  auto forward = [&](const TruncatedOperator& X) { return (A * X - X * B).interior(mg.rows, mg.cols); };
  auto backward = [&](const TruncatedOperator& R) { return A_adj * R - R * B_adj; };

  const TruncatedOperator target = C.interior(mg.rows, mg.cols);
  const double c_norm = target.frobenius();
  SylvesterSolution sol;
  sol.X = options.initial_guess ? *options.initial_guess : TruncatedOperator(A.dim());
  if (sol.X.dim() != A.dim()) throw ArgumentError("initial guess has the wrong size");

  TruncatedOperator R = target - forward(sol.X);
  R.prune();
  TruncatedOperator S = backward(R);
  TruncatedOperator P = S;
  double gamma = S.squared_frobenius();
  const double gamma0 = gamma;
  const double stop = options.relative_tolerance * c_norm;
  std::size_t it = 0;
  while (it < options.max_iterations) {
    if (R.frobenius() <= stop || gamma <= 1e-30 * gamma0 || gamma == 0.0) break;
    const TruncatedOperator Q = forward(P);
    const double qq = Q.squared_frobenius();
    if (qq == 0.0) break;
    const double alpha = gamma / qq;
    sol.X.axpy(alpha, P);
    R.axpy(-alpha, Q);
    S = backward(R);
    const double gamma_new = S.squared_frobenius();
    P = S + P * (gamma_new / gamma);
    gamma = gamma_new;
    ++it;
    if (it % 64 == 0) {
      sol.X.prune();
      R = target - forward(sol.X);
      R.prune();
      P.prune();
    }
  }
  sol.X.prune();
  sol.iterations = it;
  sol.residual = (target - forward(sol.X)).frobenius();
  sol.bounded_verdict = sol.residual <= options.acceptance * c_norm ? Verdict::kBounded : Verdict::kDivergent;
  attach_shift_coeffs(sol);
  return sol;
}

RangeProbe range_membership_probe(const std::function<SylvesterProblem(std::size_t)>& make_problem,
                                  const std::vector<std::size_t>& truncations, const GenericSolveOptions& options) {
  RangeProbe probe;
  probe.truncations = truncations;
  bool ok = true;
  for (std::size_t N : truncations) {
    const SylvesterProblem pb = make_problem(N);
    const SylvesterSolution sol = solve_sylvester_generic(pb.A, pb.B, pb.C, options);
    const InteriorMargins mg = sylvester_margins(pb.A, pb.B);
    const double c_norm = pb.C.interior_frobenius(mg.rows, mg.cols);
    probe.residuals.push_back(sol.residual);
    probe.relative_residuals.push_back(c_norm > 0.0 ? sol.residual / c_norm : sol.residual);
    probe.norms.push_back(operator_norm(sol.X).value);
    ok = ok && probe.relative_residuals.back() <= options.acceptance;
  }
  for (std::size_t t = 1; t < probe.norms.size(); ++t) {
    const double ratio = probe.norms[t - 1] > 0.0 ? probe.norms[t] / probe.norms[t - 1] : 1.0;
    probe.ratios.push_back(ratio);
    ok = ok && ratio <= kStableNormRatio;
  }
  probe.verdict = ok ? Verdict::kBounded : Verdict::kDivergent;
  return probe;
}

ReductionResult similarity_reduce(const ModelSpec& spec) {
  spec.validate();
  if (spec.valency < 2.0 - kValencyTol) throw ValencyTooSmall(spec.valency);
  const TruncatedOperator T = assemble(spec);
  const std::size_t n = spec.n;
  const std::size_t N = spec.trunc;
  using Grid = std::vector<std::vector<TruncatedOperator>>;
  Grid cur(n, std::vector<TruncatedOperator>(n, TruncatedOperator(N)));
  Grid Y(n, std::vector<TruncatedOperator>(n, TruncatedOperator(N)));
  Grid Yinv(n, std::vector<TruncatedOperator>(n, TruncatedOperator(N)));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) cur[i][j] = T.block(i, j);
    Y[i][i] = TruncatedOperator::identity(N);
    Yinv[i][i] = TruncatedOperator::identity(N);
  }

  GenericSolveOptions polish;
  polish.relative_tolerance = 1e-10;
  polish.max_iterations = 2000;

  // Clear column j from the bottom up, then move one column left. Once column
  // j is cleared, later steps never write into it again.
  for (std::size_t j = n; j-- > 1;) {
    for (std::size_t i = j; i-- > 0;) {
      const TruncatedOperator& rhs = cur[i][j];
      if (rhs.empty()) continue;
      const std::size_t k = j - i - 1;
      std::vector<cplx> c(N - k - 1);
      for (std::size_t l = 0; l < c.size(); ++l) c[l] = rhs.at(l + k, l);
      polish.initial_guess = forward_shift(shift_recursion(spec.lambda(i), spec.lambda(j), k, c), k + 1, N);
      const TruncatedOperator X = solve_sylvester_generic(cur[i][i], cur[j][j], rhs, polish).X;

      std::vector<TruncatedOperator> row_add, col_sub;
      for (std::size_t col = j; col < n; ++col) row_add.push_back(X * cur[j][col]);
      for (std::size_t row = 0; row <= i; ++row) col_sub.push_back(cur[row][i] * X);
      for (std::size_t col = j; col < n; ++col) cur[i][col] += row_add[col - j];
      for (std::size_t row = 0; row <= i; ++row) cur[row][j] -= col_sub[row];
      for (std::size_t col = 0; col < n; ++col) {
        if (!Y[j][col].empty()) Y[i][col] += X * Y[j][col];
      }
      for (std::size_t row = 0; row < n; ++row) {
        if (!Yinv[row][i].empty()) Yinv[row][j] -= Yinv[row][i] * X;
      }
      for (auto& r : cur) for (auto& b : r) b.prune();
    }
  }

  ReductionResult out;
  out.Y = TruncatedOperator(n * N, N);
  out.Y_inverse = TruncatedOperator(n * N, N);
  TruncatedOperator diag(n * N, N);
  for (std::size_t i = 0; i < n; ++i) {
    diag.add_block(i, i, build_atom(spec.lambda(i), N));
    for (std::size_t j = 0; j < n; ++j) {
      if (!Y[i][j].empty()) out.Y.add_block(i, j, Y[i][j]);
      if (!Yinv[i][j].empty()) out.Y_inverse.add_block(i, j, Yinv[i][j]);
    }
  }
  out.Y.prune();
  out.Y_inverse.prune();
  out.conjugated = out.Y * T * out.Y_inverse;
  out.margin = positive(out.Y.local_upper_band()) + positive(T.local_upper_band()) +
               positive(out.Y_inverse.local_upper_band());
  out.offdiag_residual = (out.conjugated - diag).interior_frobenius(out.margin);
  out.cond_Y = operator_norm(out.Y).value * operator_norm(out.Y_inverse).value;
  return out;
}

CommutantResult commutant_element(const ModelSpec& spec, const std::vector<cplx>& phi_in) {
  spec.validate();
  if (phi_in.empty()) throw ArgumentError("polynomial needs at least one coefficient");
  if (phi_in.size() > kMaxPhiDegree + 1) throw ArgumentError("polynomial degree above 32");
  const std::vector<cplx>& phi = phi_in;
  const TruncatedOperator T = assemble(spec);
  const Eigen::MatrixXcd m = mu_to_m(spec.mu);
  const std::size_t n = spec.n;
  const std::size_t N = spec.trunc;

  std::vector<std::vector<ShiftJet>> S(n, std::vector<ShiftJet>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::abs(m(i, j)) > kCoefficientZeroTol) S[i][j][j - i - 1] = m(i, j);
    }
  }
  std::vector<std::vector<PhiJet>> X(n, std::vector<PhiJet>(n));
  for (std::size_t i = 0; i < n; ++i) X[i][i][{0, 0}] = 1.0;
  for (std::size_t d = 2; d < n; ++d) {
    for (std::size_t i = 0; i + d < n; ++i) {
      const std::size_t j = i + d;
      PhiJet rhs;
      accumulate(rhs, compose(X[i][i], S[i][j]), 1.0);
      accumulate(rhs, compose(S[i][j], X[j][j]), -1.0);
      for (std::size_t r = i + 1; r < j; ++r) {
        accumulate(rhs, compose(X[i][r], S[r][j]), 1.0);
        accumulate(rhs, compose(S[i][r], X[r][j]), -1.0);
      }
      // S_ii Z - Z S_jj sends φ^{(s)} t_i^{(q+1)} to (q+1) φ^{(s)} t_i^{(q)}.
      for (const auto& [sq, v] : rhs) {
        if (v == cplx(0.0, 0.0)) continue;
        X[i][j][{sq.first, sq.second + 1}] = v / static_cast<double>(sq.second + 1);
      }
    }
  }

  std::vector<std::vector<double>> log_a(n);
  for (std::size_t i = 0; i < n; ++i) log_a[i] = log_coeff_table(spec.lambda(i), N);
  CommutantResult out;
  out.X = TruncatedOperator(n * N, N);
  for (std::size_t i = 0; i < n; ++i) {
    out.X.add_block(i, i, polynomial_of(build_atom(spec.lambda(i), N), phi));
    for (std::size_t j = i + 2; j < n; ++j) {
      if (X[i][j].empty()) continue;
      out.X.add_block(i, j, instantiate(X[i][j], log_a[i], log_a[j], phi, N));
    }
  }
  out.X.prune();
  const std::size_t margin = std::max(positive(T.local_upper_band()), positive(out.X.local_upper_band()));
  out.residual = (T * out.X - out.X * T).interior_frobenius(margin);
  return out;
}

IdempotentReport idempotent_probe(const ModelSpec& spec) {
  spec.validate();
  if (spec.n > kMaxProbeRank) throw ArgumentError("idempotent probe supports rank up to 20");
  const std::size_t n = spec.n;
  const Eigen::MatrixXcd m = mu_to_m(spec.mu);
  const TruncatedOperator T = assemble(spec);

  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::vector<std::vector<double>> block_norm(n, std::vector<double>(n, 0.0));
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      block_norm[i][j] = T.block(i, j).frobenius();
      if (std::abs(m(i, j)) > kCoefficientZeroTol) {
        edges.emplace_back(i, j);
        parent[find(j)] = find(i);
      }
    }
  }

  IdempotentReport report;
  for (std::size_t x = 0; x < n; ++x) report.components += find(x) == x ? 1 : 0;
  const std::uint32_t full = n == 32 ? 0xffffffffu : ((1u << n) - 1u);
  for (std::uint32_t mask = 0; mask <= full; ++mask) {
    IdempotentPattern p;
    p.mask = mask;
    auto bit = [mask](std::size_t i) { return (mask >> i) & 1u; };
    p.survives_rule = std::all_of(edges.begin(), edges.end(),
                                  [&](const auto& e) { return bit(e.first) == bit(e.second); });
    double commutator = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (bit(i) != bit(j)) commutator += block_norm[i][j];
      }
    }
    p.survives_matrix = commutator == 0.0;
    report.rule_matches_matrix = report.rule_matches_matrix && p.survives_rule == p.survives_matrix;
    report.survivors += p.survives_matrix ? 1 : 0;
    report.patterns.push_back(p);
    if (mask == full) break;
  }
  report.only_trivial = report.survivors == 2 && report.patterns.front().survives_matrix &&
                        report.patterns.back().survives_matrix;
  return report;
}

}  // namespace cdlab
