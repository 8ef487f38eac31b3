#include "cdlab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "cdlab/bergman.hpp"
#include "cdlab/error.hpp"

namespace cdlab {

namespace {

struct DisjointSets {
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<std::size_t> parent;
};

struct Entry {
  std::size_t r, c;
  cplx v;
};

std::vector<Entry> nonzero_entries(const TruncatedOperator& M) {
  std::vector<Entry> out;
  for (const auto& [d, diag] : M.diagonals()) {
    for (std::size_t i = 0; i < diag.size(); ++i) {
      if (diag[i] == cplx(0.0, 0.0)) continue;
      const std::size_t r = TruncatedOperator::diagonal_row(d, i);
      out.push_back({r, r + d, diag[i]});
    }
  }
  return out;
}

// The matrix is block diagonal after permuting rows and columns by connected
// components of its bipartite sparsity graph; the norm is the largest
// component norm. Returns a negative value when a component is too large.
double component_norm(const TruncatedOperator& M) {
  const std::size_t n = M.dim();
  const std::vector<Entry> entries = nonzero_entries(M);
  if (entries.empty()) return 0.0;
  DisjointSets sets(2 * n);
  for (const Entry& e : entries) sets.unite(e.r, n + e.c);
  std::vector<std::size_t> rows(2 * n, 0), cols(2 * n, 0);
  std::vector<std::size_t> local(2 * n, static_cast<std::size_t>(-1));
  for (const Entry& e : entries) {
    const std::size_t root = sets.find(e.r);
    if (local[e.r] == static_cast<std::size_t>(-1)) local[e.r] = rows[root]++;
    if (local[n + e.c] == static_cast<std::size_t>(-1)) local[n + e.c] = cols[root]++;
  }
  for (std::size_t x = 0; x < 2 * n; ++x) {
    if (rows[x] > kExactComponentLimit || cols[x] > kExactComponentLimit) return -1.0;
  }
  double best = 0.0;
  std::vector<Eigen::MatrixXcd> blocks(2 * n);
  for (const Entry& e : entries) {
    const std::size_t root = sets.find(e.r);
    if (rows[root] == 1 && cols[root] == 1) {
      best = std::max(best, std::abs(e.v));
      continue;
    }
    Eigen::MatrixXcd& b = blocks[root];
    if (b.size() == 0) b = Eigen::MatrixXcd::Zero(rows[root], cols[root]);
    b(local[e.r], local[n + e.c]) = e.v;
  }
  for (const Eigen::MatrixXcd& b : blocks) {
    if (b.size() == 0) continue;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(b);
    best = std::max(best, svd.singularValues()(0));
  }
  return best;
}

NormEstimate power_iteration(const TruncatedOperator& M, double tol, std::size_t max_iterations) {
  const auto n = static_cast<Eigen::Index>(M.dim());
  std::mt19937_64 rng(0x5eedULL);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXcd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = cplx(1.0 + 0.25 * u(rng), 0.25 * u(rng));
  v.normalize();
  NormEstimate est;
  est.converged = false;
  double previous = 0.0;
  for (std::size_t it = 1; it <= max_iterations; ++it) {
    const Eigen::VectorXcd mv = M.apply(v);
    const double sigma = mv.norm();
    est.value = sigma;
    est.iterations = it;
    if (sigma == 0.0) {
      est.converged = true;
      break;
    }
    if (it > 1 && std::abs(sigma - previous) <= tol * sigma) {
      est.converged = true;
      break;
    }
    previous = sigma;
    v = M.apply_adjoint(mv);
    const double nv = v.norm();
    if (nv == 0.0) {
      est.converged = true;
      break;
    }
    v /= nv;
  }
  return est;
}

std::vector<double> logs(const std::vector<std::size_t>& values) {
  std::vector<double> out;
  out.reserve(values.size());
  for (std::size_t v : values) out.push_back(std::log(static_cast<double>(v)));
  return out;
}

// Fit log norm against log n over schedule points with n ≥ sqrt(n_max).
LineFit fit_tail(const std::vector<std::size_t>& ns, const std::vector<double>& norms) {
  if (ns.empty()) return {};
  const double cut = std::sqrt(static_cast<double>(ns.back()));
  std::vector<double> x, y;
  for (std::size_t k = 0; k < ns.size(); ++k) {
    if (static_cast<double>(ns[k]) + 1e-12 < cut || !(norms[k] > 0.0)) continue;
    x.push_back(std::log(static_cast<double>(ns[k])));
    y.push_back(std::log(norms[k]));
  }
  if (x.size() < 2) return {};
  return fit_line(x, y);
}

}  // namespace

NormEstimate operator_norm(const TruncatedOperator& M, double tol, NormMethod method, std::size_t max_iterations) {
  if (!(tol > 0.0)) throw ArgumentError("norm tolerance must be positive");
  if (method == NormMethod::kAuto) {
    const double exact = component_norm(M);
    if (exact >= 0.0) return {exact, true, 0};
  }
  return power_iteration(M, tol, max_iterations);
}

std::string to_string(PowerClass c) {
  switch (c) {
    case PowerClass::kPowerBounded: return "power-bounded";
    case PowerClass::kDivergent: return "divergent";
    case PowerClass::kInconclusive: return "inconclusive";
  }
  return "unknown";
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ArgumentError("line fit needs at least two points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw ArgumentError("line fit needs distinct abscissae");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  const double ss_res = syy - f.slope * sxy;
  f.r2 = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  return f;
}

std::vector<std::size_t> geometric_schedule(std::size_t n_max, std::size_t points) {
  if (n_max == 0) throw ArgumentError("schedule needs n_max >= 1");
  std::vector<std::size_t> out;
  const std::size_t count = std::max<std::size_t>(points, 2);
  for (std::size_t k = 0; k < count; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(count - 1);
    const auto v = static_cast<std::size_t>(std::llround(std::exp(t * std::log(static_cast<double>(n_max)))));
    if (out.empty() || v > out.back()) out.push_back(std::min(v, n_max));
  }
  if (out.back() != n_max) out.push_back(n_max);
  return out;
}

PowerTrace power_trace(const TruncatedOperator& T, std::size_t n_max, const PowerTraceOptions& options) {
  PowerTrace trace;
  trace.n_values = geometric_schedule(n_max);
  const auto upper = static_cast<std::size_t>(std::max(0L, T.local_upper_band()));
  TruncatedOperator power = T;
  std::size_t next = 0;
  for (std::size_t n = 1; n <= n_max && next < trace.n_values.size(); ++n) {
    if (n > 1) power = power * T;
    if (n != trace.n_values[next]) continue;
    ++next;
    double value = 0.0;
    if (options.edge_margin > 0) {
      const std::size_t margin = options.edge_margin + (n - 1) * upper;
      const TruncatedOperator inner = power.interior(margin);
      const double tail = (power - inner).frobenius();
      value = operator_norm(inner, options.tol).value;
      const double ratio = value > 0.0 ? tail / value : (tail > 0.0 ? INFINITY : 0.0);
      trace.max_tail_ratio = std::max(trace.max_tail_ratio, ratio);
    } else {
      value = operator_norm(power, options.tol).value;
    }
    trace.norms.push_back(value);
  }
  for (std::size_t k = 0; k < trace.norms.size(); ++k) {
    if (k == 0 || trace.norms[0] <= 0.0 || trace.norms[k] <= 0.0) {
      trace.cumulative_slopes.push_back(0.0);
      continue;
    }
    std::vector<double> x = logs({trace.n_values.begin(), trace.n_values.begin() + k + 1});
    std::vector<double> y;
    for (std::size_t q = 0; q <= k; ++q) y.push_back(std::log(std::max(trace.norms[q], 1e-300)));
    trace.cumulative_slopes.push_back(fit_line(x, y).slope);
  }
  const LineFit fit = fit_tail(trace.n_values, trace.norms);
  trace.slope = fit.slope;
  trace.r2 = fit.r2;
  if (trace.max_tail_ratio > kTailTolerance) {
    trace.classification = PowerClass::kInconclusive;
  } else if (trace.slope >= kDivergentSlope && trace.r2 >= kDivergentR2) {
    trace.classification = PowerClass::kDivergent;
  } else if (trace.slope < kDivergentSlope) {
    trace.classification = PowerClass::kPowerBounded;
  } else {
    trace.classification = PowerClass::kInconclusive;
  }
  return trace;
}

PowerTrace power_trace(const ModelSpec& spec, std::size_t n_max, std::size_t N) {
  ModelSpec s = spec;
  s.trunc = N;
  return power_trace(assemble(s), n_max);
}

CrossTermTrace cross_term_trace(double lambda0, double lambda1, std::size_t n_max, std::size_t N, cplx coupling) {
  CrossTermTrace trace;
  trace.n_values = geometric_schedule(n_max);
  const TruncatedOperator t0 = build_atom(lambda0, N);
  TruncatedOperator power = build_connector(lambda0, lambda1, 0, N) * coupling;
  power.prune();
  std::size_t next = 0;
  for (std::size_t n = 1; n <= n_max && next < trace.n_values.size(); ++n) {
    if (n > 1) power = t0 * power;
    if (n != trace.n_values[next]) continue;
    ++next;
    trace.norms.push_back(static_cast<double>(n) * operator_norm(power).value);
  }
  const LineFit fit = fit_tail(trace.n_values, trace.norms);
  trace.slope = fit.slope;
  trace.r2 = fit.r2;
  return trace;
}

}  // namespace cdlab
