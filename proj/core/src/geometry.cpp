#include "cdlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "cdlab/bergman.hpp"
#include "cdlab/error.hpp"
#include "cdlab/parallel.hpp"

namespace cdlab {

namespace {

constexpr double kRouteTolerance = 1e-6;
constexpr double kMaxCondition = 1e10;
constexpr double kEqualCoefficientTol = 1e-12;

void require_disc(cplx w) {
  if (!(std::abs(w) < 1.0)) throw DomainError("point must lie in the open unit disc");
}

void require_stencil(cplx w, double step) {
  if (!(step > 0.0)) throw ArgumentError("finite-difference step must be positive");
  if (!(std::abs(w) + 2.0 * step < 1.0)) throw DomainError("stencil leaves the unit disc");
}

// ∂f and ∂̄f from a stencil: ∂ = (∂x - i∂y)/2, ∂̄ = (∂x + i∂y)/2.
template <class T>
T wirtinger_d(const Stencil<T>& s, double step) {
  const cplx i(0.0, 1.0);
  return ((s.east - s.west) - i * (s.north - s.south)) / (4.0 * step);
}

template <class T>
T wirtinger_dbar(const Stencil<T>& s, double step) {
  const cplx i(0.0, 1.0);
  return ((s.east - s.west) + i * (s.north - s.south)) / (4.0 * step);
}

// ∂∂̄ = Δ/4 with the five-point Laplacian.
template <class T>
T wirtinger_mixed(const Stencil<T>& s, double step) {
  return (s.east + s.west + s.north + s.south - 4.0 * s.center) / (4.0 * step * step);
}

void check_conditioning(const Eigen::MatrixXcd& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(h, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kMaxCondition) {
    throw NumericalError("grammian is not positive definite or has condition above 1e10");
  }
}

ModelSpec adjacent_pair(const ModelSpec& spec, std::size_t i) {
  ModelSpec pair = ModelSpec::make(spec.lambda(i), spec.valency, 2, spec.trunc);
  pair.mu(0, 1) = spec.mu(i, i + 1);
  return pair;
}

}  // namespace

DiscGrid DiscGrid::polar(const std::vector<double>& radii, std::size_t angle_count, double step) {
  if (angle_count == 0) throw ArgumentError("grid needs at least one angle");
  DiscGrid g;
  g.step = step;
  for (double r : radii) {
    for (std::size_t a = 0; a < angle_count; ++a) {
      const double theta = 2.0 * std::numbers::pi * static_cast<double>(a) / static_cast<double>(angle_count);
      g.points.push_back(std::polar(r, theta));
    }
  }
  g.validate();
  return g;
}

DiscGrid DiscGrid::default_grid() { return polar({0.1, 0.2, 0.3, 0.4, 0.5, 0.6}, 16); }

void DiscGrid::validate() const {
  if (!(step > 0.0)) throw ArgumentError("grid step must be positive");
  for (const cplx& p : points) {
    if (std::abs(p) > 1.0 - 2.0 * step) throw DomainError("grid point closer than 2*step to the unit circle");
  }
}

Eigen::MatrixXcd grammian_from_sections(const ModelSpec& spec, cplx w) {
  spec.validate();
  require_disc(w);
  const auto n = static_cast<Eigen::Index>(spec.n);
  std::vector<Eigen::VectorXcd> frame;
  frame.reserve(spec.n);
  for (std::size_t j = 0; j < spec.n; ++j) frame.push_back(frame_vector(spec, w, j));
  Eigen::MatrixXcd h(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index l = 0; l < n; ++l) h(k, l) = frame[k].dot(frame[l]);
  }
  return h;
}

Eigen::MatrixXcd grammian_from_kernel(const ModelSpec& spec, cplx w) {
  spec.validate();
  require_disc(w);
  const std::size_t n = spec.n;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const double lam = spec.lambda(i);
    for (std::size_t k = i; k < n; ++k) {
      for (std::size_t l = i; l < n; ++l) {
        const cplx coef = spec.mu(i, l) * std::conj(spec.mu(i, k));
        if (coef == cplx(0.0, 0.0)) continue;
        h(k, l) += coef * kernel_diagonal_derivative(lam, l - i, k - i, w);
      }
    }
  }
  return h;
}

GrammianRoutes grammian_routes(const ModelSpec& spec, cplx w) {
  GrammianRoutes r;
  r.from_sections = grammian_from_sections(spec, w);
  r.from_kernel = grammian_from_kernel(spec, w);
  const double scale = std::max(1.0, r.from_kernel.cwiseAbs().maxCoeff());
  r.deviation = (r.from_sections - r.from_kernel).cwiseAbs().maxCoeff() / scale;
  return r;
}

Eigen::MatrixXcd grammian(const ModelSpec& spec, cplx w) {
  GrammianRoutes r = grammian_routes(spec, w);
  if (r.deviation > kRouteTolerance) {
    throw ConsistencyError("grammian routes disagree by " + std::to_string(r.deviation));
  }
  return r.from_kernel;
}

double line_curvature(double lambda, cplx w) {
  KernelParam p(lambda);
  require_disc(w);
  const double s = 1.0 - std::norm(w);
  return -p.lambda / (s * s);
}

Eigen::MatrixXcd curvature_from_metric(const MetricFunction& metric, cplx w, double step) {
  require_stencil(w, step);
  const Stencil<Eigen::MatrixXcd> h = sample_stencil<Eigen::MatrixXcd>(metric, w, step);
  check_conditioning(h.center);
  const Eigen::MatrixXcd dh = wirtinger_d(h, step);
  const Eigen::MatrixXcd dbh = wirtinger_dbar(h, step);
  const Eigen::MatrixXcd ddb = wirtinger_mixed(h, step);
  const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(h.center);
  const Eigen::MatrixXcd hinv_dh = lu.solve(dh);
  return -(lu.solve(ddb) - lu.solve(dbh) * hinv_dh);
}

Eigen::MatrixXcd curvature_matrix(const ModelSpec& spec, cplx w, double step) {
  spec.validate();
  return curvature_from_metric([&spec](cplx z) { return grammian_from_kernel(spec, z); }, w, step);
}

CovariantDerivative covariant_derivative(const Stencil<Eigen::MatrixXcd>& phi,
                                         const Stencil<Eigen::MatrixXcd>& metric, double step) {
  if (!(step > 0.0)) throw ArgumentError("finite-difference step must be positive");
  CovariantDerivative out;
  const Eigen::MatrixXcd connection = metric.center.partialPivLu().solve(wirtinger_d(metric, step));
  out.d_wbar = wirtinger_dbar(phi, step);
  out.d_w = wirtinger_d(phi, step) + connection * phi.center - phi.center * connection;
  return out;
}

cplx sff_adjacent(const ModelSpec& spec, std::size_t i, cplx w) {
  spec.validate();
  if (i + 1 >= spec.n) throw ArgumentError("adjacent pair index out of range");
  const cplx mu = spec.mu(i, i + 1);
  const double k = line_curvature(spec.lambda(i), w);
  const double ratio = std::pow(1.0 - std::norm(w), -(spec.lambda(i + 1) - spec.lambda(i)));
  const double radicand = ratio - std::norm(mu) * k;
  if (!(radicand > 0.0)) throw NumericalError("nonpositive radicand in the second fundamental form");
  return mu * k / std::sqrt(radicand);
}

cplx sff_adjacent_from_frame(const ModelSpec& spec, std::size_t i, cplx w, double step) {
  spec.validate();
  if (i + 1 >= spec.n) throw ArgumentError("adjacent pair index out of range");
  require_stencil(w, step);
  const ModelSpec pair = adjacent_pair(spec, i);
  auto ratio = [&pair](cplx z) {
    const Eigen::MatrixXcd g = grammian_from_kernel(pair, z);
    return g(0, 1) / g(0, 0);
  };
  // Richardson extrapolation of the central difference: error O(step⁴).
  const cplx coarse = wirtinger_dbar(sample_stencil<cplx>(ratio, w, step), step);
  const cplx fine = wirtinger_dbar(sample_stencil<cplx>(ratio, w, 0.5 * step), 0.5 * step);
  const cplx dbar = (4.0 * fine - coarse) / 3.0;
  const Eigen::MatrixXcd g = grammian_from_kernel(pair, w);
  const double h = g(0, 0).real();
  const double radicand = g(1, 1).real() - std::norm(g(0, 1)) / h;
  if (!(radicand > 0.0)) throw NumericalError("nonpositive radicand in the frame formula");
  return -std::sqrt(h) * dbar / std::sqrt(radicand);
}

cplx sff_general(const ModelSpec& spec, std::size_t i, std::size_t j, cplx w) {
  spec.validate();
  if (!(i < j && j < spec.n)) throw ArgumentError("sff_general needs i < j < n");
  require_disc(w);
  const Eigen::MatrixXcd m = mu_to_m(spec.mu);
  const cplx c = m(i, j) / static_cast<double>(j - i);
  if (c == cplx(0.0, 0.0)) return {0.0, 0.0};
  const std::size_t d = j - i;
  const double lam = spec.lambda(i);
  const double h = kernel_diagonal_derivative(lam, 0, 0, w).real();
  const cplx dh = kernel_diagonal_derivative(lam, d, 0, w);
  const cplx dbh = kernel_diagonal_derivative(lam, 0, d, w);
  const cplx ddb = kernel_diagonal_derivative(lam, d, d, w);
  const cplx dbar1 = kernel_diagonal_derivative(lam, 0, 1, w);
  const cplx mixed = kernel_diagonal_derivative(lam, d, 1, w);
  const cplx numerator = c * (mixed / h - dh * dbar1 / (h * h));
  const double hj = kernel_diagonal_derivative(spec.lambda(j), 0, 0, w).real();
  const double radicand = hj / h + std::norm(c) * ((h * ddb - dh * dbh) / (h * h)).real();
  if (!(radicand > 0.0)) throw NumericalError("nonpositive radicand in the second fundamental form");
  return numerator / std::sqrt(radicand);
}

SffComparison sff_distinguishes(const ModelSpec& spec, const ModelSpec& spec_tilde, const DiscGrid& grid) {
  spec.validate();
  spec_tilde.validate();
  if (spec.n != spec_tilde.n || spec.lambda0 != spec_tilde.lambda0 || spec.valency != spec_tilde.valency) {
    throw ArgumentError("compared specs must share lambda0, valency and rank");
  }
  grid.validate();
  const Eigen::MatrixXcd m = mu_to_m(spec.mu);
  const Eigen::MatrixXcd mt = mu_to_m(spec_tilde.mu);
  SffComparison out;
  for (std::size_t i = 0; i < spec.n; ++i) {
    for (std::size_t j = i + 1; j < spec.n; ++j) {
      SffPairDeviation p;
      p.i = i;
      p.j = j;
      p.coefficients_equal = std::abs(m(i, j) - mt(i, j)) <= kEqualCoefficientTol * std::max(1.0, std::abs(m(i, j)));
      for (const cplx& w : grid.points) {
        const double dev = std::abs(sff_general(spec, i, j, w) - sff_general(spec_tilde, i, j, w));
        p.max_deviation = std::max(p.max_deviation, dev);
      }
      const bool ok = p.coefficients_equal ? p.max_deviation <= 1e-10 : p.max_deviation > 1e-8;
      out.distinguishes = out.distinguishes && ok;
      out.pairs.push_back(p);
    }
  }
  return out;
}

GeometryReport geometry_report(const ModelSpec& spec, const DiscGrid& grid, bool include_general) {
  spec.validate();
  grid.validate();
  GeometryReport report;
  report.points.resize(grid.points.size());
  parallel_for(grid.points.size(), [&](std::size_t idx) {
    const cplx w = grid.points[idx];
    GeometryPoint& p = report.points[idx];
    p.w = w;
    p.grammian = grammian(spec, w);
    p.curvature = curvature_matrix(spec, w, grid.step);
    for (std::size_t i = 0; i + 1 < spec.n; ++i) p.sff_adjacent.push_back(sff_adjacent(spec, i, w));
    if (include_general) {
      p.sff_general.assign(spec.n, std::vector<cplx>(spec.n, cplx(0.0, 0.0)));
      for (std::size_t i = 0; i < spec.n; ++i) {
        for (std::size_t j = i + 1; j < spec.n; ++j) p.sff_general[i][j] = sff_general(spec, i, j, w);
      }
    }
  });
  return report;
}

}  // namespace cdlab
