#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "cdlab/atomic_model.hpp"

namespace cdlab {

inline constexpr double kDefaultStep = 1e-4;

// Sample points in the disc with a finite-difference step.
struct DiscGrid {
  std::vector<cplx> points;
  double step = kDefaultStep;

  // Radii x angles polar grid; angles are 2πk/angle_count.
  static DiscGrid polar(const std::vector<double>& radii, std::size_t angle_count, double step = kDefaultStep);
  // Radii 0.1, ..., 0.6 and 16 angles.
  static DiscGrid default_grid();
  // Throws DomainError when a point is closer than 2*step to the circle.
  void validate() const;
};

// Values of a function at w and at w ± step, w ± i·step.
template <class T>
struct Stencil {
  T center, east, west, north, south;
};

template <class T, class F>
Stencil<T> sample_stencil(F&& f, cplx w, double step) {
  const cplx i(0.0, 1.0);
  return {f(w), f(w + step), f(w - step), f(w + i * step), f(w - i * step)};
}

using MetricFunction = std::function<Eigen::MatrixXcd(cplx)>;

struct GrammianRoutes {
  Eigen::MatrixXcd from_sections;  // truncated inner products of frame vectors
  Eigen::MatrixXcd from_kernel;    // closed form through kernel derivatives
  double deviation = 0.0;          // max entry difference relative to max(1, |h|)
};

// h_{kl} = <γ_l, γ_k>, inner product linear in the first slot.
Eigen::MatrixXcd grammian_from_sections(const ModelSpec& spec, cplx w);
Eigen::MatrixXcd grammian_from_kernel(const ModelSpec& spec, cplx w);
GrammianRoutes grammian_routes(const ModelSpec& spec, cplx w);
// Both routes; throws ConsistencyError when they differ by more than 1e-6.
Eigen::MatrixXcd grammian(const ModelSpec& spec, cplx w);

// -λ / (1 - |w|²)².
double line_curvature(double lambda, cplx w);

// -∂̄(h⁻¹∂h) from central differences of the metric.
Eigen::MatrixXcd curvature_from_metric(const MetricFunction& metric, cplx w, double step = kDefaultStep);
Eigen::MatrixXcd curvature_matrix(const ModelSpec& spec, cplx w, double step = kDefaultStep);

struct CovariantDerivative {
  Eigen::MatrixXcd d_w;     // ∂φ + [h⁻¹∂h, φ]
  Eigen::MatrixXcd d_wbar;  // ∂̄φ
};

CovariantDerivative covariant_derivative(const Stencil<Eigen::MatrixXcd>& phi,
                                         const Stencil<Eigen::MatrixXcd>& metric, double step);

// θ_{i,i+1} = μ 𝒦_i / sqrt(‖t_{i+1}‖²/‖t_i‖² - |μ|² 𝒦_i).
cplx sff_adjacent(const ModelSpec& spec, std::size_t i, cplx w);
// Same quantity from the frame {t_i, μ t_i' + t_{i+1}}: its Grammian and a
// central difference in w̄.
cplx sff_adjacent_from_frame(const ModelSpec& spec, std::size_t i, cplx w, double step = kDefaultStep);
// θ_{i,j} for the pair (i, j) through m_{i,j} and kernel derivatives of order j-i.
cplx sff_general(const ModelSpec& spec, std::size_t i, std::size_t j, cplx w);

struct SffPairDeviation {
  std::size_t i = 0;
  std::size_t j = 0;
  bool coefficients_equal = false;
  double max_deviation = 0.0;
};

struct SffComparison {
  bool distinguishes = true;
  std::vector<SffPairDeviation> pairs;
};

SffComparison sff_distinguishes(const ModelSpec& spec, const ModelSpec& spec_tilde, const DiscGrid& grid);

struct GeometryPoint {
  cplx w;
  Eigen::MatrixXcd grammian;
  Eigen::MatrixXcd curvature;
  std::vector<cplx> sff_adjacent;                  // θ_{i,i+1}
  std::vector<std::vector<cplx>> sff_general;      // θ_{i,j}, i < j; empty unless requested
};

struct GeometryReport {
  std::vector<GeometryPoint> points;
};

GeometryReport geometry_report(const ModelSpec& spec, const DiscGrid& grid, bool include_general = false);

}  // namespace cdlab
