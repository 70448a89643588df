#pragma once

#include <span>
#include <vector>

#include "nla/fock.hpp"

namespace nla {

/// Wigner function sampled on a rectangular grid in shot-noise units:
/// values(i, j) = W(x_axis[i], p_axis[j]).
struct WignerGrid {
  std::vector<double> x_axis;
  std::vector<double> p_axis;
  Eigen::MatrixXd values;
};

/// W(x, p) of rho / Tr rho, normalized so that the vacuum gives
/// exp(-(x^2 + p^2)/2) / (2 pi) and every marginal is a quadrature density.
double wigner_point(const DensityMatrix& rho, double x, double p);

/// 201 points on [-8, 8].
std::vector<double> default_wigner_axis();

/// Half-width both axes must cover for rho: 2 |<a>| + 6.
double required_wigner_halfwidth(const DensityMatrix& rho);

/// Evaluates W on the grid. Throws PreconditionError when either axis does
/// not cover +/-required_wigner_halfwidth(rho) or is not uniform.
WignerGrid wigner_function(const DensityMatrix& rho, std::span<const double> x_axis,
                           std::span<const double> p_axis);

/// rho_mn -> rho_mn e^{i(n-m) phi}; maps |alpha> to |alpha e^{i phi}>.
DensityMatrix phase_shift(const DensityMatrix& rho, double phi);
PureState phase_shift(const PureState& psi, double phi);

/// sum_i w_i rho_i. Weights must be non-negative and sum to 1 within 1e-12.
DensityMatrix mixture(std::span<const DensityMatrix> rhos, std::span<const double> weights);

/// Trapezoid-rule integral of W over the grid.
double grid_integral(const WignerGrid& w);

/// Trapezoid-rule integral of W1 W2 over a shared grid. In these units
/// Tr(rho1 rho2) = 4 pi times this value.
double overlap_integral(const WignerGrid& a, const WignerGrid& b);

/// Marginal of W along x_theta = x cos(theta) + p sin(theta): for each u,
/// integrates W(u cos - v sin, u sin + v cos) over the uniform v grid.
std::vector<double> wigner_marginal(const DensityMatrix& rho, double theta, std::span<const double> u_grid,
                                    std::span<const double> v_grid);

} // namespace nla
