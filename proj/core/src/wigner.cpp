#include "nla/wigner.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "nla/errors.hpp"

namespace nla {
namespace {

double uniform_step(std::span<const double> axis, const char* name) {
  if (axis.size() < 3) {
    throw PreconditionError(std::string(name) + ": need at least three points");
  }
  const double step = axis[1] - axis[0];
  if (!(step > 0.0)) {
    throw PreconditionError(std::string(name) + ": axis must be increasing");
  }
  for (std::size_t i = 1; i < axis.size(); ++i) {
    if (std::abs(axis[i] - axis[i - 1] - step) > 1e-9 * std::max(1.0, step)) {
      throw PreconditionError(std::string(name) + ": axis must be uniform");
    }
  }
  return step;
}

// W at beta = (x + i p)/2 from the normalized matrix r, using the
// three-term recurrence of the Fock-basis functions
//   W_mn(beta) ~ (-1)^m sqrt(m!/n!) (2 beta)^{n-m} L_m^{(n-m)}(4|beta|^2) e^{-2|beta|^2},
// which stay O(1) for every (m, n) and need no factorials.
double wigner_value(const CMatrix& r, complex beta, std::vector<complex>& row) {
  const auto dim = r.rows();
  row.assign(static_cast<std::size_t>(dim), 0.0);
  const complex two_beta = 2.0 * beta;
  const complex two_beta_conj = std::conj(two_beta);

  row[0] = std::exp(-2.0 * std::norm(beta));
  double w = r(0, 0).real() * row[0].real();
  for (Eigen::Index n = 1; n < dim; ++n) {
    row[n] = two_beta * row[n - 1] / std::sqrt(static_cast<double>(n));
    w += 2.0 * (r(0, n) * row[n]).real();
  }
  for (Eigen::Index m = 1; m < dim; ++m) {
    const double sm = std::sqrt(static_cast<double>(m));
    complex prev = row[m];
    row[m] = (two_beta_conj * prev - sm * row[m - 1]) / sm;
    w += (r(m, m) * row[m]).real();
    for (Eigen::Index n = m + 1; n < dim; ++n) {
      const complex next = (two_beta * row[n - 1] - sm * prev) / std::sqrt(static_cast<double>(n));
      prev = row[n];
      row[n] = next;
      w += 2.0 * (r(m, n) * row[n]).real();
    }
  }
  // (2/pi) in the beta plane, and d^2 beta = dx dp / 4.
  return w / (2.0 * std::numbers::pi);
}

CMatrix normalized_elements(const DensityMatrix& rho) {
  const double tr = rho.trace();
  if (!(tr > 0.0)) {
    throw ZeroNormError("wigner: zero-trace state");
  }
  return rho.elements() / tr;
}

double trapezoid_weight(std::size_t i, std::size_t n) { return (i == 0 || i + 1 == n) ? 0.5 : 1.0; }

} // namespace

double wigner_point(const DensityMatrix& rho, double x, double p) {
  std::vector<complex> row;
  return wigner_value(normalized_elements(rho), complex(x, p) / 2.0, row);
}

std::vector<double> default_wigner_axis() {
  std::vector<double> axis(201);
  for (int i = 0; i < 201; ++i) {
    axis[i] = -8.0 + 0.08 * i;
  }
  return axis;
}

double required_wigner_halfwidth(const DensityMatrix& rho) {
  return 2.0 * std::abs(expectation(rho, Observable::annihilation())) + 6.0;
}

WignerGrid wigner_function(const DensityMatrix& rho, std::span<const double> x_axis,
                           std::span<const double> p_axis) {
  uniform_step(x_axis, "wigner x axis");
  uniform_step(p_axis, "wigner p axis");
  const double half = required_wigner_halfwidth(rho);
  auto covers = [half](std::span<const double> axis) {
    return axis.front() <= -half + 1e-9 && axis.back() >= half - 1e-9;
  };
  if (!covers(x_axis) || !covers(p_axis)) {
    throw PreconditionError("wigner_function: grid must cover +/-" + std::to_string(half));
  }
  const CMatrix r = normalized_elements(rho);
  WignerGrid grid{{x_axis.begin(), x_axis.end()},
                  {p_axis.begin(), p_axis.end()},
                  Eigen::MatrixXd(static_cast<Eigen::Index>(x_axis.size()),
                                  static_cast<Eigen::Index>(p_axis.size()))};
  std::vector<complex> row;
  for (std::size_t i = 0; i < x_axis.size(); ++i) {
    for (std::size_t j = 0; j < p_axis.size(); ++j) {
      grid.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          wigner_value(r, complex(x_axis[i], p_axis[j]) / 2.0, row);
    }
  }
  return grid;
}

DensityMatrix phase_shift(const DensityMatrix& rho, double phi) {
  CMatrix out = rho.elements();
  for (Eigen::Index m = 0; m < out.rows(); ++m) {
    for (Eigen::Index n = 0; n < out.cols(); ++n) {
      out(m, n) *= std::polar(1.0, static_cast<double>(m - n) * phi);
    }
  }
  return DensityMatrix(std::move(out));
}

PureState phase_shift(const PureState& psi, double phi) {
  CVector out = psi.amplitudes();
  for (Eigen::Index n = 0; n < out.size(); ++n) {
    out(n) *= std::polar(1.0, static_cast<double>(n) * phi);
  }
  return PureState(std::move(out));
}

DensityMatrix mixture(std::span<const DensityMatrix> rhos, std::span<const double> weights) {
  if (rhos.empty() || rhos.size() != weights.size()) {
    throw PreconditionError("mixture: need one weight per state");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) {
      throw PreconditionError("mixture: weights must be non-negative");
    }
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw PreconditionError("mixture: weights sum to " + std::to_string(total) + ", not 1");
  }
  const FockCutoff cutoff = rhos.front().cutoff();
  CMatrix sum = CMatrix::Zero(cutoff.dim(), cutoff.dim());
  for (std::size_t i = 0; i < rhos.size(); ++i) {
    if (rhos[i].cutoff() != cutoff) {
      throw PreconditionError("mixture: states built at different cutoffs");
    }
    sum += weights[i] * rhos[i].elements();
  }
  return DensityMatrix(std::move(sum));
}

double grid_integral(const WignerGrid& w) {
  const double dx = uniform_step(w.x_axis, "wigner x axis");
  const double dp = uniform_step(w.p_axis, "wigner p axis");
  const std::size_t nx = w.x_axis.size();
  const std::size_t np = w.p_axis.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < np; ++j) {
      acc += trapezoid_weight(i, nx) * trapezoid_weight(j, np) *
             w.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  return acc * dx * dp;
}

double overlap_integral(const WignerGrid& a, const WignerGrid& b) {
  if (a.x_axis != b.x_axis || a.p_axis != b.p_axis) {
    throw PreconditionError("overlap_integral: grids differ");
  }
  WignerGrid product{a.x_axis, a.p_axis, a.values.cwiseProduct(b.values)};
  return grid_integral(product);
}

std::vector<double> wigner_marginal(const DensityMatrix& rho, double theta, std::span<const double> u_grid,
                                    std::span<const double> v_grid) {
  const double dv = uniform_step(v_grid, "wigner marginal v grid");
  const CMatrix r = normalized_elements(rho);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  std::vector<double> out(u_grid.size());
  std::vector<complex> row;
  for (std::size_t i = 0; i < u_grid.size(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < v_grid.size(); ++j) {
      const double u = u_grid[i];
      const double v = v_grid[j];
      acc += trapezoid_weight(j, v_grid.size()) *
             wigner_value(r, complex(u * c - v * s, u * s + v * c) / 2.0, row);
    }
    out[i] = acc * dv;
  }
  return out;
}

} // namespace nla
