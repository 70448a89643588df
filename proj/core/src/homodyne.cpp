#include "nla/homodyne.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "nla/errors.hpp"

namespace nla {
namespace {

constexpr double kSamplingStep = 0.01;

void require_eta(double eta, const char* where) {
  if (!(eta > 0.0 && eta <= 1.0)) {
    throw PreconditionError(std::string(where) + ": efficiency must lie in (0, 1], got " +
                            std::to_string(eta));
  }
}

// sqrt(B(m+k, k)) for all m + k <= n_max, indexed [m][k].
std::vector<std::vector<double>> bernoulli_roots(int n_max, double eta) {
  std::vector<std::vector<double>> b(n_max + 1);
  const double log_eta = std::log(eta);
  const double log_loss = eta < 1.0 ? std::log1p(-eta) : 0.0;
  for (int m = 0; m <= n_max; ++m) {
    b[m].assign(n_max - m + 1, 0.0);
    for (int k = 0; m + k <= n_max; ++k) {
      if (eta == 1.0) {
        b[m][k] = k == 0 ? 1.0 : 0.0;
        continue;
      }
      const double log_binom = std::lgamma(m + k + 1.0) - std::lgamma(k + 1.0) - std::lgamma(m + 1.0);
      b[m][k] = std::exp(0.5 * (log_binom + m * log_eta + k * log_loss));
    }
  }
  return b;
}

double grid_step(std::span<const double> grid) {
  if (grid.size() < 3) {
    throw PreconditionError("quadrature grid needs at least three points");
  }
  const double step = grid[1] - grid[0];
  if (!(step > 0.0)) {
    throw PreconditionError("quadrature grid must be increasing");
  }
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (std::abs((grid[i] - grid[i - 1]) - step) > 1e-9 * std::max(1.0, step)) {
      throw PreconditionError("quadrature grid must be uniform");
    }
  }
  return step;
}

// Real symmetric matrix Re(D^dagger rho D), D = diag(e^{i n theta}); the
// density at x is then psi(x)^T M psi(x).
Eigen::MatrixXd rotated_real_part(const CMatrix& rho, double theta) {
  const auto dim = rho.rows();
  Eigen::MatrixXd out(dim, dim);
  for (Eigen::Index m = 0; m < dim; ++m) {
    for (Eigen::Index n = 0; n < dim; ++n) {
      out(m, n) = (rho(m, n) * std::polar(1.0, (n - m) * theta)).real();
    }
  }
  return out;
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

} // namespace

DensityMatrix loss_channel(const DensityMatrix& rho, double eta) {
  require_eta(eta, "loss_channel");
  if (eta == 1.0) {
    return rho;
  }
  const int n_max = rho.cutoff().n_max();
  const auto b = bernoulli_roots(n_max, eta);
  const CMatrix& r = rho.elements();
  CMatrix out = CMatrix::Zero(n_max + 1, n_max + 1);
  for (int m = 0; m <= n_max; ++m) {
    for (int n = 0; n <= n_max; ++n) {
      complex acc = 0.0;
      for (int k = 0; m + k <= n_max && n + k <= n_max; ++k) {
        acc += b[m][k] * b[n][k] * r(m + k, n + k);
      }
      out(m, n) = acc;
    }
  }
  return DensityMatrix(std::move(out));
}

DensityMatrix loss_channel(const PureState& psi, double eta) {
  return loss_channel(DensityMatrix::from_pure(psi), eta);
}

CMatrix loss_channel_adjoint(const CMatrix& op, double eta) {
  require_eta(eta, "loss_channel_adjoint");
  if (eta == 1.0) {
    return op;
  }
  const int n_max = static_cast<int>(op.rows()) - 1;
  const auto b = bernoulli_roots(n_max, eta);
  CMatrix out = CMatrix::Zero(op.rows(), op.cols());
  for (int m = 0; m <= n_max; ++m) {
    for (int n = 0; n <= n_max; ++n) {
      complex acc = 0.0;
      for (int k = 0; k <= std::min(m, n); ++k) {
        acc += b[m - k][k] * b[n - k][k] * op(m - k, n - k);
      }
      out(m, n) = acc;
    }
  }
  return out;
}

Eigen::VectorXd oscillator_wavefunctions(double x, int n_max) {
  Eigen::VectorXd psi(n_max + 1);
  psi(0) = std::exp(-0.25 * x * x) / std::pow(2.0 * std::numbers::pi, 0.25);
  if (n_max >= 1) {
    psi(1) = x * psi(0);
  }
  for (int n = 1; n < n_max; ++n) {
    psi(n + 1) = (x * psi(n) - std::sqrt(static_cast<double>(n)) * psi(n - 1)) /
                 std::sqrt(static_cast<double>(n + 1));
  }
  return psi;
}

double quadrature_density(const DensityMatrix& rho, double theta, double x) {
  const Eigen::VectorXd psi = oscillator_wavefunctions(x, rho.cutoff().n_max());
  const double tr = rho.trace();
  if (!(tr > 0.0)) {
    throw ZeroNormError("quadrature_density: zero-trace state");
  }
  return psi.dot(rotated_real_part(rho.elements(), theta) * psi) / tr;
}

double required_quadrature_halfwidth(const DensityMatrix& rho) {
  const double mean_n = std::max(0.0, expectation(rho, Observable::number()).real());
  return 4.0 * std::sqrt(mean_n) + 8.0;
}

Eigen::VectorXd quadrature_pdf(const DensityMatrix& rho, double theta, std::span<const double> x_grid) {
  const double step = grid_step(x_grid);
  if (step > 0.02 + 1e-12) {
    throw PreconditionError("quadrature_pdf: grid spacing " + std::to_string(step) +
                            " coarser than 0.02");
  }
  const double half = required_quadrature_halfwidth(rho);
  if (x_grid.front() > -half + 1e-9 || x_grid.back() < half - 1e-9) {
    throw PreconditionError("quadrature_pdf: grid must span +/-" + std::to_string(half));
  }
  const double tr = rho.trace();
  if (!(tr > 0.0)) {
    throw ZeroNormError("quadrature_pdf: zero-trace state");
  }
  const Eigen::MatrixXd m = rotated_real_part(rho.elements(), theta) / tr;
  const int n_max = rho.cutoff().n_max();
  Eigen::VectorXd out(static_cast<Eigen::Index>(x_grid.size()));
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    const Eigen::VectorXd psi = oscillator_wavefunctions(x_grid[i], n_max);
    out(static_cast<Eigen::Index>(i)) = psi.dot(m * psi);
  }
  return out;
}

std::vector<double> uniform_grid(double lo, double hi, double step) {
  if (!(hi > lo) || !(step > 0.0)) {
    throw PreconditionError("uniform_grid: need lo < hi and step > 0");
  }
  const auto n = static_cast<std::size_t>(std::llround((hi - lo) / step)) + 1;
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i) {
    grid[i] = lo + static_cast<double>(i) * step;
  }
  return grid;
}

std::string_view to_string(SampleTag tag) {
  switch (tag) {
  case SampleTag::amplified:
    return "amplified";
  case SampleTag::input:
    return "input";
  case SampleTag::vacuum:
    return "vacuum";
  }
  return "unknown";
}

SampleTag parse_sample_tag(std::string_view text) {
  if (text == "amplified") {
    return SampleTag::amplified;
  }
  if (text == "input") {
    return SampleTag::input;
  }
  if (text == "vacuum") {
    return SampleTag::vacuum;
  }
  throw PreconditionError("unknown sample tag '" + std::string(text) + "'");
}

std::vector<double> QuadratureDataset::values_at(std::size_t phase_index) const {
  if (phase_index >= phases.size()) {
    throw PreconditionError("values_at: phase index out of range");
  }
  std::vector<double> out;
  const double theta = phases[phase_index];
  for (const auto& r : records) {
    if (r.theta == theta) {
      out.push_back(r.x);
    }
  }
  return out;
}

std::vector<double> phase_grid(int count) {
  if (count < 1) {
    throw PreconditionError("phase_grid: need at least one phase");
  }
  std::vector<double> phases(count);
  for (int k = 0; k < count; ++k) {
    phases[k] = k * std::numbers::pi / count;
  }
  return phases;
}

QuadratureDataset sample_quadratures(const DensityMatrix& rho, std::span<const double> phases,
                                     int counts_per_phase, double eta, std::uint64_t seed,
                                     SampleTag tag) {
  if (counts_per_phase < 1) {
    throw PreconditionError("sample_quadratures: counts_per_phase must be >= 1");
  }
  if (phases.empty()) {
    throw PreconditionError("sample_quadratures: empty phase list");
  }
  const DensityMatrix detected = loss_channel(rho, eta);
  const double half = std::ceil(required_quadrature_halfwidth(detected) / kSamplingStep) * kSamplingStep;
  const std::vector<double> grid = uniform_grid(-half, half, kSamplingStep);

  QuadratureDataset data;
  data.phases.assign(phases.begin(), phases.end());
  data.eta = eta;
  data.seed = seed;
  data.counts_per_phase = counts_per_phase;
  data.records.reserve(phases.size() * static_cast<std::size_t>(counts_per_phase));

  std::vector<double> cdf(grid.size());
  for (std::size_t k = 0; k < phases.size(); ++k) {
    const Eigen::VectorXd pdf = quadrature_pdf(detected, phases[k], grid);
    cdf[0] = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
      // Clamp tiny negative round-off so the table stays monotone.
      const double left = std::max(0.0, pdf(static_cast<Eigen::Index>(i - 1)));
      const double right = std::max(0.0, pdf(static_cast<Eigen::Index>(i)));
      cdf[i] = cdf[i - 1] + 0.5 * kSamplingStep * (left + right);
    }
    const double total = cdf.back();
    for (double& c : cdf) {
      c /= total;
    }

    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                      static_cast<std::uint32_t>(seed >> 32), static_cast<std::uint32_t>(k),
                      static_cast<std::uint32_t>(tag)};
    std::mt19937_64 rng(seq);
    for (int s = 0; s < counts_per_phase; ++s) {
      const double u = uniform01(rng);
      auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
      std::size_t hi = static_cast<std::size_t>(it - cdf.begin());
      hi = std::clamp<std::size_t>(hi, 1, cdf.size() - 1);
      const std::size_t lo = hi - 1;
      const double width = cdf[hi] - cdf[lo];
      const double frac = width > 0.0 ? (u - cdf[lo]) / width : 0.5;
      data.records.push_back({phases[k], grid[lo] + frac * (grid[hi] - grid[lo]), tag});
    }
  }
  return data;
}

GainEstimate gain_from_samples(std::span<const double> amplified, std::span<const double> input) {
  if (amplified.size() < 2 || input.size() < 2) {
    throw PreconditionError("gain_from_samples: need at least two samples in each set");
  }
  auto stats = [](std::span<const double> v) {
    double mean = 0.0;
    for (double x : v) {
      mean += x;
    }
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) {
      ss += (x - mean) * (x - mean);
    }
    const double var = ss / static_cast<double>(v.size() - 1);
    return std::pair{mean, var / static_cast<double>(v.size())};
  };
  const auto [mean_a, se2_a] = stats(amplified);
  const auto [mean_i, se2_i] = stats(input);
  if (std::abs(mean_i) <= 3.0 * std::sqrt(se2_i)) {
    throw PreconditionError("gain_from_samples: input mean is statistically indistinguishable from zero");
  }
  const double ratio = mean_a / mean_i;
  const double rel2 = se2_i / (mean_i * mean_i) + (mean_a != 0.0 ? se2_a / (mean_a * mean_a) : 0.0);
  double se = std::abs(ratio) * std::sqrt(rel2);
  if (mean_a == 0.0) {
    se = std::sqrt(se2_a) / std::abs(mean_i);
  }
  return {ratio, se};
}

} // namespace nla
