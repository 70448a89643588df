#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nla/fock.hpp"

namespace nla {

/// Photodetection efficiency as a beam splitter of transmissivity eta mixing
/// the signal with vacuum, followed by tracing out the lost mode:
///   rho'_{mn} = sum_k sqrt(B(m+k,k) B(n+k,k)) rho_{m+k,n+k},
///   B(N,k) = C(N,k) eta^{N-k} (1-eta)^k.
DensityMatrix loss_channel(const DensityMatrix& rho, double eta);
DensityMatrix loss_channel(const PureState& psi, double eta);

/// Heisenberg-picture loss map: Tr(loss(rho) op) = Tr(rho loss_adjoint(op)).
CMatrix loss_channel_adjoint(const CMatrix& op, double eta);

/// Oscillator eigenfunctions psi_0..psi_{n_max} of x = a + a^dagger at x,
/// scaled so psi_0(x)^2 is the standard normal density. Computed by the
/// three-term recurrence psi_{n+1} = (x psi_n - sqrt(n) psi_{n-1}) / sqrt(n+1).
Eigen::VectorXd oscillator_wavefunctions(double x, int n_max);

/// p(x | theta) = sum_{mn} rho_{mn} e^{i(n-m)theta} psi_m(x) psi_n(x) / Tr rho,
/// at a single point and without grid checks.
double quadrature_density(const DensityMatrix& rho, double theta, double x);

/// Smallest symmetric half-width a quadrature grid must span for rho.
double required_quadrature_halfwidth(const DensityMatrix& rho);

/// Quadrature density on a uniform grid. Throws PreconditionError when the
/// grid is non-uniform, coarser than 0.02, or narrower than
/// required_quadrature_halfwidth(rho).
Eigen::VectorXd quadrature_pdf(const DensityMatrix& rho, double theta, std::span<const double> x_grid);

/// n points with spacing `step` starting at `lo`; `hi` included up to rounding.
std::vector<double> uniform_grid(double lo, double hi, double step);

enum class SampleTag { amplified, input, vacuum };

std::string_view to_string(SampleTag tag);
SampleTag parse_sample_tag(std::string_view text);

struct QuadratureRecord {
  double theta;
  double x;
  SampleTag tag;

  friend bool operator==(const QuadratureRecord&, const QuadratureRecord&) = default;
};

/// Phase-tagged homodyne record. Records are grouped by phase in the
/// order of `phases`, counts_per_phase each.
struct QuadratureDataset {
  std::vector<QuadratureRecord> records;
  std::vector<double> phases;
  double eta = 1.0;
  std::uint64_t seed = 0;
  int counts_per_phase = 0;
  std::string description;

  /// Quadrature values recorded at phases[phase_index].
  [[nodiscard]] std::vector<double> values_at(std::size_t phase_index) const;

  friend bool operator==(const QuadratureDataset&, const QuadratureDataset&) = default;
};

/// count phases k pi / count, k = 0..count-1, uniform on [0, pi).
std::vector<double> phase_grid(int count);

/// Applies loss_channel(eta), then draws counts_per_phase values per phase
/// by inverse-CDF sampling from the quadrature density tabulated with
/// spacing 0.01 and linearly interpolated. Every phase uses its own stream
/// seeded from (seed, phase index, tag), so output depends only on arguments.
QuadratureDataset sample_quadratures(const DensityMatrix& rho, std::span<const double> phases,
                                     int counts_per_phase, double eta, std::uint64_t seed,
                                     SampleTag tag = SampleTag::amplified);

struct GainEstimate {
  double gain;
  double std_error;
};

/// Ratio of sample means with first-order propagated standard error.
/// Throws PreconditionError when the input mean is within three standard
/// errors of zero.
GainEstimate gain_from_samples(std::span<const double> amplified, std::span<const double> input);

} // namespace nla
