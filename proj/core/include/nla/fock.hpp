#pragma once

#include <complex>

#include <Eigen/Dense>

namespace nla {

using complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

/// Largest Poisson tail weight a state may leave above the cutoff.
inline constexpr double kTailTolerance = 1e-12;

/// Probability that a Poisson variable with the given mean exceeds n_max.
double poisson_tail(double mean, int n_max);

/// Highest retained Fock number of a truncated single-mode space.
class FockCutoff {
public:
  explicit FockCutoff(int n_max);

  /// Smallest cutoff whose coherent-state tail at |amplitude| is below
  /// kTailTolerance, never less than 20.
  static FockCutoff covering(double amplitude);

  /// Default working cutoff for an input amplitude: sized for the amplified
  /// target |2 alpha>, which is the widest state any pipeline handles.
  static FockCutoff default_for(double alpha_abs) { return covering(2.0 * alpha_abs); }

  [[nodiscard]] int n_max() const { return n_max_; }
  [[nodiscard]] int dim() const { return n_max_ + 1; }

  /// True if a coherent state of this amplitude fits with tail < kTailTolerance.
  [[nodiscard]] bool admits(double amplitude) const;

  friend bool operator==(FockCutoff, FockCutoff) = default;

private:
  int n_max_;
};

/// Amplitude vector over |0>..|n_max>. Not necessarily normalized: the
/// squared norm of a conditional output is its herald weight.
class PureState {
public:
  explicit PureState(CVector amplitudes);

  static PureState fock(int n, FockCutoff cutoff);
  static PureState vacuum(FockCutoff cutoff) { return fock(0, cutoff); }

  [[nodiscard]] const CVector& amplitudes() const { return amps_; }
  [[nodiscard]] complex amplitude(int n) const;
  [[nodiscard]] FockCutoff cutoff() const { return FockCutoff(static_cast<int>(amps_.size()) - 1); }
  [[nodiscard]] double norm_squared() const { return amps_.squaredNorm(); }

  /// Throws ZeroNormError for the zero vector.
  [[nodiscard]] PureState normalized() const;

private:
  CVector amps_;
};

/// Hermitian operator over the truncated Fock basis representing a
/// (possibly unnormalized) mixed state.
class DensityMatrix {
public:
  /// Requires a square matrix, Hermitian to 1e-12 relative to its largest
  /// element. The stored matrix is exactly Hermitian.
  explicit DensityMatrix(CMatrix elements);

  /// |psi><psi|, carrying the squared norm of psi as the trace.
  static DensityMatrix from_pure(const PureState& psi);

  [[nodiscard]] const CMatrix& elements() const { return rho_; }
  [[nodiscard]] complex operator()(int m, int n) const { return rho_(m, n); }
  [[nodiscard]] FockCutoff cutoff() const { return FockCutoff(static_cast<int>(rho_.rows()) - 1); }
  [[nodiscard]] double trace() const { return rho_.trace().real(); }
  [[nodiscard]] DensityMatrix normalized() const;

  /// Tr(rho^2) / Tr(rho)^2.
  [[nodiscard]] double purity() const;
  [[nodiscard]] double min_eigenvalue() const;

  /// Throws ConvergenceError unless the matrix is PSD to -eig_tol and its
  /// trace lies in (0, 1 + 1e-12].
  void check_physical(double eig_tol = 1e-10) const;

private:
  CMatrix rho_;
};

/// c_n = exp(-|alpha|^2/2) alpha^n / sqrt(n!). Throws TruncationError when
/// the cutoff leaves more than kTailTolerance of the Poisson weight behind.
PureState coherent_state(complex alpha, FockCutoff cutoff);

enum class Ladder { creation, annihilation };

/// Unnormalized a^dagger|psi> or a|psi>. Creation throws TruncationError
/// when |psi> has amplitude above 1e-12 (relative to its norm) at n_max.
PureState apply_ladder(const PureState& psi, Ladder which);

/// Observables over the single mode. Quadratures follow
///   x_theta = a e^{-i theta} + a^dagger e^{i theta},
/// so the vacuum variance of every x_theta is one shot-noise unit and
/// <x_theta> = 2 Re(alpha e^{-i theta}) on |alpha>.
struct Observable {
  enum class Kind { number, quadrature, quadrature_squared, annihilation };

  Kind kind = Kind::number;
  double theta = 0.0;

  static Observable number() { return {Kind::number, 0.0}; }
  static Observable annihilation() { return {Kind::annihilation, 0.0}; }
  static Observable quadrature(double theta) { return {Kind::quadrature, theta}; }
  static Observable quadrature_squared(double theta) { return {Kind::quadrature_squared, theta}; }
};

/// <psi|O|psi>/<psi|psi> or Tr(rho O)/Tr(rho). Quadrature moments are
/// evaluated in normal order, so the truncation never clips them.
complex expectation(const PureState& psi, const Observable& obs);
complex expectation(const DensityMatrix& rho, const Observable& obs);

double quadrature_variance(const PureState& psi, double theta);
double quadrature_variance(const DensityMatrix& rho, double theta);

/// |<b|a>|^2 / (<a|a><b|b>).
double state_fidelity(const PureState& a, const PureState& b);
/// <b|rho|b> / (Tr rho <b|b>).
double state_fidelity(const DensityMatrix& a, const PureState& b);

/// Uhlmann fidelity (Tr sqrt(sqrt(a) b sqrt(a)))^2 of the normalized states.
double uhlmann_fidelity(const DensityMatrix& a, const DensityMatrix& b);

} // namespace nla
