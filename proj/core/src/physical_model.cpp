#include "nla/physical_model.hpp"

#include <cmath>
#include <string>

#include "nla/amplifiers.hpp"
#include "nla/errors.hpp"

namespace nla {
namespace {

constexpr double kSeriesTolerance = 1e-14;
constexpr double kDroppedTolerance = 1e-10;
constexpr int kMaxSeriesTerms = 400;

void require_lambda(double lambda) {
  if (!(lambda > 0.0 && lambda <= 0.3)) {
    throw PreconditionError("squeezing parameter must lie in (0, 0.3], got " + std::to_string(lambda));
  }
}

void require_reflectivity(double r) {
  if (!(r > 0.0 && r < 0.5)) {
    throw PreconditionError("beam-splitter reflectivity must lie in (0, 0.5), got " + std::to_string(r));
  }
}

// K = a^dagger b^dagger - a b restricted to the truncated two-mode space.
// Returns K M and adds the norm of whatever would leave the space to `dropped`.
CMatrix apply_generator(const CMatrix& m, double& dropped) {
  const auto ns = m.rows();
  const auto na = m.cols();
  CMatrix out = CMatrix::Zero(ns, na);
  double lost = 0.0;
  for (Eigen::Index n = 0; n < ns; ++n) {
    for (Eigen::Index k = 0; k < na; ++k) {
      const complex c = m(n, k);
      if (c == complex(0.0)) {
        continue;
      }
      const double up = std::sqrt(static_cast<double>((n + 1) * (k + 1)));
      if (n + 1 < ns && k + 1 < na) {
        out(n + 1, k + 1) += up * c;
      } else {
        lost += up * up * std::norm(c);
      }
      if (n >= 1 && k >= 1) {
        out(n - 1, k - 1) -= std::sqrt(static_cast<double>(n * k)) * c;
      }
    }
  }
  dropped += std::sqrt(lost);
  return out;
}

// Kraus operator of the beam splitter for k reflected photons:
// E_k |n> = sqrt(C(n,k)) t^{n-k} r^k |n-k>.
CMatrix reflection_kraus(int k, int n_max, double reflectivity) {
  CMatrix e = CMatrix::Zero(n_max + 1, n_max + 1);
  const double log_t = 0.5 * std::log1p(-reflectivity);
  const double log_r = 0.5 * std::log(reflectivity);
  for (int n = k; n <= n_max; ++n) {
    const double log_binom = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
    e(n - k, n) = std::exp(0.5 * log_binom + (n - k) * log_t + k * log_r);
  }
  return e;
}

// P(at least one photon reflected) from the photon-number distribution,
// sum_n rho_nn [1 - (1-R)^n] written as the binomial tail.
double subtraction_click_probability(const Eigen::VectorXd& populations, double reflectivity) {
  double p = 0.0;
  for (Eigen::Index n = 1; n < populations.size(); ++n) {
    double tail = 0.0;
    for (Eigen::Index k = 1; k <= n; ++k) {
      const double log_binom = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
      tail += std::round(std::exp(log_binom)) * std::pow(1.0 - reflectivity, static_cast<double>(n - k)) *
              std::pow(reflectivity, static_cast<double>(k));
    }
    p += populations(n) * tail;
  }
  return p;
}

HeraldedResult condition_on_click(const HeraldBranches& branches, double p) {
  if (!(p > 0.0)) {
    throw PreconditionError("herald click has zero probability for this input");
  }
  return {branches.click.normalized(), p};
}

HeraldedResult condition_on_click(const HeraldBranches& branches) {
  return condition_on_click(branches, branches.click.trace());
}

} // namespace

TwoModeState::TwoModeState(CMatrix amplitudes) : amps_(std::move(amplitudes)) {
  if (amps_.rows() < 2 || amps_.cols() < 2) {
    throw PreconditionError("TwoModeState: each mode needs at least two Fock levels");
  }
}

TwoModeState TwoModeState::with_vacuum_ancilla(const PureState& signal) {
  CMatrix m = CMatrix::Zero(signal.cutoff().dim(), signal.cutoff().dim());
  m.col(0) = signal.amplitudes();
  return TwoModeState(std::move(m));
}

PureState TwoModeState::signal_given_ancilla(int k) const {
  if (k < 0 || k >= amps_.cols()) {
    throw PreconditionError("signal_given_ancilla: ancilla number out of range");
  }
  return PureState(amps_.col(k));
}

DensityMatrix TwoModeState::signal_reduced(int first, int last) const {
  CMatrix rho = CMatrix::Zero(amps_.rows(), amps_.rows());
  for (int k = std::max(first, 0); k <= last && k < amps_.cols(); ++k) {
    rho += amps_.col(k) * amps_.col(k).adjoint();
  }
  return DensityMatrix(std::move(rho));
}

TwoModeState two_mode_squeeze(const PureState& signal, double lambda) {
  require_lambda(lambda);
  const double in_norm = std::sqrt(signal.norm_squared());
  if (in_norm == 0.0) {
    throw ZeroNormError("two_mode_squeeze: zero-norm input");
  }
  CMatrix term = TwoModeState::with_vacuum_ancilla(signal).amplitudes();
  CMatrix sum = term;
  double dropped = 0.0;
  for (int j = 1;; ++j) {
    if (j > kMaxSeriesTerms) {
      throw ConvergenceError("two_mode_squeeze: exponential series did not converge");
    }
    double lost = 0.0;
    term = (lambda / j) * apply_generator(term, lost);
    dropped += (lambda / j) * lost;
    sum += term;
    if (term.norm() < kSeriesTolerance * in_norm) {
      break;
    }
  }
  if (dropped > kDroppedTolerance * in_norm) {
    throw TruncationError("two_mode_squeeze: cutoff too small, lost amplitude " + std::to_string(dropped));
  }
  return TwoModeState(std::move(sum));
}

TwoModeState beam_splitter(const PureState& signal, double reflectivity) {
  require_reflectivity(reflectivity);
  const int n_max = signal.cutoff().n_max();
  CMatrix m = CMatrix::Zero(n_max + 1, n_max + 1);
  for (int k = 0; k <= n_max; ++k) {
    m.col(k) = reflection_kraus(k, n_max, reflectivity) * signal.amplitudes();
  }
  return TwoModeState(std::move(m));
}

HeraldBranches addition_branches(const PureState& signal, double lambda) {
  require_lambda(lambda);
  const int n_max = signal.cutoff().n_max();
  const double norm = signal.norm_squared();
  if (norm == 0.0) {
    throw ZeroNormError("addition_branches: zero-norm input");
  }
  double edge = 0.0;
  for (int n = std::max(0, n_max - 2); n <= n_max; ++n) {
    edge += std::norm(signal.amplitudes()(n));
  }
  if (edge > 1e-10 * norm) {
    throw TruncationError("heralded_addition: input has weight " + std::to_string(edge / norm) +
                          " within two levels of the cutoff");
  }
  const TwoModeState out = two_mode_squeeze(PureState(signal.amplitudes() / std::sqrt(norm)), lambda);
  return {out.signal_reduced(1, n_max), out.signal_reduced(0, 0)};
}

HeraldBranches subtraction_branches(const DensityMatrix& signal, double reflectivity) {
  require_reflectivity(reflectivity);
  const int n_max = signal.cutoff().n_max();
  const DensityMatrix rho = signal.normalized();
  CMatrix click = CMatrix::Zero(n_max + 1, n_max + 1);
  for (int k = 1; k <= n_max; ++k) {
    const CMatrix e = reflection_kraus(k, n_max, reflectivity);
    click += e * rho.elements() * e.adjoint();
  }
  const CMatrix e0 = reflection_kraus(0, n_max, reflectivity);
  CMatrix no_click = e0 * rho.elements() * e0.adjoint();
  return {DensityMatrix(0.5 * (click + click.adjoint())),
          DensityMatrix(0.5 * (no_click + no_click.adjoint()))};
}

HeraldedResult heralded_addition(const PureState& signal, double lambda) {
  return condition_on_click(addition_branches(signal, lambda));
}

HeraldedResult heralded_subtraction(const DensityMatrix& signal, double reflectivity) {
  const HeraldBranches branches = subtraction_branches(signal, reflectivity);
  const Eigen::VectorXd populations = signal.normalized().elements().diagonal().real();
  return condition_on_click(branches, subtraction_click_probability(populations, reflectivity));
}

HeraldedResult heralded_subtraction(const PureState& signal, double reflectivity) {
  require_reflectivity(reflectivity);
  const PureState psi = signal.normalized();
  const TwoModeState out = beam_splitter(psi, reflectivity);
  const DensityMatrix click = out.signal_reduced(1, out.ancilla_cutoff().n_max());
  const Eigen::VectorXd populations = psi.amplitudes().cwiseAbs2();
  return condition_on_click({click, out.signal_reduced(0, 0)},
                            subtraction_click_probability(populations, reflectivity));
}

PhysicalAmplifierResult physical_amplifier(complex alpha, double lambda, double reflectivity,
                                           FockCutoff cutoff) {
  require_lambda(lambda);
  require_reflectivity(reflectivity);
  const PureState input = coherent_state(alpha, cutoff);
  const HeraldedResult added = heralded_addition(input, lambda);
  const HeraldedResult subtracted = heralded_subtraction(added.state, reflectivity);
  const PureState ideal = amplify_ideal(input, 2.0).state;
  PhysicalAmplifierResult result{
      {subtracted.state, added.success_prob * subtracted.success_prob},
      added.success_prob,
      subtracted.success_prob,
      state_fidelity(subtracted.state, ideal)};
  return result;
}

DensityMatrix physical_reference(complex alpha, double lambda, double reflectivity, FockCutoff cutoff) {
  const PureState input = coherent_state(alpha, cutoff);
  const HeraldBranches added = addition_branches(input, lambda);
  return subtraction_branches(added.no_click, reflectivity).no_click.normalized();
}

} // namespace nla
