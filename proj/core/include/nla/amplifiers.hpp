#pragma once

#include "nla/fock.hpp"

namespace nla {

enum class Scheme { ideal_g, quantum_scissors };

/// Amplifier scheme with its nominal amplitude gain g > 1.
class AmplifierSpec {
public:
  AmplifierSpec(Scheme scheme, double nominal_gain);

  [[nodiscard]] Scheme scheme() const { return scheme_; }
  [[nodiscard]] double gain() const { return g_; }

private:
  Scheme scheme_;
  double g_;
};

/// Figures of merit of one amplifier on one coherent input. Variances are
/// in shot-noise units; success_weight is the squared norm of the
/// unnormalized conditional output of a normalized input.
struct AmplifierReport {
  double g_eff = 0.0;
  double fidelity = 0.0;
  double n_eq = 0.0;
  double success_weight = 0.0;
  double var_x_amp = 0.0;
  double var_p_amp = 0.0;
};

/// Unnormalized output together with <psi|G^2|psi>/<psi|psi>.
struct AmplifiedState {
  PureState state;
  double success_weight;
};

/// Diagonal of G = (g-1) n + 1 over the cutoff. g = 2 gives a a^dagger.
Eigen::VectorXd g_operator(double g, FockCutoff cutoff);

AmplifiedState amplify_ideal(const PureState& psi, double g);

/// g_eff = 1 + (g-1)[1+(g-1)|a|^2] / [1+(g^2-1)|a|^2+(g-1)^2|a|^4].
double effective_gain_analytic(double g, double alpha_abs);

/// Fock-space ratio <alpha|G a G|alpha> / (alpha <alpha|G^2|alpha>).
/// At alpha = 0 the ratio is its limit, read off the leading-order Fock
/// matrix elements <0|G a G|1> / <0|G^2|0>.
double effective_gain_numeric(double g, complex alpha, FockCutoff cutoff);

/// F = [1+g(g-1)|a|^2]^2 exp(-(g-1)^2|a|^2) / [1+(g^2-1)|a|^2+(g-1)^2|a|^4].
double fidelity_analytic(double g, double alpha_abs);

/// Normalized overlap of G|alpha> with |g alpha>, evaluated in Fock space.
double fidelity_numeric(double g, complex alpha, FockCutoff cutoff);

/// (|0> + g alpha |1>) / sqrt(1 + g^2 |alpha|^2).
PureState scissors_output(complex alpha, double g, FockCutoff cutoff);

struct ScissorsMetrics {
  double g_eff;
  double fidelity;
};

ScissorsMetrics scissors_metrics(double g, double alpha_abs);

/// N_eq = var_x_amp / g_eff^2 - var_x_in. Negative means the output is
/// quieter than any amplifier that adds noise.
double equivalent_input_noise(double var_x_amp, double g_eff, double var_x_in);

/// Noise floors of deterministic phase-insensitive amplifiers, in shot-noise units.
struct NoiseBounds {
  double quantum_limited_added;       // 2(g^2 - 1)
  double classical_added;             // 2 g^2
  double best_deterministic_variance; // 2 g^2 - 1
};

NoiseBounds deterministic_noise_bounds(double g);

struct PhaseEstimation {
  double v_sql; // 1 / (4 |alpha|^2)
  double r_v;   // g_eff^-2 var_p(out) / var_p(in), var_p(in) = 1
};

PhaseEstimation phase_estimation_metrics(const DensityMatrix& rho_out, double alpha_abs,
                                         double g_eff);

/// Evaluates every figure of merit for the scheme on |alpha> in Fock space.
/// Variances and N_eq use the amplitude quadrature along arg(alpha).
AmplifierReport amplifier_report(const AmplifierSpec& spec, complex alpha, FockCutoff cutoff);

} // namespace nla
