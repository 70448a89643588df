#include "nla/amplifiers.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "nla/errors.hpp"

namespace nla {
namespace {

void require_gain(double g, double min, const char* where) {
  if (!std::isfinite(g) || g < min) {
    throw PreconditionError(std::string(where) + ": gain must be >= " + std::to_string(min) +
                            ", got " + std::to_string(g));
  }
}

void require_amplitude(double alpha_abs, const char* where) {
  if (!std::isfinite(alpha_abs) || alpha_abs < 0.0) {
    throw PreconditionError(std::string(where) + ": |alpha| must be finite and >= 0");
  }
}

} // namespace

AmplifierSpec::AmplifierSpec(Scheme scheme, double nominal_gain) : scheme_(scheme), g_(nominal_gain) {
  if (!std::isfinite(nominal_gain) || nominal_gain <= 1.0) {
    throw PreconditionError("AmplifierSpec: nominal gain must exceed 1");
  }
}

Eigen::VectorXd g_operator(double g, FockCutoff cutoff) {
  require_gain(g, 1.0, "g_operator");
  Eigen::VectorXd diag(cutoff.dim());
  for (int n = 0; n < cutoff.dim(); ++n) {
    diag(n) = (g - 1.0) * n + 1.0;
  }
  return diag;
}

AmplifiedState amplify_ideal(const PureState& psi, double g) {
  const Eigen::VectorXd diag = g_operator(g, psi.cutoff());
  CVector out = diag.cast<complex>().cwiseProduct(psi.amplitudes());
  const double in_norm = psi.norm_squared();
  if (in_norm == 0.0) {
    throw ZeroNormError("amplify_ideal: zero-norm input");
  }
  const double weight = out.squaredNorm() / in_norm;
  return {PureState(std::move(out)), weight};
}

double effective_gain_analytic(double g, double alpha_abs) {
  require_gain(g, 1.0, "effective_gain_analytic");
  require_amplitude(alpha_abs, "effective_gain_analytic");
  const double a2 = alpha_abs * alpha_abs;
  const double gm = g - 1.0;
  return 1.0 + gm * (1.0 + gm * a2) / (1.0 + (g * g - 1.0) * a2 + gm * gm * a2 * a2);
}

double effective_gain_numeric(double g, complex alpha, FockCutoff cutoff) {
  const Eigen::VectorXd diag = g_operator(g, cutoff);
  if (alpha == complex(0.0)) {
    // <0|G a G|1> = G_0 G_1, <0|G^2|0> = G_0^2.
    return diag(0) * diag(1) / (diag(0) * diag(0));
  }
  const PureState out = amplify_ideal(coherent_state(alpha, cutoff), g).state;
  return (expectation(out, Observable::annihilation()) / alpha).real();
}

double fidelity_analytic(double g, double alpha_abs) {
  require_gain(g, 1.0, "fidelity_analytic");
  require_amplitude(alpha_abs, "fidelity_analytic");
  const double a2 = alpha_abs * alpha_abs;
  const double gm = g - 1.0;
  const double num = 1.0 + g * gm * a2;
  return num * num * std::exp(-gm * gm * a2) /
         (1.0 + (g * g - 1.0) * a2 + gm * gm * a2 * a2);
}

double fidelity_numeric(double g, complex alpha, FockCutoff cutoff) {
  const PureState out = amplify_ideal(coherent_state(alpha, cutoff), g).state;
  return state_fidelity(out, coherent_state(g * alpha, cutoff));
}

PureState scissors_output(complex alpha, double g, FockCutoff cutoff) {
  require_gain(g, 1.0, "scissors_output");
  CVector c = CVector::Zero(cutoff.dim());
  const double norm = std::sqrt(1.0 + g * g * std::norm(alpha));
  c(0) = 1.0 / norm;
  c(1) = g * alpha / norm;
  return PureState(std::move(c));
}

ScissorsMetrics scissors_metrics(double g, double alpha_abs) {
  require_gain(g, 1.0, "scissors_metrics");
  require_amplitude(alpha_abs, "scissors_metrics");
  const double s = g * g * alpha_abs * alpha_abs;
  return {g / (1.0 + s), (1.0 + s) * std::exp(-s)};
}

double equivalent_input_noise(double var_x_amp, double g_eff, double var_x_in) {
  if (!(g_eff > 0.0) || !(var_x_amp > 0.0) || !(var_x_in > 0.0)) {
    throw PreconditionError("equivalent_input_noise: gain and variances must be positive");
  }
  return var_x_amp / (g_eff * g_eff) - var_x_in;
}

NoiseBounds deterministic_noise_bounds(double g) {
  require_gain(g, 1.0, "deterministic_noise_bounds");
  const double g2 = g * g;
  return {2.0 * (g2 - 1.0), 2.0 * g2, 2.0 * g2 - 1.0};
}

PhaseEstimation phase_estimation_metrics(const DensityMatrix& rho_out, double alpha_abs,
                                         double g_eff) {
  if (!(alpha_abs > 0.0) || !std::isfinite(alpha_abs)) {
    throw PreconditionError("phase_estimation_metrics: |alpha| must be positive");
  }
  if (!(g_eff > 0.0)) {
    throw PreconditionError("phase_estimation_metrics: g_eff must be positive");
  }
  // The probe carries its amplitude on x, so the phase quadrature is p = x_{pi/2}.
  // A coherent input has var_p = 1 in shot-noise units.
  const double var_p = quadrature_variance(rho_out, std::numbers::pi / 2.0);
  return {1.0 / (4.0 * alpha_abs * alpha_abs), var_p / (g_eff * g_eff)};
}

AmplifierReport amplifier_report(const AmplifierSpec& spec, complex alpha, FockCutoff cutoff) {
  const double g = spec.gain();
  const PureState input = coherent_state(alpha, cutoff);
  PureState output = input;
  double weight = 0.0;
  double g_eff = 0.0;
  if (spec.scheme() == Scheme::ideal_g) {
    AmplifiedState amp = amplify_ideal(input, g);
    output = amp.state.normalized();
    weight = amp.success_weight;
    g_eff = effective_gain_numeric(g, alpha, cutoff);
  } else {
    output = scissors_output(alpha, g, cutoff);
    // Unnormalized scissors image of |alpha>: exp(-|a|^2/2)(|0> + g alpha |1>).
    weight = std::exp(-std::norm(alpha)) * (1.0 + g * g * std::norm(alpha));
    g_eff = alpha == complex(0.0) ? g
                                  : (expectation(output, Observable::annihilation()) / alpha).real();
  }
  const double phi = std::arg(alpha);
  AmplifierReport report;
  report.g_eff = g_eff;
  report.fidelity = state_fidelity(output, coherent_state(g * alpha, cutoff));
  report.success_weight = weight;
  report.var_x_amp = quadrature_variance(output, phi);
  report.var_p_amp = quadrature_variance(output, phi + std::numbers::pi / 2.0);
  report.n_eq = equivalent_input_noise(report.var_x_amp, g_eff, 1.0);
  return report;
}

} // namespace nla
