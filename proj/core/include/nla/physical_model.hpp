#pragma once

#include "nla/fock.hpp"

namespace nla {

/// Joint amplitudes of the signal mode and one ancilla (idler or the beam
/// splitter's reflected port), indexed (n_signal, n_ancilla). Both modes
/// share the signal cutoff.
class TwoModeState {
public:
  explicit TwoModeState(CMatrix amplitudes);

  /// psi (x) |0>_ancilla.
  static TwoModeState with_vacuum_ancilla(const PureState& signal);

  [[nodiscard]] const CMatrix& amplitudes() const { return amps_; }
  [[nodiscard]] FockCutoff signal_cutoff() const { return FockCutoff(static_cast<int>(amps_.rows()) - 1); }
  [[nodiscard]] FockCutoff ancilla_cutoff() const { return FockCutoff(static_cast<int>(amps_.cols()) - 1); }
  [[nodiscard]] double norm_squared() const { return amps_.squaredNorm(); }

  /// Unnormalized signal state given ancilla |k>.
  [[nodiscard]] PureState signal_given_ancilla(int k) const;

  /// sum_k |phi_k><phi_k| over ancilla numbers k in [first, last].
  [[nodiscard]] DensityMatrix signal_reduced(int first, int last) const;

private:
  CMatrix amps_;
};

/// exp[lambda (a^dagger b^dagger - a b)] applied to signal (x) |0>_idler by
/// summing the exponential series term by term until a term's norm drops
/// below 1e-14 of the input norm. Amplitude that would leave the cutoff is
/// tracked; more than 1e-10 of it throws TruncationError.
TwoModeState two_mode_squeeze(const PureState& signal, double lambda);

/// Beam splitter of reflectivity R acting on signal (x) |0>_reflected:
/// |n,0> -> sum_k sqrt(C(n,k)) t^{n-k} r^k |n-k, k>, t = sqrt(1-R), r = sqrt(R).
TwoModeState beam_splitter(const PureState& signal, double reflectivity);

/// Unnormalized signal states after an ideal on/off herald on the ancilla,
/// for a normalized input. click + no_click is the unconditional state.
struct HeraldBranches {
  DensityMatrix click;
  DensityMatrix no_click;
};

HeraldBranches addition_branches(const PureState& signal, double lambda);
HeraldBranches subtraction_branches(const DensityMatrix& signal, double reflectivity);

/// Normalized conditional state and the probability of the herald click.
struct HeraldedResult {
  DensityMatrix state;
  double success_prob;
};

/// Photon addition heralded by a click on the idler of a weak two-mode
/// squeezer. Requires 0 < lambda <= 0.3 and less than 1e-10 of the input
/// weight at or above n_max - 2.
HeraldedResult heralded_addition(const PureState& signal, double lambda);

/// Photon subtraction heralded by a click on the reflected port of a beam
/// splitter. Requires 0 < R < 0.5.
HeraldedResult heralded_subtraction(const DensityMatrix& signal, double reflectivity);
HeraldedResult heralded_subtraction(const PureState& signal, double reflectivity);

struct PhysicalAmplifierResult {
  HeraldedResult output;   // success_prob is the coincidence probability
  double addition_prob;    // P(idler click)
  double subtraction_prob; // P(tap click | idler click)
  double fidelity_to_ideal;
};

/// Addition then subtraction on |alpha>, heralded by the coincidence of both
/// detectors. fidelity_to_ideal compares against a a^dagger |alpha>, normalized.
PhysicalAmplifierResult physical_amplifier(complex alpha, double lambda, double reflectivity,
                                           FockCutoff cutoff);

/// Normalized signal state on pulses where neither detector clicks: the
/// un-amplified reference that passes through the same optics.
DensityMatrix physical_reference(complex alpha, double lambda, double reflectivity, FockCutoff cutoff);

} // namespace nla
