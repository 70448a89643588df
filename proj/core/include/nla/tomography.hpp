#pragma once

#include <string>
#include <vector>

#include "nla/fock.hpp"
#include "nla/homodyne.hpp"

namespace nla {

struct TomographySettings {
  FockCutoff cutoff{20};
  /// Detection efficiency folded into the POVM. With eta < 1 the result is
  /// the efficiency-corrected state; eta = 1 reconstructs the raw state.
  double eta = 1.0;
  int max_iters = 2000;
  /// Stop once the mean per-sample log-likelihood gains less than this.
  double ll_tol = 1e-10;
  /// Stop once no diagonal element moves by more than this.
  double diag_tol = 1e-8;
};

struct ReconstructionResult {
  DensityMatrix rho;
  /// Mean per-sample log-likelihood, starting with the initial state.
  std::vector<double> log_likelihood_trace;
  int iterations_used = 0;
  bool converged = false;
  std::vector<std::string> warnings;
};

/// POVM density of outcome x at LO phase theta seen through efficiency eta:
/// the adjoint loss map applied to |v><v|, v_n = e^{i n theta} psi_n(x).
CMatrix measurement_operator(double theta, double x, double eta, FockCutoff cutoff);

/// Iterative maximum-likelihood reconstruction
///   rho <- N[R(rho) rho R(rho)],  R(rho) = (1/N) sum_j Pi_j / Tr(Pi_j rho),
/// from the maximally mixed state. Each sample enters through its own
/// projector density; no binning. If a full step would lower the
/// likelihood, the step is diluted, rho <- N[(1+eps R) rho (1+eps R)], with
/// eps halved until the likelihood does not decrease.
ReconstructionResult maxlik_reconstruct(const QuadratureDataset& data, const TomographySettings& settings);

/// Fidelity of a reconstructed state with the doubled-amplitude target |2 alpha>.
double amplified_fidelity_diagnostic(const DensityMatrix& rho_rec, complex alpha);

} // namespace nla
