#include "nla/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "nla/errors.hpp"

namespace nla {
namespace {

// Samples sharing one LO phase: rows of `psi` are wavefunction vectors.
struct PhaseBlock {
  double theta;
  Eigen::MatrixXd psi;
  CVector phase; // e^{i n theta}
};

std::vector<PhaseBlock> build_blocks(const QuadratureDataset& data, int n_max) {
  std::map<double, std::vector<double>> by_phase;
  for (const auto& r : data.records) {
    by_phase[r.theta].push_back(r.x);
  }
  std::vector<PhaseBlock> blocks;
  for (const auto& [theta, xs] : by_phase) {
    PhaseBlock b{theta, Eigen::MatrixXd(static_cast<Eigen::Index>(xs.size()), n_max + 1),
                 CVector(n_max + 1)};
    for (std::size_t j = 0; j < xs.size(); ++j) {
      b.psi.row(static_cast<Eigen::Index>(j)) = oscillator_wavefunctions(xs[j], n_max).transpose();
    }
    for (int n = 0; n <= n_max; ++n) {
      b.phase(n) = std::polar(1.0, n * theta);
    }
    blocks.push_back(std::move(b));
  }
  return blocks;
}

class Likelihood {
public:
  Likelihood(std::vector<PhaseBlock> blocks, double eta, std::size_t samples)
      : blocks_(std::move(blocks)), eta_(eta), samples_(static_cast<double>(samples)) {}

  // Outcome probabilities for rho, per block, and the mean log-likelihood.
  double evaluate(const CMatrix& rho, std::vector<Eigen::VectorXd>& probs) const {
    const CMatrix detected = eta_ < 1.0 ? loss_channel(DensityMatrix(rho), eta_).elements() : rho;
    probs.resize(blocks_.size());
    double ll = 0.0;
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      const PhaseBlock& blk = blocks_[b];
      const Eigen::MatrixXd rotated =
          (blk.phase.asDiagonal().inverse() * detected * blk.phase.asDiagonal()).real();
      auto work = scratch(blk);
      work.noalias() = blk.psi * rotated;
      probs[b].resize(blk.psi.rows());
      probs[b].noalias() = work.cwiseProduct(blk.psi).rowwise().sum();
      for (Eigen::Index j = 0; j < probs[b].size(); ++j) {
        const double p = probs[b](j);
        if (!(p > 0.0)) {
          throw ConvergenceError("maxlik_reconstruct: non-positive outcome probability");
        }
        ll += std::log(p);
      }
    }
    return ll / samples_;
  }

  // R(rho) from the outcome probabilities of rho.
  CMatrix r_operator(const std::vector<Eigen::VectorXd>& probs) const {
    const auto dim = blocks_.front().psi.cols();
    CMatrix s = CMatrix::Zero(dim, dim);
    Eigen::MatrixXd block_sum(dim, dim);
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      const PhaseBlock& blk = blocks_[b];
      auto weighted = scratch(blk);
      weighted = blk.psi.array().colwise() / probs[b].array();
      block_sum.noalias() = blk.psi.transpose() * weighted;
      s += blk.phase.asDiagonal() * block_sum.cast<complex>() * blk.phase.asDiagonal().inverse();
    }
    s /= samples_;
    return loss_channel_adjoint(s, eta_);
  }

private:
  // Reused across iterations: one row per sample of the largest block.
  [[nodiscard]] Eigen::Ref<Eigen::MatrixXd> scratch(const PhaseBlock& blk) const {
    if (work_.rows() < blk.psi.rows() || work_.cols() != blk.psi.cols()) {
      work_.resize(blk.psi.rows(), blk.psi.cols());
    }
    return work_.topRows(blk.psi.rows());
  }

  std::vector<PhaseBlock> blocks_;
  double eta_;
  double samples_;
  mutable Eigen::MatrixXd work_;
};

CMatrix normalized_step(const CMatrix& rho, const CMatrix& r, double eps) {
  CMatrix left = r;
  if (eps > 0.0) {
    left = CMatrix::Identity(r.rows(), r.cols()) + eps * r;
  }
  CMatrix next = left * rho * left.adjoint();
  next = 0.5 * (next + next.adjoint()).eval();
  return next / next.trace().real();
}

} // namespace

CMatrix measurement_operator(double theta, double x, double eta, FockCutoff cutoff) {
  const Eigen::VectorXd psi = oscillator_wavefunctions(x, cutoff.n_max());
  CVector v(cutoff.dim());
  for (int n = 0; n < cutoff.dim(); ++n) {
    v(n) = std::polar(psi(n), n * theta);
  }
  return loss_channel_adjoint(v * v.adjoint(), eta);
}

ReconstructionResult maxlik_reconstruct(const QuadratureDataset& data, const TomographySettings& settings) {
  if (data.records.empty()) {
    throw PreconditionError("maxlik_reconstruct: empty dataset");
  }
  if (settings.max_iters < 1 || !(settings.ll_tol > 0.0) || !(settings.diag_tol > 0.0)) {
    throw PreconditionError("maxlik_reconstruct: need max_iters >= 1 and positive tolerances");
  }
  if (!(settings.eta > 0.0 && settings.eta <= 1.0)) {
    throw PreconditionError("maxlik_reconstruct: efficiency must lie in (0, 1]");
  }
  const int n_max = settings.cutoff.n_max();
  const int dim = settings.cutoff.dim();

  ReconstructionResult result{DensityMatrix(CMatrix::Identity(dim, dim) / dim), {}, 0, false, {}};
  std::vector<PhaseBlock> blocks = build_blocks(data, n_max);
  if (blocks.size() < 2) {
    result.warnings.emplace_back(
        "single LO phase: only phase-averaged information is recoverable; off-diagonal elements "
        "are unconstrained");
  }
  const Likelihood likelihood(std::move(blocks), settings.eta, data.records.size());

  CMatrix rho = result.rho.elements();
  std::vector<Eigen::VectorXd> probs;
  double ll = likelihood.evaluate(rho, probs);
  result.log_likelihood_trace.push_back(ll);

  std::vector<Eigen::VectorXd> next_probs;
  for (int iter = 1; iter <= settings.max_iters; ++iter) {
    const CMatrix r = likelihood.r_operator(probs);
    CMatrix next = normalized_step(rho, r, 0.0);
    double next_ll = likelihood.evaluate(next, next_probs);
    // The plain R rho R step is not guaranteed to climb; dilute until it does.
    for (double eps = 1.0; next_ll < ll && eps > 1e-12; eps *= 0.5) {
      next = normalized_step(rho, r, eps);
      next_ll = likelihood.evaluate(next, next_probs);
    }
    if (next_ll < ll) {
      // No ascent direction left at double precision: rho is the maximum.
      result.converged = true;
      break;
    }
    DensityMatrix(next).check_physical(1e-10);
    const double diag_change = (next.diagonal() - rho.diagonal()).cwiseAbs().maxCoeff();
    const double gain = next_ll - ll;
    rho = std::move(next);
    std::swap(probs, next_probs);
    ll = next_ll;
    result.log_likelihood_trace.push_back(ll);
    result.iterations_used = iter;
    if (gain < settings.ll_tol || diag_change < settings.diag_tol) {
      result.converged = true;
      break;
    }
  }
  result.rho = DensityMatrix(rho);
  result.rho.check_physical(1e-10);
  return result;
}

double amplified_fidelity_diagnostic(const DensityMatrix& rho_rec, complex alpha) {
  return state_fidelity(rho_rec, coherent_state(2.0 * alpha, rho_rec.cutoff()));
}

} // namespace nla
