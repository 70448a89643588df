#include "nla/fock.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "nla/errors.hpp"

namespace nla {

double poisson_tail(double mean, int n_max) {
  if (mean < 0.0 || !std::isfinite(mean)) {
    throw PreconditionError("poisson_tail: mean must be finite and non-negative");
  }
  if (mean == 0.0) {
    return 0.0;
  }
  // Sum the tail directly; 1 - (head sum) loses everything below 1e-16.
  const double log_mean = std::log(mean);
  double tail = 0.0;
  for (int n = n_max + 1;; ++n) {
    const double term = std::exp(-mean + n * log_mean - std::lgamma(n + 1.0));
    tail += term;
    if (n > mean && term <= 1e-30 * tail) {
      break;
    }
    if (n > n_max + 100000) {
      break;
    }
  }
  return tail;
}

FockCutoff::FockCutoff(int n_max) : n_max_(n_max) {
  if (n_max < 1) {
    throw PreconditionError("FockCutoff: n_max must be >= 1, got " + std::to_string(n_max));
  }
}

FockCutoff FockCutoff::covering(double amplitude) {
  const double mean = amplitude * amplitude;
  int n = 20;
  while (poisson_tail(mean, n) >= kTailTolerance) {
    ++n;
  }
  return FockCutoff(n);
}

bool FockCutoff::admits(double amplitude) const {
  return poisson_tail(amplitude * amplitude, n_max_) < kTailTolerance;
}

PureState::PureState(CVector amplitudes) : amps_(std::move(amplitudes)) {
  if (amps_.size() < 2) {
    throw PreconditionError("PureState: need at least two Fock amplitudes");
  }
  if (!amps_.allFinite()) {
    throw PreconditionError("PureState: amplitudes must be finite");
  }
}

PureState PureState::fock(int n, FockCutoff cutoff) {
  if (n < 0 || n > cutoff.n_max()) {
    throw TruncationError("fock state |" + std::to_string(n) + "> outside cutoff " +
                          std::to_string(cutoff.n_max()));
  }
  CVector v = CVector::Zero(cutoff.dim());
  v(n) = 1.0;
  return PureState(std::move(v));
}

complex PureState::amplitude(int n) const {
  if (n < 0 || n >= amps_.size()) {
    return 0.0;
  }
  return amps_(n);
}

PureState PureState::normalized() const {
  const double norm = amps_.norm();
  if (norm == 0.0) {
    throw ZeroNormError("cannot normalize the zero state");
  }
  return PureState(amps_ / norm);
}

DensityMatrix::DensityMatrix(CMatrix elements) : rho_(std::move(elements)) {
  if (rho_.rows() != rho_.cols() || rho_.rows() < 2) {
    throw PreconditionError("DensityMatrix: need a square matrix of dimension >= 2");
  }
  if (!rho_.allFinite()) {
    throw PreconditionError("DensityMatrix: elements must be finite");
  }
  const double scale = std::max(1.0, rho_.cwiseAbs().maxCoeff());
  const double asym = (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale) {
    throw PreconditionError("DensityMatrix: matrix is not Hermitian (deviation " +
                            std::to_string(asym) + ")");
  }
  rho_ = 0.5 * (rho_ + rho_.adjoint()).eval();
}

DensityMatrix DensityMatrix::from_pure(const PureState& psi) {
  const CVector& v = psi.amplitudes();
  return DensityMatrix(v * v.adjoint());
}

DensityMatrix DensityMatrix::normalized() const {
  const double tr = trace();
  if (!(tr > 0.0)) {
    throw ZeroNormError("cannot normalize a density matrix with non-positive trace");
  }
  return DensityMatrix(rho_ / tr);
}

double DensityMatrix::purity() const {
  const double tr = trace();
  if (!(tr > 0.0)) {
    throw ZeroNormError("purity of a zero-trace density matrix");
  }
  // Tr(rho^2) = sum |rho_mn|^2 for Hermitian rho.
  return rho_.squaredNorm() / (tr * tr);
}

double DensityMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(rho_, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

void DensityMatrix::check_physical(double eig_tol) const {
  const double tr = trace();
  if (!(tr > 0.0) || tr > 1.0 + 1e-12) {
    throw ConvergenceError("density matrix trace " + std::to_string(tr) + " outside (0, 1]");
  }
  const double lmin = min_eigenvalue();
  if (lmin < -eig_tol) {
    throw ConvergenceError("density matrix not positive semidefinite: min eigenvalue " +
                           std::to_string(lmin));
  }
}

PureState coherent_state(complex alpha, FockCutoff cutoff) {
  if (!std::isfinite(alpha.real()) || !std::isfinite(alpha.imag())) {
    throw PreconditionError("coherent_state: alpha must be finite");
  }
  const double r = std::abs(alpha);
  if (!cutoff.admits(r)) {
    throw TruncationError("coherent_state: cutoff " + std::to_string(cutoff.n_max()) +
                          " too small for |alpha| = " + std::to_string(r));
  }
  CVector c(cutoff.dim());
  c(0) = std::exp(-0.5 * r * r);
  for (int n = 1; n < c.size(); ++n) {
    c(n) = c(n - 1) * alpha / std::sqrt(static_cast<double>(n));
  }
  return PureState(std::move(c));
}

PureState apply_ladder(const PureState& psi, Ladder which) {
  const CVector& c = psi.amplitudes();
  const auto dim = c.size();
  CVector out = CVector::Zero(dim);
  if (which == Ladder::creation) {
    if (std::abs(c(dim - 1)) > 1e-12 * std::max(c.norm(), 1e-300)) {
      throw TruncationError("creation operator would push amplitude past n_max = " +
                            std::to_string(dim - 1));
    }
    for (Eigen::Index n = 0; n + 1 < dim; ++n) {
      out(n + 1) = std::sqrt(static_cast<double>(n + 1)) * c(n);
    }
  } else {
    for (Eigen::Index n = 1; n < dim; ++n) {
      out(n - 1) = std::sqrt(static_cast<double>(n)) * c(n);
    }
  }
  return PureState(std::move(out));
}

namespace {

// Normal-ordered moments <a>, <a^2>, <a^dagger a> of a state, unnormalized,
// plus the norm they should be divided by.
struct Moments {
  complex a;
  complex a2;
  double n;
  double norm;
};

Moments moments(const PureState& psi) {
  const CVector& c = psi.amplitudes();
  Moments m{0.0, 0.0, 0.0, c.squaredNorm()};
  for (Eigen::Index k = 1; k < c.size(); ++k) {
    const double sk = std::sqrt(static_cast<double>(k));
    m.a += std::conj(c(k - 1)) * sk * c(k);
    m.n += static_cast<double>(k) * std::norm(c(k));
    if (k >= 2) {
      m.a2 += std::conj(c(k - 2)) * std::sqrt(static_cast<double>(k * (k - 1))) * c(k);
    }
  }
  return m;
}

Moments moments(const DensityMatrix& rho) {
  const CMatrix& r = rho.elements();
  Moments m{0.0, 0.0, 0.0, rho.trace()};
  // Tr(rho a) = sum_k sqrt(k) rho(k, k-1).
  for (Eigen::Index k = 1; k < r.rows(); ++k) {
    const double sk = std::sqrt(static_cast<double>(k));
    m.a += sk * r(k, k - 1);
    m.n += static_cast<double>(k) * r(k, k).real();
    if (k >= 2) {
      m.a2 += std::sqrt(static_cast<double>(k * (k - 1))) * r(k, k - 2);
    }
  }
  return m;
}

complex evaluate(const Moments& m, const Observable& obs) {
  if (!(m.norm > 0.0)) {
    throw ZeroNormError("expectation value of a zero-norm state");
  }
  const complex a = m.a / m.norm;
  const complex a2 = m.a2 / m.norm;
  const double n = m.n / m.norm;
  const complex phase = std::polar(1.0, -obs.theta);
  switch (obs.kind) {
  case Observable::Kind::number:
    return n;
  case Observable::Kind::annihilation:
    return a;
  case Observable::Kind::quadrature:
    return 2.0 * (a * phase).real();
  case Observable::Kind::quadrature_squared:
    return 2.0 * (a2 * phase * phase).real() + 2.0 * n + 1.0;
  }
  return 0.0;
}

} // namespace

complex expectation(const PureState& psi, const Observable& obs) {
  return evaluate(moments(psi), obs);
}

complex expectation(const DensityMatrix& rho, const Observable& obs) {
  return evaluate(moments(rho), obs);
}

double quadrature_variance(const PureState& psi, double theta) {
  const Moments m = moments(psi);
  const double mean = evaluate(m, Observable::quadrature(theta)).real();
  return evaluate(m, Observable::quadrature_squared(theta)).real() - mean * mean;
}

double quadrature_variance(const DensityMatrix& rho, double theta) {
  const Moments m = moments(rho);
  const double mean = evaluate(m, Observable::quadrature(theta)).real();
  return evaluate(m, Observable::quadrature_squared(theta)).real() - mean * mean;
}

double state_fidelity(const PureState& a, const PureState& b) {
  if (a.cutoff() != b.cutoff()) {
    throw PreconditionError("state_fidelity: states built at different cutoffs");
  }
  const double na = a.norm_squared();
  const double nb = b.norm_squared();
  if (na == 0.0 || nb == 0.0) {
    throw ZeroNormError("state_fidelity: zero-norm state");
  }
  const double f = std::norm(b.amplitudes().dot(a.amplitudes())) / (na * nb);
  return std::clamp(f, 0.0, 1.0);
}

double state_fidelity(const DensityMatrix& a, const PureState& b) {
  if (a.cutoff() != b.cutoff()) {
    throw PreconditionError("state_fidelity: states built at different cutoffs");
  }
  const double tr = a.trace();
  const double nb = b.norm_squared();
  if (!(tr > 0.0) || nb == 0.0) {
    throw ZeroNormError("state_fidelity: zero-norm state");
  }
  const CVector& v = b.amplitudes();
  const double f = v.dot(a.elements() * v).real() / (tr * nb);
  return std::clamp(f, 0.0, 1.0);
}

double uhlmann_fidelity(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.cutoff() != b.cutoff()) {
    throw PreconditionError("uhlmann_fidelity: states built at different cutoffs");
  }
  const CMatrix ra = a.normalized().elements();
  const CMatrix rb = b.normalized().elements();
  Eigen::SelfAdjointEigenSolver<CMatrix> sa(ra);
  auto clipped_roots = [](const Eigen::VectorXd& eig) {
    const double floor = 1e-14 * std::max(eig.cwiseAbs().maxCoeff(), 1e-300);
    return eig.unaryExpr([floor](double v) { return v > floor ? std::sqrt(v) : 0.0; }).eval();
  };
  const Eigen::VectorXd roots = clipped_roots(sa.eigenvalues());
  const CMatrix sqrt_a = sa.eigenvectors() * roots.cast<complex>().asDiagonal() * sa.eigenvectors().adjoint();
  CMatrix m = sqrt_a * rb * sqrt_a;
  m = 0.5 * (m + m.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<CMatrix> sm(m, Eigen::EigenvaluesOnly);
  const double tr = clipped_roots(sm.eigenvalues()).sum();
  return std::clamp(tr * tr, 0.0, 1.0);
}

} // namespace nla
