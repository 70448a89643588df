#pragma once

// Test-only reference computations. Nothing here calls into the code paths
// it is used to check: two-mode operations are built as full matrices and
// exponentiated, wavefunctions come from std::hermite, and coherent-state
// quantities use closed forms.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "nla/fock.hpp"

namespace oracle {

using nla::CMatrix;
using nla::CVector;
using nla::complex;

/// Single-mode annihilation matrix of dimension d.
inline CMatrix annihilation(int d) {
  CMatrix a = CMatrix::Zero(d, d);
  for (int n = 1; n < d; ++n) {
    a(n - 1, n) = std::sqrt(static_cast<double>(n));
  }
  return a;
}

/// Kronecker product, first factor = signal (slow index).
inline CMatrix kron(const CMatrix& x, const CMatrix& y) {
  CMatrix out(x.rows() * y.rows(), x.cols() * y.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      out.block(i * y.rows(), j * y.cols(), y.rows(), y.cols()) = x(i, j) * y;
    }
  }
  return out;
}

/// Beam splitter exp[theta (a^dagger b - a b^dagger)], cos^2 theta = transmissivity.
inline CMatrix beam_splitter_unitary(int d, double transmissivity) {
  const CMatrix a = kron(annihilation(d), CMatrix::Identity(d, d));
  const CMatrix b = kron(CMatrix::Identity(d, d), annihilation(d));
  const double theta = std::acos(std::sqrt(transmissivity));
  const CMatrix gen = theta * (a.adjoint() * b - a * b.adjoint());
  return gen.exp();
}

/// Two-mode squeezer exp[lambda (a^dagger b^dagger - a b)] on the truncated space.
inline CMatrix squeezer_unitary(int d, double lambda) {
  const CMatrix a = kron(annihilation(d), CMatrix::Identity(d, d));
  const CMatrix b = kron(CMatrix::Identity(d, d), annihilation(d));
  const CMatrix gen = lambda * (a.adjoint() * b.adjoint() - a * b);
  return gen.exp();
}

/// Tr_ancilla of a two-mode density matrix (signal slow index).
inline CMatrix trace_ancilla(const CMatrix& rho, int d) {
  CMatrix out = CMatrix::Zero(d, d);
  for (int m = 0; m < d; ++m) {
    for (int n = 0; n < d; ++n) {
      for (int k = 0; k < d; ++k) {
        out(m, n) += rho(m * d + k, n * d + k);
      }
    }
  }
  return out;
}

/// Normalized oscillator eigenfunction of x = a + a^dagger (vacuum density
/// N(0,1)) from the physicists' Hermite polynomial.
inline double wavefunction(int n, double x) {
  const double q = x / std::numbers::sqrt2;
  const double log_norm = -0.5 * (n * std::log(2.0) + std::lgamma(n + 1.0) + 0.5 * std::log(std::numbers::pi));
  const double h = std::hermite(static_cast<unsigned>(n), q);
  return h * std::exp(log_norm - 0.5 * q * q) / std::pow(2.0, 0.25);
}

inline double normal_pdf(double x, double mean, double var) {
  return std::exp(-0.5 * (x - mean) * (x - mean) / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

/// Wigner function of |beta><beta| in shot-noise units.
inline double coherent_wigner(complex beta, double x, double p) {
  const double dx = x - 2.0 * beta.real();
  const double dp = p - 2.0 * beta.imag();
  return std::exp(-0.5 * (dx * dx + dp * dp)) / (2.0 * std::numbers::pi);
}

/// Random normalized pure state with weight only on |0>..|support-1>.
inline nla::PureState random_state(std::mt19937_64& rng, int dim, int support) {
  std::normal_distribution<double> g(0.0, 1.0);
  CVector v = CVector::Zero(dim);
  for (int n = 0; n < support; ++n) {
    v(n) = complex(g(rng), g(rng));
  }
  v.normalize();
  return nla::PureState(v);
}

/// Random mixed state of rank `rank` supported on |0>..|support-1>.
inline nla::DensityMatrix random_density(std::mt19937_64& rng, int dim, int support, int rank) {
  CMatrix rho = CMatrix::Zero(dim, dim);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  double total = 0.0;
  for (int r = 0; r < rank; ++r) {
    const double w = u(rng);
    const CVector v = random_state(rng, dim, support).amplitudes();
    rho += w * v * v.adjoint();
    total += w;
  }
  return nla::DensityMatrix(rho / total);
}

} // namespace oracle
