#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nla/amplifiers.hpp"
#include "nla/errors.hpp"
#include "nla/homodyne.hpp"
#include "nla/tomography.hpp"
#include "oracles.hpp"

using namespace nla;

namespace {

void check_nondecreasing(const std::vector<double>& trace) {
  for (std::size_t i = 1; i < trace.size(); ++i) {
    CHECK(trace[i] >= trace[i - 1] - 1e-12);
  }
}

} // namespace

TEST_CASE("measurement_operator") {
  const FockCutoff cut(15);
  SUBCASE("lossless operator is a rank-one projector density") {
    const CMatrix pi = measurement_operator(0.0, 0.0, 1.0, cut);
    CHECK(std::abs(pi(0, 0).real() - 1.0 / std::sqrt(2.0 * std::numbers::pi)) < 1e-14);
    const double x = 0.8;
    const double theta = 0.6;
    const CMatrix p = measurement_operator(theta, x, 1.0, cut);
    for (int m = 0; m < 4; ++m) {
      for (int n = 0; n < 4; ++n) {
        const complex ref = oracle::wavefunction(m, x) * oracle::wavefunction(n, x) *
                            std::polar(1.0, (m - n) * theta);
        CHECK(std::abs(p(m, n) - ref) < 1e-12);
      }
    }
  }
  SUBCASE("duality with the quadrature density") {
    std::mt19937_64 rng(6);
    const DensityMatrix rho = oracle::random_density(rng, 16, 10, 3);
    for (double eta : {1.0, 0.6}) {
      const DensityMatrix lossy = loss_channel(rho, eta);
      for (double x : {-2.5, 0.1, 1.7}) {
        const double direct = quadrature_density(lossy, 0.9, x);
        const double via_povm = (rho.elements() * measurement_operator(0.9, x, eta, cut)).trace().real();
        CHECK(std::abs(direct - via_povm) < 1e-8);
      }
    }
  }
  SUBCASE("integrates to the identity") {
    const FockCutoff small(8);
    const std::vector<double> grid = uniform_grid(-14.0, 14.0, 0.01);
    for (double eta : {1.0, 0.6}) {
      CMatrix total = CMatrix::Zero(9, 9);
      for (double x : grid) {
        total += 0.01 * measurement_operator(1.3, x, eta, small);
      }
      CHECK((total - CMatrix::Identity(9, 9)).cwiseAbs().maxCoeff() < 1e-6);
    }
  }
}

TEST_CASE("maxlik_reconstruct") {
  SUBCASE("vacuum") {
    const FockCutoff cut(10);
    const DensityMatrix vac = DensityMatrix::from_pure(PureState::vacuum(cut));
    const std::vector<double> phases = phase_grid(6);
    const QuadratureDataset data = sample_quadratures(vac, phases, 2000, 1.0, 5, SampleTag::vacuum);
    TomographySettings settings;
    settings.cutoff = cut;
    const ReconstructionResult r = maxlik_reconstruct(data, settings);
    CHECK(state_fidelity(r.rho, PureState::vacuum(cut)) >= 0.995);
    CHECK(r.warnings.empty());
    CHECK(r.log_likelihood_trace.size() == static_cast<std::size_t>(r.iterations_used) + 1);
    check_nondecreasing(r.log_likelihood_trace);
    CHECK_NOTHROW(r.rho.check_physical());
  }
  SUBCASE("lossy amplified state with efficiency correction") {
    const FockCutoff cut(14);
    const double alpha = 0.5;
    const PureState truth = amplify_ideal(coherent_state(alpha, cut), 2.0).state.normalized();
    const std::vector<double> phases = phase_grid(11);
    const QuadratureDataset data =
        sample_quadratures(DensityMatrix::from_pure(truth), phases, 3000, 0.8, 12);
    TomographySettings settings;
    settings.cutoff = cut;
    settings.eta = 0.8;
    const ReconstructionResult r = maxlik_reconstruct(data, settings);
    CHECK(state_fidelity(r.rho, truth) >= 0.97);
    check_nondecreasing(r.log_likelihood_trace);
    CHECK(r.rho.trace() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(r.rho.min_eigenvalue() > -1e-10);

    const ReconstructionResult again = maxlik_reconstruct(data, settings);
    CHECK(again.rho.elements() == r.rho.elements());
    CHECK(again.log_likelihood_trace == r.log_likelihood_trace);
  }
  SUBCASE("single phase warns") {
    const FockCutoff cut(6);
    const std::vector<double> phases{0.0};
    const QuadratureDataset data =
        sample_quadratures(DensityMatrix::from_pure(PureState::vacuum(cut)), phases, 500, 1.0, 3);
    TomographySettings settings;
    settings.cutoff = cut;
    settings.max_iters = 50;
    const ReconstructionResult r = maxlik_reconstruct(data, settings);
    CHECK_FALSE(r.warnings.empty());
  }
  SUBCASE("invalid input") {
    TomographySettings settings;
    CHECK_THROWS_AS(maxlik_reconstruct(QuadratureDataset{}, settings), PreconditionError);
    const std::vector<double> phases{0.0};
    const QuadratureDataset data =
        sample_quadratures(DensityMatrix::from_pure(PureState::vacuum(FockCutoff(6))), phases, 50, 1.0, 3);
    settings.max_iters = 0;
    CHECK_THROWS_AS(maxlik_reconstruct(data, settings), PreconditionError);
  }
}

TEST_CASE("amplified_fidelity_diagnostic") {
  const FockCutoff cut(30);
  const DensityMatrix target = DensityMatrix::from_pure(coherent_state(1.3, cut));
  CHECK(amplified_fidelity_diagnostic(target, 0.65) == doctest::Approx(1.0).epsilon(1e-12));
  const DensityMatrix amplified =
      DensityMatrix::from_pure(amplify_ideal(coherent_state(0.65, cut), 2.0).state.normalized());
  CHECK(amplified_fidelity_diagnostic(amplified, 0.65) == doctest::Approx(0.9121069395815827).epsilon(1e-9));
}
