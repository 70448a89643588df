#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "nla/amplifiers.hpp"
#include "nla/errors.hpp"
#include "nla/homodyne.hpp"
#include "oracles.hpp"

using namespace nla;

namespace {

double max_diff(const CMatrix& x, const CMatrix& y) { return (x - y).cwiseAbs().maxCoeff(); }

double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

double variance_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) {
    s += (x - m) * (x - m);
  }
  return s / (v.size() - 1);
}

} // namespace

TEST_CASE("loss channel") {
  const FockCutoff cut(20);
  SUBCASE("coherent states lose amplitude") {
    const DensityMatrix out = loss_channel(coherent_state(0.8, cut), 0.6);
    CHECK(state_fidelity(out, coherent_state(0.8 * std::sqrt(0.6), cut)) > 1.0 - 1e-12);
  }
  SUBCASE("single photon") {
    const DensityMatrix out = loss_channel(PureState::fock(1, cut), 0.6);
    CHECK(std::abs(out(1, 1) - 0.6) < 1e-15);
    CHECK(std::abs(out(0, 0) - 0.4) < 1e-15);
    CHECK(std::abs(out.trace() - 1.0) < 1e-15);
  }
  SUBCASE("endpoints") {
    std::mt19937_64 rng(1);
    const DensityMatrix rho = oracle::random_density(rng, 21, 12, 2);
    CHECK(max_diff(loss_channel(rho, 1.0).elements(), rho.elements()) < 1e-14);
    CHECK_THROWS_AS(loss_channel(rho, 0.0), PreconditionError);
    CHECK_THROWS_AS(loss_channel(rho, 1.1), PreconditionError);
    CHECK_THROWS_AS(loss_channel(rho, -0.1), PreconditionError);
  }
  SUBCASE("matches a beam splitter with a traced-out port") {
    const int d = 12;
    std::mt19937_64 rng(2);
    const PureState psi = oracle::random_state(rng, d, 7);
    const double eta = 0.65;
    const CMatrix u = oracle::beam_splitter_unitary(d, eta);
    CVector in = CVector::Zero(d * d);
    for (int n = 0; n < d; ++n) {
      in(n * d) = psi.amplitude(n);
    }
    const CVector out = u * in;
    const CMatrix ref = oracle::trace_ancilla(out * out.adjoint(), d);
    CHECK(max_diff(loss_channel(psi, eta).elements(), ref) < 1e-12);
  }
  SUBCASE("properties") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 10; ++trial) {
      const DensityMatrix rho = oracle::random_density(rng, 25, 20, 3);
      const double e1 = 0.3 + 0.06 * trial;
      const double e2 = 0.9 - 0.05 * trial;
      const DensityMatrix twice = loss_channel(loss_channel(rho, e1), e2);
      CHECK(max_diff(twice.elements(), loss_channel(rho, e1 * e2).elements()) < 1e-10);
      const DensityMatrix out = loss_channel(rho, e1);
      CHECK(std::abs(out.trace() - 1.0) < 1e-12);
      CHECK(out.min_eigenvalue() > -1e-12);
      // Duality with the Heisenberg-picture map.
      const DensityMatrix op_src = oracle::random_density(rng, 25, 25, 4);
      const CMatrix op = op_src.elements();
      const complex lhs = (out.elements() * op).trace();
      const complex rhs = (rho.elements() * loss_channel_adjoint(op, e1)).trace();
      CHECK(std::abs(lhs - rhs) < 1e-12);
    }
  }
}

TEST_CASE("oscillator wavefunctions") {
  for (double x : {-7.3, -2.0, -0.1, 0.0, 0.55, 3.0, 9.0}) {
    const Eigen::VectorXd psi = oscillator_wavefunctions(x, 60);
    for (int n = 0; n <= 60; ++n) {
      const double ref = oracle::wavefunction(n, x);
      CHECK(std::abs(psi(n) - ref) < 1e-10 * std::max(1.0, std::abs(ref)));
    }
  }
}

TEST_CASE("quadrature_pdf") {
  const FockCutoff cut(20);
  const std::vector<double> grid = uniform_grid(-14.0, 14.0, 0.01);
  SUBCASE("vacuum is the standard normal at every phase") {
    const DensityMatrix vac = DensityMatrix::from_pure(PureState::vacuum(cut));
    for (double theta : {0.0, 0.7, 2.0}) {
      const Eigen::VectorXd p = quadrature_pdf(vac, theta, grid);
      for (std::size_t i = 0; i < grid.size(); i += 37) {
        CHECK(std::abs(p(i) - oracle::normal_pdf(grid[i], 0.0, 1.0)) < 1e-12);
      }
    }
  }
  SUBCASE("coherent states are shifted normals") {
    const complex alpha = std::polar(0.9, 0.5);
    const DensityMatrix c = DensityMatrix::from_pure(coherent_state(alpha, FockCutoff(30)));
    for (double theta : {0.0, 1.1}) {
      const double mean = 2.0 * std::real(alpha * std::polar(1.0, -theta));
      const Eigen::VectorXd p = quadrature_pdf(c, theta, grid);
      for (std::size_t i = 0; i < grid.size(); i += 41) {
        CHECK(std::abs(p(i) - oracle::normal_pdf(grid[i], mean, 1.0)) < 1e-10);
      }
    }
  }
  SUBCASE("single photon density") {
    const DensityMatrix one = DensityMatrix::from_pure(PureState::fock(1, cut));
    const Eigen::VectorXd p = quadrature_pdf(one, 0.0, grid);
    for (std::size_t i = 0; i < grid.size(); i += 53) {
      CHECK(std::abs(p(i) - grid[i] * grid[i] * oracle::normal_pdf(grid[i], 0.0, 1.0)) < 1e-12);
    }
  }
  SUBCASE("normalized and non-negative") {
    std::mt19937_64 rng(8);
    const DensityMatrix rho = oracle::random_density(rng, 21, 15, 3);
    const std::vector<double> wide = uniform_grid(-20.0, 20.0, 0.01);
    const Eigen::VectorXd p = quadrature_pdf(rho, 0.4, wide);
    CHECK(p.minCoeff() > -1e-14);
    const double integral = 0.01 * (p.sum() - 0.5 * (p(0) + p(p.size() - 1)));
    CHECK(std::abs(integral - 1.0) < 1e-6);
  }
  SUBCASE("grid validation") {
    const DensityMatrix vac = DensityMatrix::from_pure(PureState::vacuum(cut));
    CHECK_THROWS_AS(quadrature_pdf(vac, 0.0, uniform_grid(-10.0, 10.0, 0.05)), PreconditionError);
    CHECK_THROWS_AS(quadrature_pdf(vac, 0.0, uniform_grid(-3.0, 3.0, 0.01)), PreconditionError);
    std::vector<double> ragged = grid;
    ragged[100] += 0.003;
    CHECK_THROWS_AS(quadrature_pdf(vac, 0.0, ragged), PreconditionError);
  }
}

TEST_CASE("sampling") {
  const FockCutoff cut(20);
  SUBCASE("vacuum statistics") {
    const DensityMatrix vac = DensityMatrix::from_pure(PureState::vacuum(cut));
    const std::vector<double> phases{0.0};
    const QuadratureDataset ds = sample_quadratures(vac, phases, 100000, 1.0, 42, SampleTag::vacuum);
    const std::vector<double> x = ds.values_at(0);
    REQUIRE(x.size() == 100000);
    CHECK(std::abs(mean_of(x)) < 3.0 / std::sqrt(1e5));
    CHECK(std::abs(variance_of(x) - 1.0) < 0.015);
    CHECK(ds.records.front().tag == SampleTag::vacuum);
  }
  SUBCASE("lossy coherent mean") {
    const DensityMatrix c = DensityMatrix::from_pure(coherent_state(0.5, cut));
    const std::vector<double> phases{0.0};
    const std::vector<double> x = sample_quadratures(c, phases, 100000, 0.6, 7).values_at(0);
    CHECK(std::abs(mean_of(x) - 2.0 * 0.5 * std::sqrt(0.6)) < 3.0 / std::sqrt(1e5));
    CHECK(std::abs(variance_of(x) - 1.0) < 0.015);
  }
  SUBCASE("determinism and layout") {
    const DensityMatrix c = DensityMatrix::from_pure(coherent_state(0.3, cut));
    const std::vector<double> phases = phase_grid(5);
    const QuadratureDataset a = sample_quadratures(c, phases, 200, 0.8, 99);
    const QuadratureDataset b = sample_quadratures(c, phases, 200, 0.8, 99);
    CHECK(a == b);
    CHECK(a.records.size() == 1000);
    CHECK(a.records[200].theta == phases[1]);
    CHECK(a.counts_per_phase == 200);
    CHECK(a.eta == 0.8);
    const QuadratureDataset other = sample_quadratures(c, phases, 200, 0.8, 100);
    CHECK_FALSE(a == other);
  }
  SUBCASE("preconditions") {
    const DensityMatrix c = DensityMatrix::from_pure(coherent_state(0.3, cut));
    const std::vector<double> phases{0.0};
    const std::vector<double> none;
    CHECK_THROWS_AS(sample_quadratures(c, phases, 0, 1.0, 1), PreconditionError);
    CHECK_THROWS_AS(sample_quadratures(c, none, 10, 1.0, 1), PreconditionError);
    CHECK_THROWS_AS(sample_quadratures(c, phases, 10, 0.0, 1), PreconditionError);
  }
}

TEST_CASE("phase grid and tags") {
  const std::vector<double> g = phase_grid(11);
  REQUIRE(g.size() == 11);
  CHECK(g[0] == 0.0);
  CHECK(g[10] == doctest::Approx(10.0 * std::numbers::pi / 11.0));
  CHECK(g.back() < std::numbers::pi);
  for (SampleTag t : {SampleTag::amplified, SampleTag::input, SampleTag::vacuum}) {
    CHECK(parse_sample_tag(to_string(t)) == t);
  }
  CHECK_THROWS(parse_sample_tag("bogus"));
}

TEST_CASE("gain_from_samples") {
  const std::vector<double> in{1.0, 1.2, 0.8, 1.0};
  const std::vector<double> out{2.0, 2.4, 1.6, 2.0};
  const GainEstimate ge = gain_from_samples(out, in);
  CHECK(ge.gain == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(ge.std_error > 0.0);
  const std::vector<double> centred{-1.0, 1.0, -1.0, 1.0};
  CHECK_THROWS_AS(gain_from_samples(out, centred), PreconditionError);
  const std::vector<double> empty;
  CHECK_THROWS_AS(gain_from_samples(out, empty), PreconditionError);

  SUBCASE("detection efficiency cancels in the ratio") {
    const FockCutoff cut(25);
    const double alpha = 0.3;
    const DensityMatrix input = DensityMatrix::from_pure(coherent_state(alpha, cut));
    const DensityMatrix amplified = DensityMatrix::from_pure(amplify_ideal(coherent_state(alpha, cut), 2.0).state.normalized());
    const std::vector<double> phases{0.0};
    for (double eta : {0.3, 0.6, 0.9}) {
      const auto x_in = sample_quadratures(input, phases, 100000, eta, 11, SampleTag::input).values_at(0);
      const auto x_out = sample_quadratures(amplified, phases, 100000, eta, 11).values_at(0);
      const GainEstimate est = gain_from_samples(x_out, x_in);
      CHECK(std::abs(est.gain - effective_gain_analytic(2.0, alpha)) < 3.0 * est.std_error);
    }
  }
}
