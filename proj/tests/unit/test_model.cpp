#include <doctest.h>

#include <cmath>
#include <random>

#include "oracle.hpp"
#include "qbm/gibbs_state.hpp"
#include "qbm/model.hpp"

using namespace qbm;

namespace {

double total_variation(const VisibleDistribution& a, const VisibleDistribution& b) {
  return 0.5 * (a.probabilities() - b.probabilities()).cwiseAbs().sum();
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("parameter layout and invariants") {
    auto p = ModelParameters::fully_connected(3, 1);
    CHECK(p.pair_count() == 6);
    CHECK(p.pair_index(0, 1) == 0);
    CHECK(p.pair_index(2, 3) == 5);
    CHECK(p.pair_index(3, 2) == 5);
    CHECK(p.pair_qubits(4) == std::pair{1, 3});
    p.set_coupling(3, 1, 0.25);
    CHECK(p.coupling_between(1, 3) == 0.25);
    CHECK_THROWS(p.pair_index(1, 1));

    auto r = ModelParameters::semi_restricted(2, 2);
    CHECK(r.restricted);
    CHECK_FALSE(r.coupling_mask[static_cast<std::size_t>(r.pair_index(2, 3))]);
    CHECK_THROWS_AS(r.set_coupling(2, 3, 1.0), std::invalid_argument);
    r.coupling(r.pair_index(2, 3)) = 1.0;
    CHECK_THROWS_AS(r.validate(), std::invalid_argument);

    auto g = ModelParameters::fully_connected(2);
    CHECK_THROWS_AS(g.set_gamma(-1.0), std::invalid_argument);
    g.shared_gamma = true;
    g.gamma << 1.0, 2.0;
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  }

  TEST_CASE("hamiltonian examples") {
    auto p = ModelParameters::fully_connected(1);
    p.bias(0) = 1;
    CHECK(build_hamiltonian(p).matrix() == Eigen::MatrixXd(Eigen::Vector2d(-1, 1).asDiagonal()));

    p.gamma(0) = 3;
    p.bias(0) = 4;
    const auto s = spectral_decompose(build_hamiltonian(p));
    CHECK(s.eigenvalues(0) == doctest::Approx(-5));
    CHECK(s.eigenvalues(1) == doctest::Approx(5));

    auto q = ModelParameters::fully_connected(2);
    q.coupling(0) = 1;
    CHECK(build_hamiltonian(q).matrix() == Eigen::MatrixXd(Eigen::Vector4d(-1, 1, 1, -1).asDiagonal()));
  }

  TEST_CASE("hamiltonian matches Kronecker assembly") {
    std::mt19937_64 rng(1);
    for (int t = 0; t < 50; ++t) {
      const auto p = oracle::random_model(rng, 1 + t % 4, t % 3, 2.0, 2.0, t % 2 == 0);
      CHECK((build_hamiltonian(p).matrix() - oracle::hamiltonian(p)).cwiseAbs().maxCoeff() <= 1e-13);
      Eigen::VectorXd e = classical_energies(p);
      for (Eigen::Index s = 0; s < e.size(); ++s) CHECK(e(s) == doctest::Approx(oracle::energy(p, s)));
    }
  }

  TEST_CASE("size guard") {
    const auto p = ModelParameters::fully_connected(kDefaultMaxQubits + 1);
    CHECK_THROWS_AS(build_hamiltonian(p), SizeGuardError);
    set_size_guard(3);
    CHECK_THROWS_AS(visible_marginals(ModelParameters::fully_connected(4)), SizeGuardError);
    set_size_guard(kDefaultMaxQubits);
    CHECK_NOTHROW(visible_marginals(ModelParameters::fully_connected(4)));
  }

  TEST_CASE("clamp visible examples") {
    auto p = ModelParameters::fully_connected(2, 0);
    p.bias << 0.3, -0.2;
    p.coupling(0) = 0.5;
    auto c = clamp_visible(p, SpinVector{1, -1});
    CHECK(c.hidden.qubits() == 0);
    CHECK(c.offset == doctest::Approx(oracle::energy(p, 0b01)));

    auto h = ModelParameters::fully_connected(2, 1);
    h.bias(2) = 0.5;
    h.set_coupling(0, 2, 1.0);
    h.set_coupling(1, 2, -1.0);
    c = clamp_visible(h, SpinVector{1, 1});
    REQUIRE(c.hidden.qubits() == 1);
    CHECK(c.hidden.bias(0) == doctest::Approx(0.5));

    auto r = ModelParameters::semi_restricted(2, 3);
    std::mt19937_64 rng(3);
    r = oracle::random_model(rng, 2, 3, 1.0, 1.0, true);
    c = clamp_visible(r, SpinVector{-1, 1});
    CHECK(c.hidden.coupling.cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(clamp_visible(r, SpinVector{1}), std::invalid_argument);
  }

  TEST_CASE("clamped partition reproduces the projected trace") {
    std::mt19937_64 rng(4);
    for (int t = 0; t < 30; ++t) {
      const auto p = oracle::random_model(rng, 2, 2, 1.5, 1.5);
      const Eigen::MatrixXd h = oracle::hamiltonian(p);
      for (long long v = 0; v < 4; ++v) {
        const auto sv = SpinVector::from_index(static_cast<BasisIndex>(v), 2);
        const auto c = clamp_visible(p, sv);
        // Tr e^{-H_v} with H_v the block of H on the clamped subspace.
        const Eigen::MatrixXd block = h.block(v * 4, v * 4, 4, 4);
        const double want = oracle::expm(-block).trace();
        const double got = std::exp(-c.offset) * oracle::expm(-oracle::hamiltonian(c.hidden)).trace();
        CHECK(got == doctest::Approx(want).epsilon(1e-11));
      }
    }
  }

  TEST_CASE("marginal examples") {
    auto p = ModelParameters::fully_connected(3, 1);
    const auto m = visible_marginals(p);
    for (Eigen::Index i = 0; i < m.size(); ++i) CHECK(m.probabilities()(i) == doctest::Approx(1.0 / 8));
    auto q = ModelParameters::fully_connected(1);
    q.gamma(0) = 1.0;
    CHECK(visible_marginals(q)[0] == doctest::Approx(0.5).epsilon(1e-14));
  }

  TEST_CASE("marginals match dense density diagonal") {
    std::mt19937_64 rng(12);
    for (int t = 0; t < 40; ++t) {
      const auto p = oracle::random_model(rng, 1 + t % 4, t % 3, 2.0, 2.0);
      const Eigen::VectorXd diag = oracle::density(p).diagonal();
      Eigen::VectorXd want = Eigen::VectorXd::Zero(Eigen::Index{1} << p.n_visible);
      for (Eigen::Index s = 0; s < diag.size(); ++s) want(s >> p.n_hidden) += diag(s);
      const auto got = visible_marginals(p);
      CHECK((got.probabilities() - want).cwiseAbs().maxCoeff() <= 1e-10);
      CHECK(got.probabilities().sum() == doctest::Approx(1.0).epsilon(1e-10));
    }
  }

  TEST_CASE("classical limit agrees with enumeration") {
    std::mt19937_64 rng(13);
    for (int t = 0; t < 40; ++t) {
      const auto p = oracle::random_model(rng, 1 + t % 4, t % 3, 2.0, 0.0);
      CHECK((visible_marginals(p).probabilities() - oracle::visible_marginal(p)).cwiseAbs().maxCoeff() <= 1e-10);
      const auto m = gibbs_moments(p);
      const Eigen::VectorXd full = oracle::boltzmann(p);
      for (int a = 0; a < p.qubits(); ++a) {
        double z = 0.0;
        for (Eigen::Index s = 0; s < full.size(); ++s) z += full(s) * oracle::spin(s, a, p.qubits());
        CHECK(m.z(a) == doctest::Approx(z).epsilon(1e-10));
        CHECK(m.x(a) == 0.0);
      }
      CHECK(energy_decomposition(p).quantum == 0.0);
    }
  }

  TEST_CASE("moment examples") {
    auto p = ModelParameters::fully_connected(1);
    p.gamma(0) = 3;
    p.bias(0) = 4;
    auto m = gibbs_moments(p);
    CHECK(m.z(0) == doctest::Approx(0.8 * std::tanh(5.0)).epsilon(1e-13));
    CHECK(m.z(0) == doctest::Approx(0.79993).epsilon(1e-5));
    CHECK(m.x(0) == doctest::Approx(0.6 * std::tanh(5.0)).epsilon(1e-13));

    std::mt19937_64 rng(14);
    auto q = oracle::random_model(rng, 3, 1, 1.0, 2.0);
    q.bias.setZero();
    q.coupling.setZero();
    m = gibbs_moments(q);
    CHECK(m.z.cwiseAbs().maxCoeff() <= 1e-12);
  }

  TEST_CASE("moments match dense traces") {
    std::mt19937_64 rng(15);
    for (int t = 0; t < 20; ++t) {
      const auto p = oracle::random_model(rng, 3, 1, 1.5, 1.5);
      const Eigen::MatrixXd rho = oracle::density(p);
      const auto m = gibbs_moments(p);
      const int n = p.qubits();
      int k = 0;
      for (int a = 0; a < n; ++a) {
        CHECK(m.z(a) == doctest::Approx((rho * oracle::pauli('z', a, n)).trace()).epsilon(1e-10));
        CHECK(m.x(a) == doctest::Approx((rho * oracle::pauli('x', a, n)).trace()).epsilon(1e-10));
        CHECK(std::abs(m.z(a)) <= 1.0);
      }
      for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
          const Eigen::MatrixXd zz = oracle::pauli('z', a, n) * oracle::pauli('z', b, n);
          CHECK(m.zz(k++) == doctest::Approx((rho * zz).trace()).epsilon(1e-10));
        }
    }
  }

  TEST_CASE("energy decomposition examples") {
    auto p = ModelParameters::fully_connected(1);
    p.gamma(0) = 1;
    const auto e = energy_decomposition(p);
    CHECK(e.quantum == doctest::Approx(-std::tanh(1.0)).epsilon(1e-13));
    CHECK(e.classical == doctest::Approx(0.0));
    const auto z = energy_decomposition(ModelParameters::fully_connected(3));
    CHECK(z.classical == 0.0);
    CHECK(z.quantum == 0.0);

    std::mt19937_64 rng(16);
    const auto q = oracle::random_model(rng, 3, 0, 1.0, 1.0);
    const auto d = energy_decomposition(q);
    const Eigen::MatrixXd rho = oracle::density(q);
    CHECK(d.classical + d.quantum == doctest::Approx((rho * oracle::hamiltonian(q)).trace()).epsilon(1e-10));
  }

  TEST_CASE("conditional distributions") {
    std::mt19937_64 rng(17);
    for (int t = 0; t < 20; ++t) {
      const auto p = oracle::random_model(rng, 3, 1, 1.5, 0.0);
      for (long long x = 0; x < 2; ++x) {
        const auto sx = SpinVector::from_index(static_cast<BasisIndex>(x), 1);
        const auto c = conditional_distribution(p, 1, sx);
        const auto cc = clamped_conditional_distribution(p, 1, sx);
        const Eigen::VectorXd want = oracle::classical_conditional(p, 1, x);
        CHECK((c.probabilities() - want).cwiseAbs().maxCoeff() <= 1e-10);
        CHECK((cc.probabilities() - want).cwiseAbs().maxCoeff() <= 1e-10);
        CHECK(c.probabilities().sum() == doctest::Approx(1.0).epsilon(1e-10));
      }
    }
  }

  TEST_CASE("quantum conditional from dense projections") {
    std::mt19937_64 rng(18);
    for (int t = 0; t < 10; ++t) {
      const auto p = oracle::random_model(rng, 3, 1, 1.5, 1.5);
      const Eigen::VectorXd diag = oracle::density(p).diagonal();
      for (long long x = 0; x < 2; ++x) {
        Eigen::VectorXd want = Eigen::VectorXd::Zero(4);
        for (Eigen::Index s = 0; s < diag.size(); ++s)
          if ((s >> 3) == x) want((s >> 1) & 3) += diag(s);
        want /= want.sum();
        const auto got = conditional_distribution(p, 1, SpinVector::from_index(static_cast<BasisIndex>(x), 1));
        CHECK((got.probabilities() - want).cwiseAbs().maxCoeff() <= 1e-10);
      }
    }
  }

  TEST_CASE("clamped conditional differs once the field is on") {
    auto p = ModelParameters::fully_connected(3);
    p.gamma.setConstant(1.0);
    p.bias << 0.3, -0.4, 0.2;
    p.coupling << 0.8, -0.6, 0.5;
    const SpinVector x{1};
    CHECK(total_variation(conditional_distribution(p, 1, x), clamped_conditional_distribution(p, 1, x)) > 1e-6);

    // No couplings across the partition: both coincide.
    p.coupling(0) = 0;
    p.coupling(1) = 0;
    for (int s : {1, -1}) {
      const SpinVector xs{s};
      CHECK(total_variation(conditional_distribution(p, 1, xs), clamped_conditional_distribution(p, 1, xs)) <=
            1e-12);
      CHECK((conditional_distribution(p, 1, xs).probabilities() -
             conditional_distribution(p, 1, SpinVector{1}).probabilities())
                .cwiseAbs()
                .maxCoeff() <= 1e-12);
    }
  }

  TEST_CASE("conditional with vanishing input probability") {
    auto p = ModelParameters::fully_connected(2);
    p.bias(0) = 400.0;
    CHECK_THROWS_AS(conditional_distribution(p, 1, SpinVector{-1}), NumericalError);
    CHECK_THROWS(conditional_distribution(p, 2, SpinVector{1, 1}));
    CHECK_THROWS(conditional_distribution(p, 1, SpinVector{1, 1}));
  }

  TEST_CASE("discriminative hamiltonian") {
    auto q = ModelParameters::fully_connected(1);
    q.bias(0) = 0.1;
    q.gamma(0) = 0.7;
    auto d = DiscriminativeParameters::create(q, 2);
    d.input_coupling << 0.5, -0.5;
    Eigen::Vector2d x(1, -1);
    auto h = discriminative_hamiltonian(d, x);
    CHECK(h.bias(0) == doctest::Approx(1.1));
    CHECK(h.gamma(0) == 0.7);
    CHECK(discriminative_hamiltonian(d, Eigen::Vector2d::Zero()).bias(0) == 0.1);
    d.input_coupling.setZero();
    CHECK(discriminative_hamiltonian(d, x).bias(0) == 0.1);
    CHECK_THROWS_AS(discriminative_hamiltonian(d, Eigen::Vector3d::Zero()), std::invalid_argument);
  }

  TEST_CASE("golden thompson per state") {
    std::mt19937_64 rng(19);
    for (int t = 0; t < 100; ++t) {
      const auto p = oracle::random_model(rng, 1 + t % 3, t % 3, 2.0, 2.0);
      const auto marg = visible_marginals(p);
      const GibbsState s(p);
      for (BasisIndex v = 0; v < static_cast<BasisIndex>(marg.size()); ++v) {
        const auto c = clamp_visible(p, SpinVector::from_index(v, p.n_visible));
        const double bound = std::exp(GibbsState(c.hidden).log_partition() - c.offset - s.log_partition());
        CHECK(marg[v] >= bound - 1e-12);
      }
    }
  }

  TEST_CASE("spin flip covariance") {
    std::mt19937_64 rng(20);
    for (int t = 0; t < 20; ++t) {
      auto p = oracle::random_model(rng, 3, 1, 1.5, 1.5);
      const auto m = visible_marginals(p);
      p.bias = -p.bias;
      const auto f = visible_marginals(p);
      const BasisIndex top = static_cast<BasisIndex>(m.size()) - 1;
      for (BasisIndex v = 0; v <= top; ++v) CHECK(f[top ^ v] == doctest::Approx(m[v]).epsilon(1e-12));
    }
  }

  TEST_CASE("gibbs state representations agree") {
    std::mt19937_64 rng(22);
    auto p = oracle::random_model(rng, 3, 1, 1.0, 0.0);
    const GibbsState classical(p);
    CHECK(classical.classical());
    p.gamma.setConstant(1e-300);
    const GibbsState quantum(p);
    CHECK_FALSE(quantum.classical());
    CHECK((classical.probabilities() - quantum.probabilities()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(classical.log_partition() == doctest::Approx(quantum.log_partition()).epsilon(1e-12));
  }
}
