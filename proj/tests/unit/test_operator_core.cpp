#include <doctest.h>

#include <cmath>
#include <random>

#include "oracle.hpp"
#include "qbm/operator_core.hpp"

using namespace qbm;

namespace {

Eigen::MatrixXd random_symmetric(std::mt19937_64& rng, Eigen::Index d, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Eigen::MatrixXd a(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) a(i, j) = a(j, i) = u(rng);
  return a;
}

double projected_trace(const Eigen::MatrixXd& e, const Projector& proj) {
  double t = 0.0;
  for (Eigen::Index i = 0; i < e.rows(); ++i)
    if (proj.selects(static_cast<BasisIndex>(i))) t += e(i, i);
  return t;
}

double fd_gibbs_trace(const Eigen::MatrixXd& h, const Eigen::MatrixXd& e, const Projector& proj, double eps) {
  const double up = projected_trace(oracle::expm(-(h + eps * e)), proj);
  const double dn = projected_trace(oracle::expm(-(h - eps * e)), proj);
  return (up - dn) / (2 * eps);
}

}  // namespace

TEST_SUITE("operator_core") {
  TEST_CASE("pauli examples") {
    CHECK(pauli_operator(PauliKind::Z, 0, 1).matrix().isApprox(Eigen::Vector2d(1, -1).asDiagonal().toDenseMatrix()));
    Eigen::Vector4d z{1, 1, -1, -1};
    CHECK(pauli_operator(PauliKind::Z, 0, 2).matrix() == Eigen::MatrixXd(z.asDiagonal()));
    Eigen::Matrix4d x;
    x << 0, 1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0;
    CHECK(pauli_operator(PauliKind::X, 1, 2).matrix() == Eigen::MatrixXd(x));
  }

  TEST_CASE("pauli matches explicit Kronecker products") {
    for (int n = 1; n <= 5; ++n) {
      for (int a = 0; a < n; ++a) {
        CHECK(pauli_operator(PauliKind::X, a, n).matrix() == oracle::pauli('x', a, n));
        CHECK(pauli_operator(PauliKind::Z, a, n).matrix() == oracle::pauli('z', a, n));
      }
    }
  }

  TEST_CASE("pauli commutation relations") {
    const int n = 4;
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        const auto x = pauli_operator(PauliKind::X, a, n);
        const auto z = pauli_operator(PauliKind::Z, b, n);
        const Eigen::MatrixXd xz = x * z, zx = z * x;
        if (a == b) {
          CHECK((xz + zx).cwiseAbs().maxCoeff() <= 1e-12);
        } else {
          CHECK((xz - zx).cwiseAbs().maxCoeff() <= 1e-12);
        }
      }
    }
  }

  TEST_CASE("pauli errors") {
    CHECK_THROWS_AS(pauli_operator(PauliKind::Z, 2, 2), std::out_of_range);
    CHECK_THROWS_AS(pauli_operator(PauliKind::Z, -1, 2), std::out_of_range);
    CHECK_THROWS_AS(pauli_operator(PauliKind::X, 0, kDefaultMaxQubits + 1), SizeGuardError);
  }

  TEST_CASE("symmetric operator invariants") {
    Eigen::MatrixXd asym(2, 2);
    asym << 0, 1, 0.5, 0;
    CHECK_THROWS_AS(SymmetricOperator<double>{asym}, std::invalid_argument);
    CHECK_THROWS_AS(SymmetricOperator<double>(Eigen::MatrixXd::Identity(3, 3)), std::invalid_argument);
    CHECK_THROWS_AS(SymmetricOperator<double>(Eigen::MatrixXd::Zero(2, 4)), std::invalid_argument);
    CHECK(SymmetricOperator<double>::identity(3).trace() == 8.0);
  }

  TEST_CASE("spectral examples") {
    Eigen::MatrixXd d(2, 2);
    d << 3, 0, 0, 1;
    auto s = spectral_decompose<double>(d);
    CHECK(s.eigenvalues(0) == doctest::Approx(1));
    CHECK(s.eigenvalues(1) == doctest::Approx(3));
    s = spectral_decompose(pauli_operator(PauliKind::X, 0, 1));
    CHECK(s.eigenvalues(0) == doctest::Approx(-1));
    CHECK(s.eigenvalues(1) == doctest::Approx(1));
    const auto h = -3.0 * pauli_operator(PauliKind::X, 0, 1) - 4.0 * pauli_operator(PauliKind::Z, 0, 1);
    s = spectral_decompose(h);
    CHECK(s.eigenvalues(0) == doctest::Approx(-5).epsilon(1e-12));
    CHECK(s.eigenvalues(1) == doctest::Approx(5).epsilon(1e-12));
  }

  TEST_CASE("spectral reconstruction and orthonormality") {
    std::mt19937_64 rng(11);
    for (int n = 1; n <= 6; ++n) {
      const Eigen::MatrixXd a = random_symmetric(rng, Eigen::Index{1} << n, 3.0);
      const auto s = spectral_decompose<double>(a);
      CHECK((s.reconstruct() - a).norm() <= 1e-10 * a.norm());
      const Eigen::MatrixXd vtv = s.eigenvectors.transpose() * s.eigenvectors;
      CHECK((vtv - Eigen::MatrixXd::Identity(a.rows(), a.cols())).cwiseAbs().maxCoeff() <= 1e-10);
      for (Eigen::Index i = 1; i < s.eigenvalues.size(); ++i) CHECK(s.eigenvalues(i - 1) <= s.eigenvalues(i));
    }
  }

  TEST_CASE("spectral decomposition is deterministic") {
    std::mt19937_64 rng(5);
    const Eigen::MatrixXd a = random_symmetric(rng, 32, 2.0);
    const auto s1 = spectral_decompose<double>(a);
    const auto s2 = spectral_decompose<double>(a);
    CHECK(s1.eigenvalues == s2.eigenvalues);
    CHECK(s1.eigenvectors == s2.eigenvectors);
  }

  TEST_CASE("spectral decomposition in long double") {
    using LD = long double;
    DenseMatrix<LD> h(2, 2);
    h << -4, -3, -3, 4;
    const auto s = spectral_decompose<LD>(h);
    CHECK(static_cast<double>(s.eigenvalues(0)) == doctest::Approx(-5).epsilon(1e-15));
  }

  TEST_CASE("gibbs examples") {
    auto g = gibbs_operator(SymmetricOperator<double>::zero(1));
    CHECK(g.partition() == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(g.exp_neg_h().matrix().isApprox(Eigen::MatrixXd::Identity(2, 2)));

    g = gibbs_operator(-1.0 * pauli_operator(PauliKind::X, 0, 1));
    CHECK(g.partition() == doctest::Approx(2 * std::cosh(1.0)).epsilon(1e-13));
    CHECK(g.partition() == doctest::Approx(3.0862).epsilon(1e-4));

    g = gibbs_operator(-1.0 * pauli_operator(PauliKind::Z, 0, 1));
    const auto rho = g.density().matrix();
    CHECK(rho(0, 0) == doctest::Approx(std::exp(1.0) / (2 * std::cosh(1.0))).epsilon(1e-13));
    CHECK(rho(1, 1) == doctest::Approx(std::exp(-1.0) / (2 * std::cosh(1.0))).epsilon(1e-13));
    CHECK(rho(0, 1) == doctest::Approx(0.0));
  }

  TEST_CASE("gibbs operator matches the Pade exponential") {
    std::mt19937_64 rng(21);
    for (int t = 0; t < 20; ++t) {
      const Eigen::MatrixXd h = random_symmetric(rng, 8, 2.0);
      const auto g = gibbs_operator(SymmetricOperator<double>(h));
      const Eigen::MatrixXd e = oracle::expm(-h);
      CHECK((g.exp_neg_h().matrix() - e).norm() <= 1e-10 * e.norm());
      CHECK(g.log_partition == doctest::Approx(std::log(e.trace())).epsilon(1e-12));
    }
  }

  TEST_CASE("gibbs shift survives large energies") {
    const auto h = -800.0 * pauli_operator(PauliKind::Z, 0, 2) - 700.0 * pauli_operator(PauliKind::X, 1, 2);
    const auto g = gibbs_operator(h);
    CHECK(std::isfinite(g.log_partition));
    CHECK(g.log_partition == doctest::Approx(1500 + std::log1p(std::exp(-1400.0)) + std::log1p(std::exp(-1600.0))));
    CHECK(g.density().trace() == doctest::Approx(1.0).epsilon(1e-14));
  }

  TEST_CASE("density has unit trace on 1000 random Hamiltonians") {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> size(1, 5);
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
      const auto p = oracle::random_model(rng, size(rng), 0, 3.0, 3.0);
      const auto g = gibbs_operator(SymmetricOperator<double>(oracle::hamiltonian(p)));
      worst = std::max(worst, std::abs(g.density().trace() - 1.0));
    }
    CHECK(worst <= 1e-10);
  }

  TEST_CASE("projector examples and properties") {
    const auto p = visible_projector(std::vector<int>{0}, SpinVector{1}, 2);
    CHECK(p.diagonal() == Eigen::Vector4d(1, 1, 0, 0));
    const auto full = visible_projector(SpinVector{-1, 1, -1}, 3);
    CHECK(full.rank() == 1);
    CHECK(full.diagonal().sum() == 1.0);
    CHECK(full.diagonal()(0b101) == 1.0);
    const auto none = visible_projector(std::vector<int>{}, SpinVector{}, 3);
    CHECK(none.to_operator().matrix() == Eigen::MatrixXd::Identity(8, 8));

    const auto mid = visible_projector(std::vector<int>{1, 3}, SpinVector{-1, 1}, 4);
    const Eigen::MatrixXd m = mid.to_operator().matrix();
    CHECK(m * m == m);
    CHECK(m.trace() == 4.0);
    CHECK(m.isDiagonal());
    for (Eigen::Index i = 0; i < 16; ++i) {
      const bool expect = oracle::spin(i, 1, 4) == -1 && oracle::spin(i, 3, 4) == 1;
      CHECK(m(i, i) == (expect ? 1.0 : 0.0));
    }
  }

  TEST_CASE("projector errors") {
    CHECK_THROWS_AS(SpinVector({1, 0}), std::invalid_argument);
    CHECK_THROWS_AS(visible_projector(std::vector<int>{0, 0}, SpinVector{1, 1}, 2), std::invalid_argument);
    CHECK_THROWS_AS(visible_projector(std::vector<int>{2}, SpinVector{1}, 2), std::out_of_range);
    CHECK_THROWS(visible_projector(std::vector<int>{0}, SpinVector{1, 1}, 2));
  }

  TEST_CASE("frechet identity projector gives the trace identity") {
    std::mt19937_64 rng(7);
    for (int t = 0; t < 50; ++t) {
      const Eigen::MatrixXd h = random_symmetric(rng, 8, 2.0);
      const Eigen::MatrixXd e = random_symmetric(rng, 8, 1.0);
      const auto id = visible_projector(std::vector<int>{}, SpinVector{}, 3);
      const double got = frechet_gibbs_trace(SymmetricOperator<double>(h), SymmetricOperator<double>(e), id);
      const double want = -(e * oracle::expm(-h)).trace();
      CHECK(std::abs(got - want) <= 1e-10 * std::max(1.0, std::abs(want)));
    }
  }

  TEST_CASE("frechet of zero direction vanishes") {
    std::mt19937_64 rng(8);
    const Eigen::MatrixXd h = random_symmetric(rng, 8, 2.0);
    const auto proj = visible_projector(SpinVector{1}, 3);
    CHECK(frechet_gibbs_trace(SymmetricOperator<double>(h), SymmetricOperator<double>::zero(3), proj) == 0.0);
  }

  TEST_CASE("frechet matches finite differences") {
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<int> bit(0, 1);
    for (int t = 0; t < 30; ++t) {
      const auto p = oracle::random_model(rng, 3, 0, 1.5, 1.5);
      const Eigen::MatrixXd h = oracle::hamiltonian(p);
      const SpinVector v{bit(rng) ? 1 : -1, bit(rng) ? 1 : -1};
      const auto proj = visible_projector(v, 3);
      for (int a = 0; a < 3; ++a) {
        for (char kind : {'z', 'x'}) {
          const Eigen::MatrixXd e = oracle::pauli(kind, a, 3);
          const double got = frechet_gibbs_trace(SymmetricOperator<double>(h), SymmetricOperator<double>(e), proj);
          const double want = fd_gibbs_trace(h, e, proj, 1e-5);
          CHECK(std::abs(got - want) <= 1e-5 * std::max(std::abs(want), 1e-3));
        }
      }
    }
  }

  TEST_CASE("frechet with degenerate spectra") {
    std::mt19937_64 rng(10);
    for (int t = 0; t < 20; ++t) {
      // Random rotation of a spectrum with repeated eigenvalues.
      const Eigen::MatrixXd q = spectral_decompose<double>(random_symmetric(rng, 8, 1.0)).eigenvectors;
      Eigen::VectorXd lam(8);
      lam << -1, -1, -1, 0.5, 0.5, 2, 2, 2 + 1e-12;
      const Eigen::MatrixXd h = q * lam.asDiagonal() * q.transpose();
      const Eigen::MatrixXd sym = 0.5 * (h + h.transpose());
      const Eigen::MatrixXd e = random_symmetric(rng, 8, 1.0);
      const auto proj = visible_projector(std::vector<int>{1}, SpinVector{-1}, 3);
      const double got = frechet_gibbs_trace(SymmetricOperator<double>(sym), SymmetricOperator<double>(e), proj);
      const double want = fd_gibbs_trace(sym, e, proj, 1e-5);
      CHECK(std::abs(got - want) <= 1e-5 * std::max(std::abs(want), 1e-3));
    }
    // Classical Hamiltonian with equal fields: heavily degenerate diagonal.
    qbm::ModelParameters p = qbm::ModelParameters::fully_connected(3, 0);
    p.bias.setConstant(0.7);
    const Eigen::MatrixXd h = oracle::hamiltonian(p);
    const auto proj = visible_projector(SpinVector{1}, 3);
    for (int a = 0; a < 3; ++a) {
      const Eigen::MatrixXd e = oracle::pauli('x', a, 3);
      const double got = frechet_gibbs_trace(SymmetricOperator<double>(h), SymmetricOperator<double>(e), proj);
      const double want = fd_gibbs_trace(h, e, proj, 1e-5);
      CHECK(std::abs(got - want) <= 1e-8);
    }
  }

  TEST_CASE("loewner kernel limits") {
    const double w = std::exp(-0.3);
    CHECK(gibbs_divided_difference(0.3, 0.3, w, w) == -w);
    const double a = 0.3, b = 0.3 + 1e-6;
    const double dd = gibbs_divided_difference(a, b, std::exp(-a), std::exp(-b));
    CHECK(dd == doctest::Approx((std::exp(-a) - std::exp(-b)) / (a - b)).epsilon(1e-8));
    CHECK(gibbs_divided_difference(0.0, 800.0, 1.0, 0.0) == doctest::Approx(-1.0 / 800));
  }
}
