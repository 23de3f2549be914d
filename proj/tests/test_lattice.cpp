#include <doctest.h>

#include <cmath>
#include <random>

#include "blochwave/lattice.hpp"

using namespace blochwave;

namespace {

Lattice unit_1d() {
  Eigen::MatrixXd b(1, 1);
  b << 1.0;
  return Lattice::from_basis(b);
}

Lattice square_2d() {
  Eigen::MatrixXd b(2, 2);
  b << 1.0, 0.0, 0.0, 1.0;
  return Lattice::from_basis(b);
}

}  // namespace

TEST_SUITE("lattice") {

TEST_CASE("dual basis of the 1d unit lattice is 2pi") {
  const auto lat = unit_1d();
  CHECK(lat.dual_basis()(0, 0) == doctest::Approx(2.0 * M_PI).epsilon(1e-15));
  CHECK(lat.cell_volume() == doctest::Approx(1.0));
}

TEST_CASE("dual basis of the square lattice") {
  const auto lat = square_2d();
  CHECK(lat.dual_basis()(0, 0) == doctest::Approx(2.0 * M_PI));
  CHECK(lat.dual_basis()(0, 1) == doctest::Approx(0.0));
  CHECK(lat.dual_basis()(1, 1) == doctest::Approx(2.0 * M_PI));
}

TEST_CASE("hexagonal dual basis against a brute-force linear solve") {
  Eigen::MatrixXd b(2, 2);
  b << 1.0, 0.0, 0.5, std::sqrt(3.0) / 2.0;

  // Independent oracle: solve zeta*_i . zeta_j = 2 pi delta_ij directly,
  // i.e. Dual * B^T = 2 pi I.
  const Eigen::MatrixXd rhs = 2.0 * M_PI * Eigen::MatrixXd::Identity(2, 2);
  const Eigen::MatrixXd oracle = b.transpose().fullPivLu().solve(rhs);

  const auto dual = dual_basis(b);
  CHECK((dual - oracle).cwiseAbs().maxCoeff() < 1e-12);

  // Expected values from the 2x2 system worked by hand.
  CHECK(dual(0, 0) == doctest::Approx(2.0 * M_PI).epsilon(1e-14));
  CHECK(dual(0, 1) == doctest::Approx(-2.0 * M_PI / std::sqrt(3.0)).epsilon(1e-14));
  CHECK(dual(1, 0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(dual(1, 1) == doctest::Approx(4.0 * M_PI / std::sqrt(3.0)).epsilon(1e-14));
}

TEST_CASE("duality relation holds to 1e-14 for random bases") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::MatrixXd b(2, 2);
    do {
      b << 1.0 + u(rng), u(rng), u(rng), 1.0 + u(rng);
    } while (std::abs(b.determinant()) < 0.1);
    const auto lat = Lattice::from_basis(b);
    const Eigen::MatrixXd prod = lat.dual_basis() * b.transpose();
    CHECK((prod - 2.0 * M_PI * Eigen::MatrixXd::Identity(2, 2))
              .cwiseAbs()
              .maxCoeff() < 1e-13 * prod.cwiseAbs().maxCoeff());
    CHECK(lat.cell_volume() == doctest::Approx(std::abs(b.determinant())));
  }
}

TEST_CASE("singular basis is rejected") {
  Eigen::MatrixXd b(2, 2);
  b << 1.0, 2.0, 0.5, 1.0;
  CHECK_THROWS_AS(Lattice::from_basis(b), SingularBasis);
}

TEST_CASE("wrap_to_bz: 1d examples") {
  const auto lat = unit_1d();
  Eigen::VectorXd k(1);

  // 3 pi wraps to -pi (the tie at +1/2 maps to -1/2), shift = 1 x 2pi... in
  // units of zeta* = 2pi the shift count is 2.
  k << 3.0 * M_PI;
  auto r = wrap_to_bz(k, lat);
  CHECK(r.point.k[0] == doctest::Approx(-M_PI).epsilon(1e-14));
  CHECK(r.shift[0] == 2);
  CHECK(r.point.frac[0] == doctest::Approx(-0.5));

  k << 0.3;
  r = wrap_to_bz(k, lat);
  CHECK(r.point.k[0] == doctest::Approx(0.3));
  CHECK(r.shift[0] == 0);
}

TEST_CASE("wrap_to_bz: 2d square example") {
  const auto lat = square_2d();
  Eigen::VectorXd k(2);
  k << 2.0 * M_PI + 0.1, -0.2;
  const auto r = wrap_to_bz(k, lat);
  CHECK(r.point.k[0] == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(r.point.k[1] == doctest::Approx(-0.2));
  CHECK(r.shift[0] == 1);
  CHECK(r.shift[1] == 0);
}

TEST_CASE("wrap is a projection and reconstructs the input") {
  const auto lat = square_2d();
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> u(-30.0, 30.0);
  for (int trial = 0; trial < 1000; ++trial) {
    Eigen::VectorXd k(2);
    k << u(rng), u(rng);
    const auto r = wrap_to_bz(k, lat);
    const auto r2 = wrap_to_bz(r.point.k, lat);
    CHECK((r2.point.k - r.point.k).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(r2.shift.cwiseAbs().maxCoeff() == 0);

    Eigen::VectorXd recon = r.point.k;
    for (int i = 0; i < 2; ++i) {
      recon += r.shift[i] * lat.dual_basis().row(i).transpose();
    }
    CHECK((recon - k).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(r.point.frac.cwiseAbs().maxCoeff() <= 0.5);
    CHECK(r.point.frac.minCoeff() >= -0.5);
    CHECK(r.point.frac.maxCoeff() < 0.5);
  }
}

TEST_CASE("cell_grid: 1d points and weights") {
  const auto lat = unit_1d();
  const auto grid = cell_grid(lat, 4);
  REQUIRE(grid.points.rows() == 4);
  CHECK(grid.points(0, 0) == doctest::Approx(-0.5));
  CHECK(grid.points(1, 0) == doctest::Approx(-0.25));
  CHECK(grid.points(2, 0) == doctest::Approx(0.0));
  CHECK(grid.points(3, 0) == doctest::Approx(0.25));
  CHECK(grid.weight == doctest::Approx(0.25));
}

TEST_CASE("cell_grid: weights sum to |Y|") {
  const auto lat = unit_1d();
  const auto grid = cell_grid(lat, 64);
  CHECK(grid.weight * grid.points.rows() == doctest::Approx(lat.cell_volume()));

  const auto sq = cell_grid(square_2d(), 2);
  REQUIRE(sq.points.rows() == 4);
  CHECK(sq.weight == doctest::Approx(0.25));
}

TEST_CASE("quadrature integrates dual plane waves exactly") {
  const auto lat = square_2d();
  const int n = 8;
  const auto grid = cell_grid(lat, n);
  for (int m0 = -n / 2 + 1; m0 < n / 2; ++m0) {
    for (int m1 = -n / 2 + 1; m1 < n / 2; ++m1) {
      const Eigen::VectorXd g = lat.dual_vector({m0, m1});
      std::complex<double> sum(0.0, 0.0);
      for (long p = 0; p < grid.points.rows(); ++p) {
        const double phase = g.dot(grid.points.row(p));
        sum += std::complex<double>(std::cos(phase), std::sin(phase));
      }
      sum *= grid.weight;
      if (m0 == 0 && m1 == 0) {
        CHECK(std::abs(sum - lat.cell_volume()) < 1e-12);
      } else {
        CHECK(std::abs(sum) < 1e-12);
      }
    }
  }
}

}  // TEST_SUITE
