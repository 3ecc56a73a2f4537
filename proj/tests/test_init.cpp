#include "doctest.h"
#include "pnmf/pnmf.hpp"
#include "test_util.hpp"

#include <cmath>
#include <limits>
#include <vector>

using namespace pnmf;

namespace {

SpectralCube cube_from(const Matrix& data, int rows, int cols) {
  SpectralCube cube;
  cube.rows = rows;
  cube.cols = cols;
  cube.data = data;
  cube.allow_negative = true;
  return cube;
}

// Least-squares on a fixed passive set; entries off the set are pinned to 0.
// Returns an empty vector when the restricted solution leaves the feasible set.
Vector restricted_ls(const Matrix& m, const Vector& b, const std::vector<int>& support) {
  Vector x = Vector::Zero(m.cols());
  if (support.empty()) return x;
  Matrix ms(m.rows(), static_cast<Eigen::Index>(support.size()));
  for (std::size_t k = 0; k < support.size(); ++k) ms.col(static_cast<Eigen::Index>(k)) = m.col(support[k]);
  const Vector xs = ms.colPivHouseholderQr().solve(b);
  if ((xs.array() < 0.0).any()) return Vector();
  for (std::size_t k = 0; k < support.size(); ++k) x(support[k]) = xs(static_cast<Eigen::Index>(k));
  return x;
}

}  // namespace

TEST_SUITE("init") {

TEST_CASE("nnls equals least squares when the unconstrained optimum is feasible") {
  Rng rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix m = testutil::random_matrix(8, 3, rng, 0.1, 1.0);
    Vector x_true(3);
    for (int i = 0; i < 3; ++i) x_true(i) = 0.2 + rng.uniform();
    const Vector b = m * x_true;
    const Vector x = nnls(m, b);
    CHECK((x - x_true).lpNorm<Eigen::Infinity>() < 1e-10);
  }
}

TEST_CASE("nnls clips a negative unconstrained optimum") {
  // min ||x - b||^2 over x >= 0 decouples per coordinate: x = max(b, 0).
  const Matrix m = Matrix::Identity(3, 3);
  Vector b(3);
  b << 1.0, -2.0, 3.0;
  const Vector x = nnls(m, b);
  CHECK(x(0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(x(1) == 0.0);  // inactive coordinates come back as exact zeros
  CHECK(x(2) == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("nnls satisfies the KKT conditions on random problems") {
  Rng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix m = testutil::random_matrix(8, 4, rng, -1.0, 1.0);
    Vector b(8);
    for (int i = 0; i < 8; ++i) b(i) = 2.0 * rng.uniform() - 1.0;
    const Vector x = nnls(m, b);
    REQUIRE(x.size() == 4);
    const Vector w = m.transpose() * (b - m * x);  // gradient of -0.5*residual^2
    for (int i = 0; i < 4; ++i) {
      CHECK(x(i) >= 0.0);
      CHECK(w(i) <= 1e-8);                      // no ascent direction remains
      if (x(i) > 0.0) CHECK(std::abs(w(i)) < 1e-8);  // stationarity on the support
    }
  }
}

TEST_CASE("nnls matches exhaustive active-set search") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix m = testutil::random_matrix(6, 3, rng, -1.0, 1.0);
    Vector b(6);
    for (int i = 0; i < 6; ++i) b(i) = 2.0 * rng.uniform() - 1.0;

    double best = b.squaredNorm();  // empty support
    for (int mask = 1; mask < 8; ++mask) {
      std::vector<int> support;
      for (int i = 0; i < 3; ++i)
        if (mask & (1 << i)) support.push_back(i);
      const Vector x = restricted_ls(m, b, support);
      if (x.size() == 0) continue;
      best = std::min(best, (m * x - b).squaredNorm());
    }
    const Vector x = nnls(m, b);
    CHECK((m * x - b).squaredNorm() <= best + 1e-10);
  }
}

TEST_CASE("nnls input validation") {
  const Matrix m = Matrix::Identity(3, 3);
  Vector b(2);
  b << 1.0, 2.0;
  CHECK_THROWS_AS(nnls(m, b), std::invalid_argument);
  Vector nan3 = Vector::Zero(3);
  nan3(1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(nnls(m, nan3), std::invalid_argument);
}

TEST_CASE("fcls recovers a hand-worked pixel") {
  // E = I2 and r already on the simplex: the augmented residual vanishes at
  // a = (0.3, 0.7), so any positive delta returns it exactly.
  EndmemberMatrix e;
  e.data = Matrix::Identity(2, 2);
  Matrix r(2, 1);
  r << 0.3, 0.7;
  const AbundanceMatrix a = fcls(cube_from(r, 1, 1), e, 10.0);
  CHECK(a.data(0, 0) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(a.data(1, 0) == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("fcls is exact on noiseless mixtures") {
  Rng rng(13);
  const EndmemberMatrix e = toy_endmembers(40, 3);
  AbundanceMatrix a_true;
  a_true.data = testutil::random_simplex(3, 25, rng);
  a_true.data.col(4) << 1.0, 0.0, 0.0;  // a pure pixel must come back as a unit vector
  const SpectralCube r = mix(e, a_true, 5, 5);
  const AbundanceMatrix a = fcls(r, e, 10.0);
  CHECK((a.data - a_true.data).lpNorm<Eigen::Infinity>() < 1e-6);
  CHECK(a.data(0, 4) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("larger delta tightens the sum-to-one constraint") {
  Rng rng(29);
  const EndmemberMatrix e = toy_endmembers(40, 3);
  AbundanceMatrix a_true;
  a_true.data = testutil::random_simplex(3, 64, rng);
  const SpectralCube clean = mix(e, a_true, 8, 8);
  const SpectralCube noisy = add_noise(clean, 20.0, 3);

  auto max_sum_dev = [&](double delta) {
    const AbundanceMatrix a = fcls(noisy, e, delta);
    double dev = 0.0;
    for (int j = 0; j < a.pixels(); ++j) dev = std::max(dev, std::abs(a.data.col(j).sum() - 1.0));
    return dev;
  };
  const double dev10 = max_sum_dev(10.0);
  const double dev100 = max_sum_dev(100.0);
  CHECK(dev10 < 0.2);
  CHECK(dev100 < dev10);
}

TEST_CASE("fcls beats every simplex grid point on the augmented objective") {
  Rng rng(31);
  const EndmemberMatrix e = toy_endmembers(30, 3);
  const double delta = 10.0;
  Vector r(30);
  for (int i = 0; i < 30; ++i) r(i) = rng.uniform();

  auto augmented = [&](const Vector& a) {
    return (e.data * a - r).squaredNorm() + delta * delta * std::pow(a.sum() - 1.0, 2);
  };

  double grid_best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 20; ++i)
    for (int j = 0; i + j <= 20; ++j) {
      Vector a(3);
      a << 0.05 * i, 0.05 * j, 1.0 - 0.05 * (i + j);
      grid_best = std::min(grid_best, augmented(a));
    }

  const AbundanceMatrix a = fcls(cube_from(r, 1, 1), e, delta);
  CHECK(augmented(a.data.col(0)) <= grid_best + 1e-12);
}

TEST_CASE("fcls input validation") {
  const EndmemberMatrix e = toy_endmembers(40, 3);
  Rng rng(1);
  Matrix r = testutil::random_matrix(40, 4, rng);
  CHECK_THROWS_AS(fcls(cube_from(r, 2, 2), e, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(fcls(cube_from(r, 2, 2), e, -1.0), std::invalid_argument);
  Matrix bad_bands = testutil::random_matrix(39, 4, rng);
  CHECK_THROWS_AS(fcls(cube_from(bad_bands, 2, 2), e, 10.0), std::invalid_argument);
  r(3, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(fcls(cube_from(r, 2, 2), e, 10.0), std::invalid_argument);
}

TEST_CASE("vca recovers planted pure pixels exactly") {
  Rng rng(17);
  const EndmemberMatrix e_true = toy_endmembers(60, 3);
  Matrix a = testutil::random_simplex(3, 50, rng);
  a.col(7) << 1.0, 0.0, 0.0;
  a.col(19) << 0.0, 1.0, 0.0;
  a.col(33) << 0.0, 0.0, 1.0;
  AbundanceMatrix am;
  am.data = a;
  const SpectralCube r = mix(e_true, am, 5, 10);

  const VcaResult res = vca(r, 3, 123);
  CHECK(res.used_projective);
  // noiseless data sits in the p-dim subspace; only rounding keeps it finite
  CHECK(res.snr_estimate_db > 50.0);
  REQUIRE(res.endmembers.count() == 3);
  CHECK(mean_sad(res.endmembers, e_true) < 1e-6);

  SUBCASE("same seed reproduces the result") {
    const VcaResult again = vca(r, 3, 123);
    CHECK(again.endmembers.data == res.endmembers.data);
    CHECK(again.indices == res.indices);
  }
}

TEST_CASE("vca p=1 picks the strongest pixel of a rank-one cube") {
  // r_j = c_j * s: the principal direction is s, so the winner is max |c_j|.
  Vector s(12);
  Rng rng(4);
  for (int i = 0; i < 12; ++i) s(i) = 0.2 + rng.uniform();
  Matrix r(12, 6);
  const double amps[6] = {0.3, 0.9, 0.5, 1.7, 0.2, 1.1};
  for (int j = 0; j < 6; ++j) r.col(j) = amps[j] * s;

  const VcaResult res = vca(cube_from(r, 2, 3), 1, 0);
  CHECK(res.indices == std::vector<int>{3});
  CHECK((res.endmembers.data.col(0) - r.col(3)).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("vca falls back to the PCA branch on heavy noise") {
  Rng rng(23);
  const EndmemberMatrix e_true = toy_endmembers(50, 4);
  AbundanceMatrix a;
  a.data = testutil::random_simplex(4, 256, rng);
  const SpectralCube noisy = add_noise(mix(e_true, a, 16, 16), 0.0, 8);

  const VcaResult res = vca(noisy, 4, 9);
  CHECK_FALSE(res.used_projective);
  CHECK(res.snr_estimate_db < 15.0 + 10.0 * std::log10(4.0));
  CHECK_NOTHROW(res.endmembers.validate());
  CHECK((res.endmembers.data.array() >= 0.0).all());
}

TEST_CASE("vca input validation") {
  Rng rng(2);
  const Matrix r = testutil::random_matrix(6, 8, rng);
  const SpectralCube cube = cube_from(r, 2, 4);
  CHECK_THROWS_AS(vca(cube, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(vca(cube, 7, 1), std::invalid_argument);   // p > bands
  Matrix wide = testutil::random_matrix(12, 3, rng);
  CHECK_THROWS_AS(vca(cube_from(wide, 1, 3), 4, 1), std::invalid_argument);  // p > pixels
  Matrix nanr = r;
  nanr(1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(vca(cube_from(nanr, 2, 4), 2, 1), std::invalid_argument);
}

}  // TEST_SUITE
