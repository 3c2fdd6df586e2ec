#include <doctest.h>

#include <Eigen/SVD>
#include <fstream>

#include "dualbli/log.hpp"
#include "dualbli/mapping.hpp"
#include "oracles.hpp"

using namespace dualbli;

TEST_CASE("apply") {
  Rng rng(1);
  SUBCASE("identity") {
    const Matrix x = oracle::gaussian(4, 3, rng);
    CHECK(apply(LinearMapping::identity(3), x) == x);
  }
  SUBCASE("quarter turn") {
    Matrix w(2, 2);
    w << 0, 1, -1, 0;
    Matrix x(1, 2);
    x << 1, 0;
    const Matrix y = apply(LinearMapping(w), x);
    CHECK(y(0, 0) == 0.0);
    CHECK(y(0, 1) == 1.0);
  }
  SUBCASE("matches naive product") {
    for (int t = 0; t < 20; ++t) {
      const Matrix x = oracle::gaussian(4, 3, rng);
      const Matrix w = oracle::gaussian(3, 3, rng);
      CHECK((apply(LinearMapping(w), x) - oracle::naive_product(x, w)).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
  SUBCASE("linear") {
    const Matrix w = oracle::gaussian(5, 5, rng);
    const Matrix u = oracle::gaussian(1, 5, rng), v = oracle::gaussian(1, 5, rng);
    const double a = 0.7, b = -2.3;
    const Matrix lhs = apply(LinearMapping(w), a * u + b * v);
    const Matrix rhs = a * apply(LinearMapping(w), u) + b * apply(LinearMapping(w), v);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10);
  }
  SUBCASE("shape mismatch") { CHECK_THROWS_AS(apply(LinearMapping::identity(3), Matrix::Ones(2, 4)), DataError); }
}

TEST_CASE("LinearMapping rejects non-square or non-finite weights") {
  CHECK_THROWS_AS(LinearMapping(Matrix::Ones(2, 3)), DataError);
  Matrix w = Matrix::Identity(2, 2);
  w(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(LinearMapping{w}, DataError);
}

TEST_CASE("orthogonalize_step") {
  Rng rng(2);
  SUBCASE("orthogonal matrices are fixed points") {
    const Matrix q = random_orthogonal(6, rng);
    CHECK((orthogonalize_step(LinearMapping(q), 0.01).weights() - q).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("scaled identity follows the scalar recurrence") {
    // W = cI stays diagonal: c <- (1 + b) c - b c^3, contracting by about 1 - 2b per step.
    LinearMapping m(1.1 * Matrix::Identity(3, 3));
    double c = 1.1;
    int steps = 0;
    while (std::sqrt(3.0) * std::abs(c * c - 1.0) >= 1e-6) {
      orthogonalize_in_place(m, 0.01);
      c = 1.01 * c - 0.01 * c * c * c;
      ++steps;
      if (steps == 200) CHECK(m.orthogonality_error() == doctest::Approx(std::sqrt(3.0) * std::abs(c * c - 1.0)));
    }
    CHECK(steps > 200);
    CHECK(m.orthogonality_error() < 1e-6);
  }
  SUBCASE("singular values approach one") {
    Matrix w = Matrix::Zero(2, 2);
    w(0, 0) = 2.0;
    w(1, 1) = 0.5;
    LinearMapping m(w);
    double prev_gap = 1.5;
    for (int i = 0; i < 2000; ++i) {
      orthogonalize_in_place(m, 0.01);
      if (i % 100 == 99) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(m.weights());
        const double gap = (svd.singularValues().array() - 1.0).abs().maxCoeff();
        CHECK(gap <= prev_gap);
        prev_gap = gap;
      }
    }
    CHECK(prev_gap < 1e-6);
  }
  SUBCASE("beta out of range") {
    CHECK_THROWS_AS(orthogonalize_step(LinearMapping::identity(2), 0.0), DataError);
    CHECK_THROWS_AS(orthogonalize_step(LinearMapping::identity(2), 0.5), DataError);
  }
}

TEST_CASE("random_orthogonal is orthogonal and seeded") {
  Rng a(3), b(3);
  const Matrix q = random_orthogonal(20, a);
  CHECK((q.transpose() * q - Matrix::Identity(20, 20)).norm() < 1e-10);
  CHECK(random_orthogonal(20, b) == q);
}

TEST_CASE("procrustes_solve") {
  Rng rng(4);
  SUBCASE("identity alignment") {
    const Matrix x = oracle::gaussian(30, 6, rng);
    CHECK((procrustes_solve(x, x).weights() - Matrix::Identity(6, 6)).norm() < 1e-8);
  }
  SUBCASE("exact recovery") {
    for (int t = 0; t < 10; ++t) {
      const Matrix q = random_orthogonal(8, rng);
      const Matrix x = oracle::gaussian(20, 8, rng);
      const LinearMapping w = procrustes_solve(x, x * q);
      CHECK((w.weights() - q).norm() < 1e-8);
      CHECK(w.orthogonality_error() < 1e-8);
    }
  }
  SUBCASE("beats unconstrained least squares under noise") {
    const Matrix q = random_orthogonal(10, rng);
    const Matrix x = oracle::gaussian(40, 10, rng);
    const Matrix y = x * q + oracle::gaussian(40, 10, rng, 0.01);
    const Matrix w_ls = x.colPivHouseholderQr().solve(y);
    const Matrix w = procrustes_solve(x, y).weights();
    CHECK((w - q).norm() < (w_ls - q).norm());
  }
  SUBCASE("equivariant under a rotation of the source") {
    const Matrix x = oracle::gaussian(25, 6, rng);
    const Matrix y = oracle::gaussian(25, 6, rng);
    const Matrix r = random_orthogonal(6, rng);
    const Matrix w = procrustes_solve(x, y).weights();
    const Matrix wr = procrustes_solve(x * r, y).weights();
    CHECK((wr - r.transpose() * w).norm() < 1e-8);
  }
  SUBCASE("output orthogonal for arbitrary input") {
    for (int t = 0; t < 10; ++t) {
      const Matrix x = oracle::gaussian(15, 7, rng, 3.0);
      const Matrix y = oracle::gaussian(15, 7, rng, 0.1);
      CHECK(procrustes_solve(x, y).orthogonality_error() < 1e-8);
    }
  }
  SUBCASE("rank deficient input warns but stays orthogonal") {
    ScopedWarningCapture cap;
    const Matrix x = oracle::gaussian(2, 5, rng);
    const LinearMapping w = procrustes_solve(x, x);
    CHECK(w.orthogonality_error() < 1e-8);
    CHECK_FALSE(cap.messages().empty());
  }
  SUBCASE("row count mismatch") {
    CHECK_THROWS_AS(procrustes_solve(Matrix::Ones(3, 2), Matrix::Ones(4, 2)), DataError);
  }
}

TEST_CASE("mapping checkpoint round trip") {
  Rng rng(5);
  const auto dir = oracle::scratch_dir("map_io");
  const LinearMapping m(random_orthogonal(7, rng));
  save_mapping(m, (dir / "F.map").string());
  const LinearMapping back = load_mapping((dir / "F.map").string());
  CHECK((back.weights() - m.weights()).cwiseAbs().maxCoeff() < 1e-8);
  std::ofstream(dir / "bad.map") << "2\n1 0\n0\n";
  CHECK_THROWS_AS(load_mapping((dir / "bad.map").string()), DataError);
}
