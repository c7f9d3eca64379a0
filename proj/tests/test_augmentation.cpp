#include <doctest.h>

#include <ritzcg/augmentation.hpp>
#include <ritzcg/dense_eig.hpp>
#include <ritzcg/tikhonov.hpp>

#include <cstdio>

#include "test_helpers.hpp"

using namespace ritzcg;
using namespace ritzcg::testing;

TEST_CASE("augmented_init: full-space augmentation solves at initialization") {
  Matrix a = random_spd(5, 1001);
  Rng rng(1002);
  Vector b = rng.normal_vector(5);
  Matrix c = Matrix::Identity(5, 5);
  AugmentationBasis basis =
      AugmentationBasis::build(dense_map(a), c, std::vector<BasisLabel>(5, BasisLabel::Ritz));
  auto [x0, r0] = augmented_init(Vector::Zero(5), b, basis, dense_map(a));
  CHECK(r0.norm() <= 1e-10 * b.norm());
  CHECK(rel_error(x0, Vector(a.llt().solve(b))) < 1e-10);
}

TEST_CASE("augmented_init: hand projection on diag(3,1)") {
  Matrix a = (Vector(2) << 3, 1).finished().asDiagonal();
  Matrix c(2, 1);
  c << 1, 0;  // first eigenvector
  AugmentationBasis basis =
      AugmentationBasis::build(dense_map(a), c, {BasisLabel::Ritz});
  auto [x0, r0] = augmented_init(Vector::Zero(2), (Vector(2) << 3, 1).finished(),
                                 basis, dense_map(a));
  CHECK(x0[0] == doctest::Approx(1.0));
  CHECK(x0[1] == doctest::Approx(0.0));
  CHECK(r0[0] == doctest::Approx(0.0));
  CHECK(r0[1] == doctest::Approx(1.0));
}

TEST_CASE("augmented_init: empty basis is a passthrough") {
  Matrix a = random_spd(4, 1003);
  Rng rng(1004);
  Vector b = rng.normal_vector(4);
  Vector x00 = rng.normal_vector(4);
  AugmentationBasis basis;
  auto [x0, r0] = augmented_init(x00, b, basis, dense_map(a));
  CHECK(rel_error(x0, x00) == doctest::Approx(0.0));
  CHECK(rel_error(r0, Vector(b - a * x00)) < 1e-14);
}

TEST_CASE("project: vectors in Range(C) vanish") {
  Matrix a = random_spd(6, 1011);
  Rng rng(1012);
  Matrix c(6, 2);
  c.col(0) = rng.normal_vector(6);
  c.col(1) = rng.normal_vector(6);
  AugmentationBasis basis =
      AugmentationBasis::build(dense_map(a), c, std::vector<BasisLabel>(2, BasisLabel::Ritz));
  Vector in_range = c * (Vector(2) << 1.5, -0.7).finished();
  CHECK(basis.apply(in_range).norm() <= 1e-10 * in_range.norm());
}

TEST_CASE("project: A-orthogonal vectors pass unchanged") {
  Matrix a = random_spd(6, 1021);
  Rng rng(1022);
  Matrix c(6, 2);
  c.col(0) = rng.normal_vector(6);
  c.col(1) = rng.normal_vector(6);
  AugmentationBasis basis =
      AugmentationBasis::build(dense_map(a), c, std::vector<BasisLabel>(2, BasisLabel::Ritz));
  Vector v = rng.normal_vector(6);
  Vector orth = basis.apply(v);  // P is idempotent, so P v is A-orthogonal to C
  CHECK(rel_error(basis.apply(orth), orth) < 1e-10);
}

TEST_CASE("project: C^T A P v vanishes for random v") {
  Matrix a = random_spd(8, 1031);
  Rng rng(1032);
  Matrix c(8, 3);
  for (Index j = 0; j < 3; ++j) c.col(j) = rng.normal_vector(8);
  AugmentationBasis basis =
      AugmentationBasis::build(dense_map(a), c, std::vector<BasisLabel>(3, BasisLabel::Ritz));
  for (int trial = 0; trial < 5; ++trial) {
    Vector v = rng.normal_vector(8);
    Vector residual = c.transpose() * (a * basis.apply(v));
    CHECK(residual.norm() <= 1e-10 * (a * v).norm());
  }
}

TEST_CASE("build: dependent columns are reported") {
  Matrix a = random_spd(5, 1041);
  Rng rng(1042);
  Matrix c(5, 3);
  c.col(0) = rng.normal_vector(5);
  c.col(1) = rng.normal_vector(5);
  c.col(2) = 2.0 * c.col(0) - c.col(1);  // dependent
  CHECK_THROWS_AS(AugmentationBasis::build(
                      dense_map(a), c, std::vector<BasisLabel>(3, BasisLabel::Ritz)),
                  Error);
  std::vector<int> dropped;
  AugmentationBasis basis = AugmentationBasis::build_dropping(
      dense_map(a), c, std::vector<BasisLabel>(3, BasisLabel::Ritz), &dropped);
  CHECK(basis.count() == 2);
  CHECK(dropped == std::vector<int>{2});
}

TEST_CASE("kernel_basis_check: constants against a Neumann-style operator pass") {
  // 1D Neumann Laplacian: constants span the kernel.
  const Index n = 12;
  Matrix lap = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    if (i > 0) {
      lap(i, i) += 1;
      lap(i, i - 1) -= 1;
    }
    if (i + 1 < n) {
      lap(i, i) += 1;
      lap(i, i + 1) -= 1;
    }
  }
  Matrix c0 = Matrix::Ones(n, 1) / std::sqrt(double(n));
  KernelCheckReport report = kernel_basis_check(c0, dense_map(lap));
  CHECK(report.pass());

  Rng rng(1051);
  Matrix random_col(n, 1);
  random_col.col(0) = rng.normal_vector(n);
  KernelCheckReport bad = kernel_basis_check(random_col, dense_map(lap));
  CHECK(!bad.pass());
}

TEST_CASE("pcg with projector keeps C^T r = 0 at every iteration") {
  const Index n = 20;
  Matrix a = random_spd(n, 1061);
  Rng rng(1062);
  Matrix c(n, 4);
  for (Index j = 0; j < 4; ++j) c.col(j) = rng.normal_vector(n);
  AugmentationBasis basis =
      AugmentationBasis::build(dense_map(a), c, std::vector<BasisLabel>(4, BasisLabel::Ritz));
  Vector b = rng.normal_vector(n);
  auto [x0, r0] = basis.init(Vector::Zero(n), b, dense_map(a));

  std::vector<double> drift;
  auto observer = [&](int, const Vector&, const Vector& r) {
    drift.push_back((c.transpose() * r).cwiseAbs().maxCoeff());
  };
  SolveConfig cfg;
  cfg.eps = 1e-10;
  cfg.max_iter = 50;
  SolveResult result =
      pcg_solve(dense_map(a), identity_map(n), b, x0, cfg, &basis, observer);
  CHECK(result.converged());
  for (double d : drift) CHECK(d <= 1e-8 * r0.norm() + 1e-12 * b.norm());
}

TEST_CASE("recycle: keep = 0 leaves the basis unchanged") {
  Matrix a = random_spd(6, 1071);
  Rng rng(1072);
  Matrix c(6, 1);
  c.col(0) = rng.normal_vector(6);
  AugmentationBasis basis =
      AugmentationBasis::build(dense_map(a), c, {BasisLabel::Kernel});
  RitzSet ritz;  // never touched at keep = 0
  AugmentationBasis same = recycle(basis, dense_map(a), ritz, Matrix(), 0);
  CHECK(same.count() == 1);
}

TEST_CASE("recycle: full-space Ritz recycling solves the next system at init") {
  // FIX-A sequence: same A, new right-hand side.
  Matrix a = (Vector(2) << 3, 1).finished().asDiagonal();
  SolveConfig cfg;
  cfg.eps = 1e-12;
  cfg.store_basis = true;
  SolveResult first = pcg_solve(dense_map(a), identity_map(2),
                                (Vector(2) << 3, 1).finished(), Vector::Zero(2), cfg);
  REQUIRE(first.trace.m() == 2);

  TridiagEig eig = tridiag_eig(build_tridiagonal(first.trace));
  RitzSet ritz = ritz_vectors(first.trace, eig);
  Matrix av = ritz_apply_a(first.trace, eig);
  AugmentationBasis basis = recycle(AugmentationBasis(), dense_map(a), ritz, av, 2);
  CHECK(basis.count() == 2);

  Vector b2 = (Vector(2) << -1, 4).finished();
  auto [x0, r0] = basis.init(Vector::Zero(2), b2, dense_map(a));
  SolveResult second = pcg_solve(dense_map(a), identity_map(2), b2, x0, cfg, &basis);
  CHECK(second.trace.m() == 0);
  CHECK(rel_error(second.x, Vector(a.llt().solve(b2))) < 1e-10);
}

TEST_CASE("recycle: ritz-labeled block keeps C^T A C close to identity") {
  const Index n = 30;
  Matrix a = random_spd(n, 1081, 0.01, 3.0);
  Rng rng(1082);
  Vector b = rng.normal_vector(n);
  SolveConfig cfg;
  cfg.eps = 1e-12;
  cfg.max_iter = 15;
  cfg.store_basis = true;
  cfg.reorthogonalize = true;
  SolveResult result = pcg_solve(dense_map(a), identity_map(n), b, Vector::Zero(n), cfg);
  TridiagEig eig = tridiag_eig(build_tridiagonal(result.trace));
  RitzSet ritz = ritz_vectors(result.trace, eig);
  Matrix av = ritz_apply_a(result.trace, eig);
  AugmentationBasis basis =
      recycle(AugmentationBasis(), dense_map(a), ritz, av, result.trace.m());
  Matrix gram = basis.c().transpose() * a * basis.c();
  CHECK((gram - Matrix::Identity(basis.count(), basis.count())).cwiseAbs().maxCoeff() <
        1e-6);
}

TEST_CASE("augmented solve error never exceeds the plain solve error") {
  const Index n = 24;
  Matrix a = random_spd(n, 1091, 0.01, 5.0);
  Rng rng(1092);
  Vector b = rng.normal_vector(n);
  Vector x_star = a.llt().solve(b);

  // Augment with a few exact-style directions from a previous solve.
  SolveConfig cfg;
  cfg.eps = 1e-12;
  cfg.max_iter = 8;
  cfg.store_basis = true;
  Vector b_prev = rng.normal_vector(n);
  SolveResult warmup =
      pcg_solve(dense_map(a), identity_map(n), b_prev, Vector::Zero(n), cfg);
  TridiagEig eig = tridiag_eig(build_tridiagonal(warmup.trace));
  RitzSet ritz = ritz_vectors(warmup.trace, eig);
  Matrix av = ritz_apply_a(warmup.trace, eig);
  AugmentationBasis basis =
      recycle(AugmentationBasis(), dense_map(a), ritz, av, warmup.trace.m());

  auto run = [&](const AugmentationBasis* proj) {
    std::vector<double> errors;
    Vector x0 = Vector::Zero(n);
    if (proj) x0 = proj->init(Vector::Zero(n), b, dense_map(a)).first;
    auto observer = [&](int, const Vector& x, const Vector&) {
      Vector err = x - x_star;
      errors.push_back(err.dot(a * err));
    };
    SolveConfig run_cfg;
    run_cfg.eps = 1e-10;
    run_cfg.max_iter = 40;
    pcg_solve(dense_map(a), identity_map(n), b, x0, run_cfg, proj, observer);
    return errors;
  };

  std::vector<double> plain = run(nullptr);
  std::vector<double> augmented = run(&basis);
  size_t common = std::min(plain.size(), augmented.size());
  for (size_t i = 0; i < common; ++i)
    CHECK(augmented[i] <= plain[i] * (1.0 + 1e-10) + 1e-14);
}

TEST_CASE("basis persistence round trip") {
  Matrix a = random_spd(7, 1101);
  Rng rng(1102);
  Matrix c(7, 2);
  c.col(0) = rng.normal_vector(7);
  c.col(1) = rng.normal_vector(7);
  AugmentationBasis basis = AugmentationBasis::build(
      dense_map(a), c, {BasisLabel::Kernel, BasisLabel::Ritz});

  std::string path = "/tmp/ritzcg_basis_test.bin";
  save_basis(path, basis);
  AugmentationBasis loaded = load_basis(path, dense_map(a));
  std::remove(path.c_str());

  CHECK(loaded.count() == 2);
  CHECK(rel_error(loaded.c(), basis.c()) == doctest::Approx(0.0));
  CHECK(rel_error(loaded.ac(), basis.ac()) < 1e-14);
  CHECK(loaded.labels()[0] == BasisLabel::Kernel);
  CHECK(loaded.labels()[1] == BasisLabel::Ritz);
}
