#include <doctest.h>

#include <ritzcg/tikhonov.hpp>

#include "test_helpers.hpp"

using namespace ritzcg;
using namespace ritzcg::testing;

namespace {

TikhonovSystem dense_system(const Matrix& a, const Matrix& m, const Vector& b_a,
                            const Vector& b_m, double lambda) {
  return TikhonovSystem{dense_map(a), dense_map(m), make_dense_inverse_map(m),
                        b_a, b_m, lambda};
}

SolveConfig full_precision(int max_iter) {
  SolveConfig cfg;
  cfg.eps = 1e-14;
  cfg.max_iter = max_iter;
  cfg.reorthogonalize = true;
  return cfg;
}

}  // namespace

TEST_CASE("solve_regularized: lambda = 0 is the plain preconditioned solve") {
  const Index n = 10;
  Matrix a = random_spd(n, 1201);
  Matrix m = random_spd(n, 1202, 0.5, 2.0);
  Rng rng(1203);
  Vector b = rng.normal_vector(n);

  RegularizedSolve solve =
      solve_regularized(dense_system(a, m, b, Vector::Zero(n), 0.0), full_precision(100));
  CHECK(solve.result.converged());
  CHECK(rel_error(solve.result.x, Vector(a.llt().solve(b))) < 1e-8);
}

TEST_CASE("solve_regularized: diagonal fixture with hand solution") {
  // A = diag(3,1), M = diag(2,1), lambda = 0.5, b_A = (3,1):
  // (A + 0.5 M) = diag(4, 1.5), x = (3/4, 2/3).
  Matrix a = (Vector(2) << 3, 1).finished().asDiagonal();
  Matrix m = (Vector(2) << 2, 1).finished().asDiagonal();
  RegularizedSolve solve = solve_regularized(
      dense_system(a, m, (Vector(2) << 3, 1).finished(), Vector::Zero(2), 0.5),
      full_precision(10));
  CHECK(solve.result.x[0] == doctest::Approx(0.75));
  CHECK(solve.result.x[1] == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("solve_regularized: residual split is exact by construction") {
  const Index n = 12;
  Matrix a = random_spd(n, 1211);
  Matrix m = random_spd(n, 1212, 0.5, 2.0);
  Rng rng(1213);
  Vector b_a = rng.normal_vector(n);
  Vector b_m = rng.normal_vector(n);
  double lambda = 0.7;

  RegularizedSolve solve = solve_regularized(dense_system(a, m, b_a, b_m, lambda),
                                             full_precision(100), nullptr, true);
  const SolveTrace& trace = solve.result.trace;
  REQUIRE(trace.has_split);
  CHECK(rel_error(Vector(trace.r_a0 + lambda * trace.r_m0), trace.r0) < 1e-14);
}

TEST_CASE("solve_regularized: shift identity for the extracted Ritz set") {
  const Index n = 14;
  Matrix a = random_spd(n, 1221, 0.01, 4.0);
  Matrix m = random_spd(n, 1222, 0.5, 2.0);
  Rng rng(1223);
  Vector b_a = rng.normal_vector(n);
  Vector b_m = rng.normal_vector(n);
  double lambda_solve = 0.25;

  RegularizedSolve solve = solve_regularized(dense_system(a, m, b_a, b_m, lambda_solve),
                                             full_precision(static_cast<int>(n)),
                                             nullptr, true);
  REQUIRE(solve.ritz);
  const RitzSet& ritz = *solve.ritz;
  CHECK(ritz.lambda_solve == doctest::Approx(lambda_solve));

  Matrix vmv = ritz.vectors.transpose() * m * ritz.vectors;
  CHECK((vmv - Matrix::Identity(ritz.m, ritz.m)).cwiseAbs().maxCoeff() < 1e-6);
  for (double lambda : {0.0, 1e-3, 1.0}) {
    Matrix shifted = a + lambda * m;
    Matrix projected = ritz.vectors.transpose() * shifted * ritz.vectors;
    Matrix expected = (ritz.theta.array() + lambda).matrix().asDiagonal();
    CHECK(rel_error(projected, expected) < 1e-6);
  }
}

TEST_CASE("lambda_sweep: grid containing only the solve weight reproduces it") {
  const Index n = 10;
  Matrix a = random_spd(n, 1231);
  Matrix m = random_spd(n, 1232, 0.5, 2.0);
  Rng rng(1233);
  Vector b_a = rng.normal_vector(n);
  double lambda = 0.4;

  RegularizedSolve solve = solve_regularized(
      dense_system(a, m, b_a, Vector::Zero(n), lambda),
      full_precision(static_cast<int>(n)), nullptr, true);
  REQUIRE(solve.ritz);
  REQUIRE(solve.result.trace.m() == n);  // full dimension
  auto points = lambda_sweep(*solve.ritz, solve.result.trace.x0, {lambda});
  CHECK(rel_error(points[0].x, solve.result.x) < 1e-8);
}

TEST_CASE("lambda_sweep: diagonal full-rank fixture equals direct solves") {
  Matrix a = (Vector(3) << 3, 2, 1).finished().asDiagonal();
  Matrix m = (Vector(3) << 2, 1, 1).finished().asDiagonal();
  Vector b_a = (Vector(3) << 3, -1, 2).finished();
  Vector b_m = (Vector(3) << 1, 0.5, -0.5).finished();

  RegularizedSolve solve = solve_regularized(dense_system(a, m, b_a, b_m, 1.0),
                                             full_precision(3), nullptr, true);
  REQUIRE(solve.result.trace.m() == 3);
  auto points = lambda_sweep(*solve.ritz, solve.result.trace.x0, {0.0, 0.1, 1.0, 10.0});
  for (const SweepPoint& point : points) {
    Matrix shifted = a + point.lambda * m;
    Vector direct = shifted.ldlt().solve(b_a + point.lambda * b_m);
    CHECK(rel_error(point.x, direct) < 1e-8);
  }
}

TEST_CASE("lambda_sweep: random fixture equals direct solves") {
  const Index n = 12;
  Matrix a = random_spd(n, 1241, 0.01, 3.0);
  Matrix m = random_spd(n, 1242, 0.5, 2.0);
  Rng rng(1243);
  Vector b_a = rng.normal_vector(n);
  Vector b_m = rng.normal_vector(n);

  RegularizedSolve solve = solve_regularized(dense_system(a, m, b_a, b_m, 1.0),
                                             full_precision(static_cast<int>(n)),
                                             nullptr, true);
  REQUIRE(solve.result.trace.m() == n);
  auto points = lambda_sweep(*solve.ritz, solve.result.trace.x0, {0.0, 0.1, 1.0, 10.0});
  for (const SweepPoint& point : points) {
    Matrix shifted = a + point.lambda * m;
    Vector direct = shifted.ldlt().solve(b_a + point.lambda * b_m);
    CHECK(rel_error(point.x, direct) < 1e-8);
  }
}

TEST_CASE("lambda_sweep: b_M = M x0 makes the reconstruction depend on lambda only "
          "through denominators") {
  // With x0 = 0 this degenerates to b_M = 0, so r_m = 0 identically.
  const Index n = 8;
  Matrix a = random_spd(n, 1251);
  Matrix m = random_spd(n, 1252, 0.5, 2.0);
  Rng rng(1253);
  Vector b_a = rng.normal_vector(n);

  RegularizedSolve solve = solve_regularized(
      dense_system(a, m, b_a, Vector::Zero(n), 0.3),
      full_precision(static_cast<int>(n)), nullptr, true);
  REQUIRE(solve.ritz);
  CHECK(solve.ritz->r_m.cwiseAbs().maxCoeff() <= 1e-10 * solve.ritz->r_a.cwiseAbs().maxCoeff());
}

namespace {

/// Linear problem disguised as a nonlinear one: rhs(state) = (b_a - A state, b_m - M state).
/// One outer iteration from state 0 is then exactly the regularized solve.
class DisguisedLinearProblem : public NonlinearProblem {
 public:
  DisguisedLinearProblem(Matrix a, Matrix m, Vector b_a, Vector b_m)
      : a_mat_(std::move(a)), m_mat_(std::move(m)),
        a_(dense_map(a_mat_)), m_(dense_map(m_mat_)),
        m_inv_(make_dense_inverse_map(m_mat_)),
        b_a_(std::move(b_a)), b_m_(std::move(b_m)) {}

  const LinearMap& a() const override { return a_; }
  const LinearMap& m() const override { return m_; }
  const LinearMap& m_inv() const override { return m_inv_; }
  std::pair<Vector, Vector> rhs(const Vector& state) const override {
    return {b_a_ - a_mat_ * state, b_m_ - m_mat_ * state};
  }

 private:
  Matrix a_mat_, m_mat_;
  LinearMap a_, m_, m_inv_;
  Vector b_a_, b_m_;
};

}  // namespace

TEST_CASE("multi_lambda_outer: single-weight family reduces to the plain outer loop") {
  const Index n = 10;
  Matrix a = random_spd(n, 1261);
  Matrix m = random_spd(n, 1262, 0.5, 2.0);
  Rng rng(1263);
  Vector b_a = rng.normal_vector(n);
  Vector b_m = rng.normal_vector(n);
  DisguisedLinearProblem problem(a, m, b_a, b_m);

  LambdaFamily family;
  family.lambda0 = 0.8;
  MultiLambdaConfig outer;
  outer.outer_iterations = 1;
  outer.recycle_fraction = 0.0;
  MultiLambdaResult result = multi_lambda_outer(problem, family, Vector::Zero(n),
                                                full_precision(100), outer);
  REQUIRE(result.states.size() == 1);
  Matrix shifted = a + 0.8 * m;
  CHECK(rel_error(result.states[0], Vector(shifted.ldlt().solve(b_a + 0.8 * b_m))) < 1e-8);
}

TEST_CASE("multi_lambda_outer: one outer iteration matches lambda_sweep") {
  const Index n = 12;
  Matrix a = random_spd(n, 1271, 0.01, 3.0);
  Matrix m = random_spd(n, 1272, 0.5, 2.0);
  Rng rng(1273);
  Vector b_a = rng.normal_vector(n);
  Vector b_m = rng.normal_vector(n);
  DisguisedLinearProblem problem(a, m, b_a, b_m);

  LambdaFamily family;
  family.lambda0 = 1.0;
  family.postprocess = {0.1, 0.01};
  MultiLambdaConfig outer;
  outer.outer_iterations = 1;
  outer.truncate_at_corner = false;  // full reconstruction for the equivalence oracle
  outer.recycle_fraction = 0.0;

  MultiLambdaResult result = multi_lambda_outer(problem, family, Vector::Zero(n),
                                                full_precision(static_cast<int>(n)),
                                                outer);
  REQUIRE(result.states.size() == 3);

  RegularizedSolve solve = solve_regularized(dense_system(a, m, b_a, b_m, 1.0),
                                             full_precision(static_cast<int>(n)),
                                             nullptr, true);
  auto sweep = lambda_sweep(*solve.ritz, solve.result.trace.x0, {0.1, 0.01});
  CHECK(rel_error(result.states[1], sweep[0].x) < 1e-10);
  CHECK(rel_error(result.states[2], sweep[1].x) < 1e-10);
}

TEST_CASE("multi_lambda_outer: corner truncation is the default reconstruction") {
  const Index n = 10;
  Matrix a = random_spd(n, 1281, 0.01, 3.0);
  Matrix m = random_spd(n, 1282, 0.5, 2.0);
  Rng rng(1283);
  Vector b_a = rng.normal_vector(n);
  DisguisedLinearProblem problem(a, m, b_a, Vector::Zero(n));

  LambdaFamily family;
  family.lambda0 = 0.5;
  family.postprocess = {0.05};
  MultiLambdaConfig outer;
  outer.outer_iterations = 1;
  outer.recycle_fraction = 0.0;
  MultiLambdaResult result = multi_lambda_outer(problem, family, Vector::Zero(n),
                                                full_precision(static_cast<int>(n)),
                                                outer);

  RegularizedSolve solve = solve_regularized(
      dense_system(a, m, b_a, Vector::Zero(n), 0.5),
      full_precision(static_cast<int>(n)), nullptr, true);
  int corner = corner_index(*solve.ritz);
  Vector expected =
      filtered_solution(*solve.ritz, Vector::Zero(n), 0.05, corner);
  CHECK(rel_error(result.states[1], expected) < 1e-10);
}
