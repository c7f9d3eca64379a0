#include "ritzcg/steklov.hpp"

#include <cmath>
#include <limits>

#include "ritzcg/dense_eig.hpp"
#include "ritzcg/rng.hpp"
#include "ritzcg/tikhonov.hpp"

namespace ritzcg {

namespace {

// Q1 element stiffness for a rectangle hx x hy, 2x2 Gauss quadrature.
// Local node order: (0,0), (1,0), (1,1), (0,1) in reference coordinates.
Eigen::Matrix4d element_stiffness(double hx, double hy) {
  Eigen::Matrix4d ke = Eigen::Matrix4d::Zero();
  const double gp = 1.0 / std::sqrt(3.0);
  const double xi_node[4] = {-1.0, 1.0, 1.0, -1.0};
  const double eta_node[4] = {-1.0, -1.0, 1.0, 1.0};
  for (double xi : {-gp, gp}) {
    for (double eta : {-gp, gp}) {
      double dn_dxi[4], dn_deta[4];
      for (int i = 0; i < 4; ++i) {
        dn_dxi[i] = 0.25 * xi_node[i] * (1.0 + eta_node[i] * eta);
        dn_deta[i] = 0.25 * eta_node[i] * (1.0 + xi_node[i] * xi);
      }
      const double weight = (hx * hy) / 4.0;  // Jacobian determinant, unit weights
      for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
          double gx = (2.0 / hx) * dn_dxi[i] * (2.0 / hx) * dn_dxi[j];
          double gy = (2.0 / hy) * dn_deta[i] * (2.0 / hy) * dn_deta[j];
          ke(i, j) += weight * (gx + gy);
        }
      }
    }
  }
  return ke;
}

struct Partition {
  std::vector<Index> interior;  // 0 < ix < n, 0 < iy < n
  std::vector<Index> left;      // ix = 0, 0 < iy < n
  std::vector<Index> trace;     // ix = n, 0 < iy < n
};

Matrix slice(const Matrix& k, const std::vector<Index>& rows,
             const std::vector<Index>& cols) {
  Matrix out(rows.size(), cols.size());
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < cols.size(); ++j) out(i, j) = k(rows[i], cols[j]);
  return out;
}

// Schur complement of the stiffness onto the trace nodes. `inner` lists the
// eliminated unknowns; the y-Dirichlet rows are simply never referenced.
Matrix schur_on_trace(const Matrix& k, const std::vector<Index>& inner,
                      const std::vector<Index>& trace) {
  Matrix k_ii = slice(k, inner, inner);
  Matrix k_ig = slice(k, inner, trace);
  Matrix k_gg = slice(k, trace, trace);
  Eigen::LLT<Matrix> llt(k_ii);
  require(llt.info() == Eigen::Success, "schur_on_trace: interior block not SPD");
  return k_gg - k_ig.transpose() * llt.solve(k_ig);
}

}  // namespace

Vector add_noise(const Vector& v, double snr_db, std::uint64_t seed) {
  if (std::isinf(snr_db)) return v;
  require(v.norm() > 0.0, "add_noise: zero signal");
  const Index n = v.size();
  // ||v||^2 / E||eta||^2 = 10^(snr/10) with eta ~ N(0, sigma^2 I).
  double sigma = std::sqrt(v.squaredNorm() / (n * std::pow(10.0, snr_db / 10.0)));
  Rng rng(seed, 0x6e6f697365ULL);
  return v + sigma * rng.normal_vector(n);
}

Vector analytic_trace(const CauchyCase& c) {
  c.validate();
  const int n = c.n_el;
  Vector u(n - 1);
  const double k_pi_h = c.wavenumber * M_PI / c.height;
  for (int j = 1; j < n; ++j) {
    double y = c.height * j / n;
    u[j - 1] = std::sin(k_pi_h * y) * std::cosh(k_pi_h * c.thickness);
  }
  return u;
}

SteklovPair assemble_case(const CauchyCase& c) {
  c.validate();
  const int n = c.n_el;
  const Index n_nodes = static_cast<Index>(n + 1) * (n + 1);
  const double hx = c.thickness / n;
  const double hy = c.height / n;

  auto node = [n](int ix, int iy) -> Index {
    return static_cast<Index>(iy) * (n + 1) + ix;
  };

  Matrix k = Matrix::Zero(n_nodes, n_nodes);
  Eigen::Matrix4d ke = element_stiffness(hx, hy);
  for (int ex = 0; ex < n; ++ex) {
    for (int ey = 0; ey < n; ++ey) {
      Index dofs[4] = {node(ex, ey), node(ex + 1, ey), node(ex + 1, ey + 1),
                       node(ex, ey + 1)};
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) k(dofs[i], dofs[j]) += ke(i, j);
    }
  }

  Partition part;
  for (int iy = 1; iy < n; ++iy) {
    part.left.push_back(node(0, iy));
    part.trace.push_back(node(n, iy));
    for (int ix = 1; ix < n; ++ix) part.interior.push_back(node(ix, iy));
  }

  SteklovPair pair;
  pair.trace_y.resize(n - 1);
  for (int j = 1; j < n; ++j) pair.trace_y[j - 1] = c.height * j / n;

  // Dirichlet side: x = 0 fixed, only the strict interior is eliminated.
  pair.s_d = schur_on_trace(k, part.interior, part.trace);

  // Neumann side: x = 0 is free, eliminated together with the interior.
  std::vector<Index> inner_n = part.interior;
  inner_n.insert(inner_n.end(), part.left.begin(), part.left.end());
  pair.s_n = schur_on_trace(k, inner_n, part.trace);

  // Load from the (noisy) Dirichlet signal: b_D = K_GI K_II^-1 K_IL u_L.
  Vector u_l(n - 1);
  const double k_pi_h = c.wavenumber * M_PI / c.height;
  for (int j = 1; j < n; ++j) u_l[j - 1] = std::sin(k_pi_h * (c.height * j / n));
  u_l = add_noise(u_l, c.snr_db, c.seed);
  pair.u_l = u_l;

  Matrix k_ii = slice(k, part.interior, part.interior);
  Matrix k_il = slice(k, part.interior, part.left);
  Matrix k_gi = slice(k, part.trace, part.interior);
  require(slice(k, part.trace, part.left).cwiseAbs().maxCoeff() == 0.0,
          "assemble_case: trace and left boundary unexpectedly coupled");
  Eigen::LLT<Matrix> llt(k_ii);
  require(llt.info() == Eigen::Success, "assemble_case: interior block not SPD");
  pair.b_d = k_gi * llt.solve(k_il * u_l);
  return pair;
}

ComparisonResult run_comparison(const CauchyCase& c, const ComparisonConfig& cfg) {
  return run_comparison(assemble_case(c), cfg);
}

ComparisonResult run_comparison(const SteklovPair& pair, const ComparisonConfig& cfg) {
  ComparisonResult out;
  out.lambda = cfg.lambda;
  const Index n = pair.b_d.size();
  Matrix gap = pair.s_d - pair.s_n;

  switch (cfg.method) {
    case CompareMethod::Tsvd: {
      out.u_r = tsvd_solve(gap, pair.b_d, cfg.eps_sigma);
      return out;
    }
    case CompareMethod::DirectTikhonov: {
      Matrix reg = cfg.regularizer == RegKind::Identity
                       ? Matrix(Matrix::Identity(n, n))
                       : pair.s_d;
      Matrix shifted = gap + cfg.lambda * reg;
      out.u_r = Vector(shifted.ldlt().solve(pair.b_d));
      return out;
    }
    case CompareMethod::Cg:
      break;
  }

  // Regularizer is S_D throughout the CG paths (the KMF operator).
  LinearMap a = dense_map(gap);
  LinearMap m = dense_map(pair.s_d);
  LinearMap a_lambda = shifted_map(a, m, cfg.lambda);

  LinearMap m_inv;
  switch (cfg.prec) {
    case PrecKind::Identity:
      m_inv = identity_map(n);
      break;
    case PrecKind::Jacobi: {
      Vector diag = gap.diagonal() + cfg.lambda * pair.s_d.diagonal();
      m_inv = diagonal_map(Vector(diag.cwiseInverse()));
      break;
    }
    case PrecKind::SteklovD:
      m_inv = make_dense_inverse_map(pair.s_d);
      break;
  }

  SolveConfig solve_cfg;
  solve_cfg.eps = cfg.eps;
  solve_cfg.max_iter = cfg.max_iter;
  solve_cfg.criteria = cfg.criteria;
  solve_cfg.store_basis = cfg.want_ritz;

  std::vector<Vector> iterates;
  std::vector<Vector> residuals;
  auto observer = [&](int, const Vector& x, const Vector& r) {
    iterates.push_back(x);
    residuals.push_back(r);
  };

  SolveResult result = pcg_solve(a_lambda, m_inv, pair.b_d, Vector::Zero(n),
                                 solve_cfg, nullptr, observer);

  // Euclidean frame directly from the observed iterates.
  for (size_t i = 0; i < iterates.size(); ++i) {
    out.euclid.err_axis.push_back(residuals[i].squaredNorm());
    out.euclid.norm_axis.push_back(iterates[i].squaredNorm());
  }
  // Natural frame from the costless recurrences; the error axis carries the
  // unknown additive offset ||x_0 - x||_A^2.
  TraceNorms norms = trace_norms(result.trace);
  double offset = 0.0;
  out.natural.err_axis.push_back(0.0);
  out.natural.norm_axis.push_back(0.0);
  for (int i = 0; i < result.trace.m(); ++i) {
    offset -= norms.energy_decrement[i];
    out.natural.err_axis.push_back(offset);
    out.natural.norm_axis.push_back(norms.corr_mnorm_sq[i]);
  }

  if (cfg.want_ritz && result.trace.m() >= 1) {
    result.trace.r_a0 = pair.b_d;  // x0 = 0 and b_M = 0
    result.trace.r_m0 = Vector::Zero(n);
    result.trace.has_split = true;
    out.ritz = extract_ritz(result.trace, cfg.lambda);
  }
  out.u_r = result.x;
  out.trace = std::move(result.trace);
  return out;
}

}  // namespace ritzcg
