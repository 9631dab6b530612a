#include "ipds/problems.hpp"

#include <atomic>
#include <cassert>
#include <cmath>
#include <iostream>
#include <memory>
#include <random>

namespace ipds {

namespace {

Mat randn_matrix(int m, int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat a(m, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < m; ++i) a(i, j) = normal(rng);
  return a;
}

double largest_singular_value(const Mat& a) {
  BlockOperator op;
  op.blocks.push_back(LinearMap(a));
  op.output_dim = static_cast<int>(a.rows());
  return estimate_spectral(op).op_norms[0];
}

}  // namespace

Mat synth_data(const std::string& kind, int m, int d, std::uint64_t seed) {
  if (kind != "randn") throw std::invalid_argument("synth_data: unknown kind '" + kind + "'");
  if (m < 1 || d < 1) throw std::invalid_argument("synth_data: need m, d >= 1");
  Mat a = randn_matrix(m, d, seed);
  // Center each column, then unit-normalize (normalizing first would be undone).
  for (int j = 0; j < d; ++j) {
    a.col(j).array() -= a.col(j).mean();
    assert(std::abs(a.col(j).mean()) <= 1e-12 * (1.0 + a.col(j).cwiseAbs().maxCoeff()));
    const double nrm = a.col(j).norm();
    if (nrm > 1e-300) a.col(j) /= nrm;
  }
  return a;
}

Mat random_orthonormal(int d, int r, std::uint64_t seed) {
  if (d < r) throw std::invalid_argument("random_orthonormal: need d >= r");
  ThinSvd svd = thin_svd_jacobi(randn_matrix(d, r, seed));
  return svd.U * svd.V.transpose();
}

Mat randn_dense(int m, int d, std::uint64_t seed) { return randn_matrix(m, d, seed); }

double default_sparse_pca_beta0(double rho) { return 50.0 * rho; }

CompositeProblem build_sparse_pca(const SparsePcaSpec& spec, std::uint64_t init_seed) {
  const int d = static_cast<int>(spec.D.cols());
  const int r = spec.r;
  const int mrows = static_cast<int>(spec.D.rows());
  if (r < 1 || r > d)
    throw std::invalid_argument("build_sparse_pca: need 1 <= r <= cols(D)");
  if (!all_finite(spec.D)) throw std::invalid_argument("build_sparse_pca: D not finite");
  if (spec.rho < 0.0) throw std::invalid_argument("build_sparse_pca: rho must be >= 0");

  const int dr = d * r;
  CompositeProblem prob;
  prob.n = 2;
  prob.m = dr;
  prob.coupling.output_dim = dr;
  prob.coupling.blocks.push_back(LinearMap::scaled_identity(dr, -1.0));
  prob.coupling.blocks.push_back(LinearMap::identity(dr));
  prob.rhs = Vec::Zero(dr);

  prob.smooth.push_back(SmoothTerm::zero());
  prob.prox.push_back(orthogonality_indicator(d, r));

  auto S = std::make_shared<Mat>(spec.D.transpose() * spec.D);
  const double trS = S->trace();
  const double s_max = largest_singular_value(spec.D);
  const double lam_s = s_max * s_max;  // lambda_max(D^T D)
  const double region = std::sqrt(static_cast<double>(r)) + 1.0;  // ||V||_F bound
  auto warned = std::make_shared<std::atomic<bool>>(false);

  SmoothTerm f2;
  f2.value = [S, trS, mrows, d, r](const Vec& x) {
    Eigen::Map<const Mat> v(x.data(), d, r);
    Mat sv = *S * v;
    Mat vtsv = v.transpose() * sv;
    Mat vtv = v.transpose() * v;
    return (trS - 2.0 * vtsv.trace() + (vtsv.array() * vtv.array()).sum()) /
           (2.0 * mrows);
  };
  f2.gradient = [S, mrows, d, r, region, warned](const Vec& x) {
    Eigen::Map<const Mat> v(x.data(), d, r);
    if (v.norm() > region && !warned->exchange(true))
      std::cerr << "build_sparse_pca: iterate left ||V||_F <= sqrt(r)+1; the "
                   "smoothness constant no longer covers it\n";
    Mat sv = *S * v;
    Mat g = (sv * (v.transpose() * v) + v * (v.transpose() * sv) - 2.0 * sv) /
            static_cast<double>(mrows);
    return Vec(Eigen::Map<const Vec>(g.data(), g.size()));
  };
  // Hessian bound of the quartic on the region, with headroom.
  f2.lipschitz = 3.0 * lam_s / mrows * (2.0 * region * region + 1.0);
  prob.smooth.push_back(f2);

  if (spec.reg == SparsePcaSpec::Reg::L1) {
    prob.prox.push_back(l1_term(spec.rho, dr));
    prob.C_h = *prob.prox.back().lipschitz_const;
  } else {
    prob.prox.push_back(l0_term(spec.rho));
    prob.C_h = std::numeric_limits<double>::quiet_NaN();
    prob.allow_nonconvex_last = true;
  }
  prob.C_f = lam_s / mrows * (2.0 * region * region * region + 2.0 * region);

  prob.spectral.lambda_up = 1.0;
  prob.spectral.lambda_down = 1.0;
  prob.spectral.lambda_down_prime = 1.0;
  prob.spectral.kappa = 1.0;
  prob.spectral.op_norms = {1.0, 1.0};

  Mat v0 = random_orthonormal(d, r, init_seed);
  Vec v0_vec = Eigen::Map<const Vec>(v0.data(), v0.size());
  prob.initial_x = BlockVector{{v0_vec, v0_vec}};

  prob.validate();
  return prob;
}

CompositeProblem build_phase_retrieval(const PhaseRetrievalSpec& spec) {
  const int d = static_cast<int>(spec.G.cols());
  const int mr = static_cast<int>(spec.D.rows());
  if (spec.D.cols() != d)
    throw std::invalid_argument("build_phase_retrieval: G and D column mismatch");
  if (spec.z.size() != spec.G.rows())
    throw std::invalid_argument("build_phase_retrieval: z dim mismatch");
  if (spec.rho < 0.0) throw std::invalid_argument("build_phase_retrieval: rho >= 0");

  CompositeProblem prob;
  prob.n = 2;
  prob.m = mr;
  prob.coupling.output_dim = mr;
  prob.coupling.blocks.push_back(LinearMap::identity(mr));
  prob.coupling.blocks.push_back(LinearMap(Mat(-spec.D)));
  prob.rhs = Vec::Zero(mr);

  prob.smooth.push_back(SmoothTerm::zero());
  prob.prox.push_back(nonneg_indicator());

  auto G = std::make_shared<Mat>(spec.G);
  auto z = std::make_shared<Vec>(spec.z);
  SmoothTerm f2;
  f2.value = [G, z](const Vec& v) {
    Vec w = *G * v;
    return 0.5 * (w.array() * w.array() - z->array()).matrix().squaredNorm();
  };
  f2.gradient = [G, z](const Vec& v) {
    Vec w = *G * v;
    Vec inner = (w.array() * (w.array() * w.array() - z->array())).matrix();
    return Vec(2.0 * G->transpose() * inner);
  };
  const double gn = largest_singular_value(spec.G);
  const double z_inf = spec.z.size() ? spec.z.cwiseAbs().maxCoeff() : 0.0;
  const double region = std::max(1.0, std::sqrt(static_cast<double>(d)));
  f2.lipschitz = 2.0 * gn * gn * (3.0 * gn * gn * region * region + z_inf);
  prob.smooth.push_back(f2);
  prob.prox.push_back(l1_term(spec.rho, d));

  prob.C_h = *prob.prox.back().lipschitz_const;
  prob.C_f = 2.0 * gn * gn * region * (gn * gn * region * region + z_inf);

  prob.spectral = estimate_spectral(prob.coupling);
  if (!(prob.spectral.lambda_down > 0.0))
    throw std::invalid_argument(
        "build_phase_retrieval: D must be surjective (lambda_min(D D^T) > 0)");

  prob.validate();
  return prob;
}

CompositeProblem build_robust_regression(const RobustRegressionSpec& spec) {
  const int d = static_cast<int>(spec.G.cols());
  const int mrows = static_cast<int>(spec.G.rows());
  if (spec.z.size() != mrows)
    throw std::invalid_argument("build_robust_regression: z dim mismatch");
  if (spec.s < 0 || spec.s > d)
    throw std::invalid_argument("build_robust_regression: need 0 <= s <= cols(G)");

  CompositeProblem prob;
  prob.n = 2;
  prob.m = mrows;
  prob.coupling.output_dim = mrows;
  prob.coupling.blocks.push_back(LinearMap(Mat(-spec.G)));
  prob.coupling.blocks.push_back(LinearMap::identity(mrows));
  prob.rhs = -spec.z;

  prob.smooth.push_back(SmoothTerm::zero());
  prob.smooth.push_back(SmoothTerm::zero());
  prob.prox.push_back(cardinality_indicator(spec.s));
  prob.prox.push_back(l1_term(1.0, mrows));

  prob.C_h = *prob.prox.back().lipschitz_const;
  prob.C_f = 0.0;

  prob.spectral = estimate_spectral(prob.coupling);
  prob.validate();
  return prob;
}

}  // namespace ipds
