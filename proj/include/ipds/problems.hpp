#pragma once

#include "ipds/solver.hpp"

#include <cstdint>
#include <string>

namespace ipds {

/// Sparse PCA: min (1/2m)||D - D V V^T||_F^2 + rho ||V||_1 over V^T V = I,
/// split as x_1 = vec(Y) with the orthogonality indicator and x_2 = vec(V),
/// coupled by -Y + V = 0 (bijective last block).
struct SparsePcaSpec {
  Mat D;
  int r = 1;
  double rho = 0.0;
  enum class Reg { L1, L0 } reg = Reg::L1;
};

/// Structured sparse phase retrieval: min (1/2)||(Gv).(Gv) - z||^2 + rho||v||_1
/// subject to Dv >= 0, split with x_1 = y >= 0 and A_2 = -D (surjective last block).
struct PhaseRetrievalSpec {
  Mat G;
  Vec z;
  Mat D;
  double rho = 0.0;
};

/// Robust sparse regression: min ||Gv - z||_1 over ||v||_0 <= s,
/// split as h_1 = cardinality indicator, h_2 = l1, coupling -Gv + y = -z.
struct RobustRegressionSpec {
  Mat G;
  Vec z;
  int s = 0;
};

CompositeProblem build_sparse_pca(const SparsePcaSpec& spec, std::uint64_t init_seed);
CompositeProblem build_phase_retrieval(const PhaseRetrievalSpec& spec);
CompositeProblem build_robust_regression(const RobustRegressionSpec& spec);

/// Seeded standard-normal matrix, columns mean-centered then unit-normalized.
/// Note the centering puts the all-ones vector in the kernel of the transpose,
/// so a centered matrix is never surjective; use randn_dense where that matters.
Mat synth_data(const std::string& kind, int m, int d, std::uint64_t seed);

/// Seeded standard-normal matrix without any normalization.
Mat randn_dense(int m, int d, std::uint64_t seed);

/// Seeded d x r matrix with orthonormal columns (polar factor of a randn matrix).
Mat random_orthonormal(int d, int r, std::uint64_t seed);

/// The benchmark harness default beta0 = 50 rho.
double default_sparse_pca_beta0(double rho);

}  // namespace ipds
