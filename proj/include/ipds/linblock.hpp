#pragma once

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace ipds {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

bool all_finite(const Vec& v);
bool all_finite(const Mat& m);

/// Ordered tuple of per-block dense vectors; the solver's primal state.
struct BlockVector {
  std::vector<Vec> blocks;

  int n() const { return static_cast<int>(blocks.size()); }

  double squared_norm() const {
    double s = 0.0;
    for (const Vec& b : blocks) s += b.squaredNorm();
    return s;
  }
  double norm() const;
};

struct DimensionError : std::runtime_error {
  int block_index;
  DimensionError(int block, const std::string& what)
      : std::runtime_error(what), block_index(block) {}
};

/// One block of the coupling operator: an explicit dense matrix, a scaled
/// identity (+-c I), or a matrix-free (apply, apply_adjoint) pair.
class LinearMap {
 public:
  struct Dense {
    Mat A;
  };
  struct ScaledIdentity {
    int dim;
    double scale;
  };
  struct MatrixFree {
    int rows, cols;
    std::function<Vec(const Vec&)> apply;
    std::function<Vec(const Vec&)> apply_adjoint;
  };

  explicit LinearMap(Mat A) : rep_(Dense{std::move(A)}) {}
  static LinearMap identity(int dim) { return LinearMap(ScaledIdentity{dim, 1.0}); }
  static LinearMap scaled_identity(int dim, double c) {
    return LinearMap(ScaledIdentity{dim, c});
  }
  static LinearMap matrix_free(int rows, int cols,
                               std::function<Vec(const Vec&)> apply,
                               std::function<Vec(const Vec&)> apply_adjoint) {
    return LinearMap(MatrixFree{rows, cols, std::move(apply), std::move(apply_adjoint)});
  }

  int rows() const;
  int cols() const;
  Vec apply(const Vec& x) const;
  Vec apply_adjoint(const Vec& y) const;

  bool is_scaled_identity() const {
    return std::holds_alternative<ScaledIdentity>(rep_);
  }
  double identity_scale() const { return std::get<ScaledIdentity>(rep_).scale; }

 private:
  explicit LinearMap(ScaledIdentity s) : rep_(s) {}
  explicit LinearMap(MatrixFree f) : rep_(std::move(f)) {}
  std::variant<Dense, ScaledIdentity, MatrixFree> rep_;
};

/// The coupling of Problem data: x |-> sum_i A_i x_i, all A_i mapping into R^m.
struct BlockOperator {
  std::vector<LinearMap> blocks;
  int output_dim = 0;  // m

  int n() const { return static_cast<int>(blocks.size()); }
};

Vec apply(const BlockOperator& op, const BlockVector& x);
Vec apply_adjoint_block(const BlockOperator& op, int i, const Vec& y);

/// Spectral constants of the coupling: lambda_up = lambda_max(A_n A_n^T),
/// lambda_down = lambda_min(A_n A_n^T), lambda_down_prime = lambda_min(A_n^T A_n),
/// kappa = lambda_up / lambda_down, plus ||A_i|| per block.
struct SpectralInfo {
  double lambda_up = 0.0;
  double lambda_down = 0.0;
  double lambda_down_prime = 0.0;
  double kappa = 1.0;
  std::vector<double> op_norms;
};

struct SpectralError : std::runtime_error {
  double best_estimate;
  double residual;
  SpectralError(double est, double res, const std::string& what)
      : std::runtime_error(what), best_estimate(est), residual(res) {}
};

/// Power-iteration estimates of the SpectralInfo constants. Deterministic
/// seeded start vector; closed form for scaled-identity maps.
/// lambda_down is computed by deflation as lambda_up - lambda_max(lambda_up I - A A^T).
SpectralInfo estimate_spectral(const BlockOperator& op, double tol = 1e-13,
                               int max_iter = 200000);

}  // namespace ipds
