#include "ipds/linblock.hpp"

#include <cmath>
#include <random>

namespace ipds {

bool all_finite(const Vec& v) { return v.allFinite(); }
bool all_finite(const Mat& m) { return m.allFinite(); }

double BlockVector::norm() const { return std::sqrt(squared_norm()); }

int LinearMap::rows() const {
  if (auto* d = std::get_if<Dense>(&rep_)) return static_cast<int>(d->A.rows());
  if (auto* s = std::get_if<ScaledIdentity>(&rep_)) return s->dim;
  return std::get<MatrixFree>(rep_).rows;
}

int LinearMap::cols() const {
  if (auto* d = std::get_if<Dense>(&rep_)) return static_cast<int>(d->A.cols());
  if (auto* s = std::get_if<ScaledIdentity>(&rep_)) return s->dim;
  return std::get<MatrixFree>(rep_).cols;
}

Vec LinearMap::apply(const Vec& x) const {
  if (auto* d = std::get_if<Dense>(&rep_)) return d->A * x;
  if (auto* s = std::get_if<ScaledIdentity>(&rep_)) return s->scale * x;
  return std::get<MatrixFree>(rep_).apply(x);
}

Vec LinearMap::apply_adjoint(const Vec& y) const {
  if (auto* d = std::get_if<Dense>(&rep_)) return d->A.transpose() * y;
  if (auto* s = std::get_if<ScaledIdentity>(&rep_)) return s->scale * y;
  return std::get<MatrixFree>(rep_).apply_adjoint(y);
}

Vec apply(const BlockOperator& op, const BlockVector& x) {
  if (x.n() != op.n())
    throw DimensionError(-1, "apply: block count mismatch, operator has " +
                                 std::to_string(op.n()) + " blocks, vector has " +
                                 std::to_string(x.n()));
  Vec out = Vec::Zero(op.output_dim);
  for (int i = 0; i < op.n(); ++i) {
    if (x.blocks[i].size() != op.blocks[i].cols())
      throw DimensionError(i, "apply: block " + std::to_string(i) + " has dim " +
                                  std::to_string(x.blocks[i].size()) + ", expected " +
                                  std::to_string(op.blocks[i].cols()));
    out += op.blocks[i].apply(x.blocks[i]);
  }
  return out;
}

Vec apply_adjoint_block(const BlockOperator& op, int i, const Vec& y) {
  if (i < 0 || i >= op.n())
    throw DimensionError(i, "apply_adjoint_block: invalid block index " + std::to_string(i));
  if (y.size() != op.output_dim)
    throw DimensionError(i, "apply_adjoint_block: vector has dim " +
                                std::to_string(y.size()) + ", expected " +
                                std::to_string(op.output_dim));
  return op.blocks[i].apply_adjoint(y);
}

namespace {

// Largest eigenvalue of a symmetric PSD operator given as a matvec closure.
// Rayleigh-quotient power iteration from a fixed-seed start vector.
double power_iteration(const std::function<Vec(const Vec&)>& matvec, int dim,
                       double tol, int max_iter, const char* label) {
  std::mt19937_64 rng(0x1905u);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v[i] = normal(rng);
  v.normalize();

  double lambda = 0.0;
  double residual = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iter; ++it) {
    Vec w = matvec(v);
    double nw = w.norm();
    if (nw <= 1e-300) return 0.0;  // operator annihilates the iterate
    double lambda_new = v.dot(w);  // Rayleigh quotient, v unit
    residual = std::abs(lambda_new - lambda);
    v = w / nw;
    lambda = lambda_new;
    if (it > 2 && residual <= tol * std::max(1.0, std::abs(lambda))) return lambda;
  }
  throw SpectralError(lambda, residual,
                      std::string("estimate_spectral: power iteration on ") + label +
                          " did not converge, best estimate " + std::to_string(lambda));
}

double block_operator_norm(const LinearMap& a, double tol, int max_iter) {
  if (a.is_scaled_identity()) return std::abs(a.identity_scale());
  auto gram = [&a](const Vec& x) { return a.apply_adjoint(a.apply(x)); };
  double lam = power_iteration(gram, a.cols(), tol, max_iter, "A_i^T A_i");
  return std::sqrt(std::max(0.0, lam));
}

}  // namespace

SpectralInfo estimate_spectral(const BlockOperator& op, double tol, int max_iter) {
  if (tol <= 0.0) throw std::invalid_argument("estimate_spectral: tol must be positive");
  SpectralInfo info;
  info.op_norms.resize(op.n());
  for (int i = 0; i < op.n(); ++i)
    info.op_norms[i] = block_operator_norm(op.blocks[i], tol, max_iter);

  const LinearMap& an = op.blocks.back();
  if (an.is_scaled_identity()) {
    double c2 = an.identity_scale() * an.identity_scale();
    info.lambda_up = c2;
    info.lambda_down = c2;
    info.lambda_down_prime = c2;
    info.kappa = 1.0;
    return info;
  }

  const int m = an.rows();
  const int d = an.cols();
  auto aat = [&an](const Vec& y) { return an.apply(an.apply_adjoint(y)); };
  auto ata = [&an](const Vec& x) { return an.apply_adjoint(an.apply(x)); };

  info.lambda_up = power_iteration(aat, m, tol, max_iter, "A_n A_n^T");
  double lu = info.lambda_up;
  // lambda_min via deflation of the shifted operator: avoids inverse iteration.
  auto aat_shift = [&aat, lu](const Vec& y) { return Vec(lu * y - aat(y)); };
  auto ata_shift = [&ata, lu](const Vec& x) { return Vec(lu * x - ata(x)); };
  info.lambda_down =
      std::max(0.0, lu - power_iteration(aat_shift, m, tol, max_iter, "shift(A_n A_n^T)"));
  info.lambda_down_prime =
      std::max(0.0, lu - power_iteration(ata_shift, d, tol, max_iter, "shift(A_n^T A_n)"));
  info.kappa = info.lambda_down > 0.0 ? info.lambda_up / info.lambda_down
                                      : std::numeric_limits<double>::infinity();
  return info;
}

}  // namespace ipds
