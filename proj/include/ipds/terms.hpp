#pragma once

#include "ipds/linblock.hpp"

#include <functional>
#include <optional>
#include <string>

namespace ipds {

/// Smooth objective term f_i: value, gradient, and an L_i-smoothness constant.
struct SmoothTerm {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
  double lipschitz = 0.0;

  static SmoothTerm zero();
};

/// Prox-friendly term h_i. prox(x, tau) minimizes h(x') + (1/(2 tau)) ||x' - x||^2
/// (step-size convention throughout; the smoothing-parameter form is tau = 1/mu).
struct ProxTerm {
  std::function<double(const Vec&)> value;  // extended-real: +inf when infeasible
  std::function<Vec(const Vec&, double)> prox;
  bool is_convex = false;
  std::optional<double> lipschitz_const;  // C_h, set for terms usable as the last block
  std::string name;
};

// Standalone prox kernels.
Vec prox_l1(const Vec& x, double rho, double tau);
Vec prox_indicator_orthogonality(const Vec& x, int d, int r, double tau);
Vec prox_cardinality(const Vec& x, int s, double tau);
Vec prox_generic_check(const ProxTerm& h, const Vec& x, double tau);

// Term catalog. l1/group_l21 carry C_h = rho sqrt(dim) resp. rho sqrt(rows).
ProxTerm l1_term(double rho, int dim);
ProxTerm l0_term(double rho);
ProxTerm group_l21_term(double rho, int rows, int cols);
ProxTerm nonneg_indicator();
ProxTerm cardinality_indicator(int s);
ProxTerm orthogonality_indicator(int d, int r);
ProxTerm zero_term();

/// Thin SVD of a d x r matrix (d >= r) by one-sided Jacobi rotations.
/// Off-diagonal mass driven below 1e-12; used by the orthogonality projection.
struct ThinSvd {
  Mat U;   // d x r, orthonormal columns
  Vec s;   // r singular values, descending
  Mat V;   // r x r orthogonal
};
ThinSvd thin_svd_jacobi(const Mat& a, double tol = 1e-12, int max_sweeps = 60);

}  // namespace ipds
