#include "ipds/terms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace ipds {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kIndicatorTol = 1e-8;  // membership slack when evaluating indicators
}  // namespace

SmoothTerm SmoothTerm::zero() {
  SmoothTerm t;
  t.value = [](const Vec&) { return 0.0; };
  t.gradient = [](const Vec& x) { return Vec(Vec::Zero(x.size())); };
  t.lipschitz = 0.0;
  return t;
}

Vec prox_l1(const Vec& x, double rho, double tau) {
  if (rho < 0.0 || tau <= 0.0)
    throw std::invalid_argument("prox_l1: need rho >= 0 and tau > 0");
  const double thr = rho * tau;
  Vec out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double v = x[i];
    out[i] = v > thr ? v - thr : (v < -thr ? v + thr : 0.0);
  }
  return out;
}

ThinSvd thin_svd_jacobi(const Mat& a, double tol, int max_sweeps) {
  const int d = static_cast<int>(a.rows());
  const int r = static_cast<int>(a.cols());
  if (d < r) throw std::invalid_argument("thin_svd_jacobi: need rows >= cols");

  Mat w = a;
  Mat v = Mat::Identity(r, r);

  bool converged = false;
  int sweeps = 0;
  for (; sweeps < max_sweeps && !converged; ++sweeps) {
    converged = true;
    for (int p = 0; p < r - 1; ++p) {
      for (int q = p + 1; q < r; ++q) {
        const double app = w.col(p).squaredNorm();
        const double aqq = w.col(q).squaredNorm();
        const double apq = w.col(p).dot(w.col(q));
        if (std::abs(apq) <= tol * std::sqrt(app * aqq) || apq == 0.0) continue;
        converged = false;
        const double zeta = (aqq - app) / (2.0 * apq);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double cs = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = cs * t;
        Vec wp = w.col(p), wq = w.col(q);
        w.col(p) = cs * wp - sn * wq;
        w.col(q) = sn * wp + cs * wq;
        Vec vp = v.col(p), vq = v.col(q);
        v.col(p) = cs * vp - sn * vq;
        v.col(q) = sn * vp + cs * vq;
      }
    }
  }
  if (!converged)
    throw std::runtime_error("thin_svd_jacobi: no convergence after " +
                             std::to_string(sweeps) + " sweeps");

  ThinSvd out;
  out.U.resize(d, r);
  out.s.resize(r);
  out.V.resize(r, r);

  std::vector<int> order(r);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> norms(r);
  for (int j = 0; j < r; ++j) norms[j] = w.col(j).norm();
  std::stable_sort(order.begin(), order.end(),
                   [&norms](int i, int j) { return norms[i] > norms[j]; });

  for (int j = 0; j < r; ++j) {
    const int src = order[j];
    out.s[j] = norms[src];
    out.V.col(j) = v.col(src);
    if (norms[src] > 1e-154) {
      out.U.col(j) = w.col(src) / norms[src];
    } else {
      // Rank-deficient column: complete deterministically against the basis.
      Vec cand = Vec::Zero(d);
      for (int e = 0; e < d; ++e) {
        cand.setZero();
        cand[e] = 1.0;
        for (int k = 0; k < j; ++k) cand -= out.U.col(k).dot(cand) * out.U.col(k);
        if (cand.norm() > 0.5) break;
      }
      out.U.col(j) = cand / cand.norm();
    }
  }
  return out;
}

Vec prox_indicator_orthogonality(const Vec& x, int d, int r, double tau) {
  (void)tau;  // indicator proxes are step-size independent
  if (d < r) throw std::invalid_argument("prox_indicator_orthogonality: need d >= r");
  if (x.size() != static_cast<Eigen::Index>(d) * r)
    throw std::invalid_argument("prox_indicator_orthogonality: dim(x) != d*r");
  Eigen::Map<const Mat> vmat(x.data(), d, r);
  ThinSvd svd = thin_svd_jacobi(vmat);
  Mat w = svd.U * svd.V.transpose();
  return Eigen::Map<const Vec>(w.data(), w.size());
}

Vec prox_cardinality(const Vec& x, int s, double tau) {
  (void)tau;
  const int n = static_cast<int>(x.size());
  if (s < 0 || s > n)
    throw std::invalid_argument("prox_cardinality: need 0 <= s <= dim");
  if (s == n) return x;
  Vec out = Vec::Zero(n);
  if (s == 0) return out;
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  // stable sort: magnitude ties resolved toward the lowest index
  std::stable_sort(order.begin(), order.end(), [&x](int i, int j) {
    return std::abs(x[i]) > std::abs(x[j]);
  });
  for (int k = 0; k < s; ++k) out[order[k]] = x[order[k]];
  return out;
}

Vec prox_generic_check(const ProxTerm& h, const Vec& x, double tau) {
  if (tau <= 0.0) throw std::invalid_argument("prox_generic_check: tau must be positive");
  if (!all_finite(x)) throw std::invalid_argument("prox_generic_check: nonfinite input");
  return h.prox(x, tau);
}

ProxTerm l1_term(double rho, int dim) {
  ProxTerm t;
  t.name = "l1";
  t.is_convex = true;
  t.lipschitz_const = rho * std::sqrt(static_cast<double>(dim));
  t.value = [rho](const Vec& x) { return rho * x.lpNorm<1>(); };
  t.prox = [rho](const Vec& x, double tau) { return prox_l1(x, rho, tau); };
  return t;
}

ProxTerm l0_term(double rho) {
  ProxTerm t;
  t.name = "l0";
  t.is_convex = false;
  t.value = [rho](const Vec& x) {
    int nnz = 0;
    for (Eigen::Index i = 0; i < x.size(); ++i)
      if (x[i] != 0.0) ++nnz;
    return rho * nnz;
  };
  // Hard threshold: x_i survives iff x_i^2 > 2 rho tau (ties go to zero).
  t.prox = [rho](const Vec& x, double tau) {
    const double cut = 2.0 * rho * tau;
    Vec out = x;
    for (Eigen::Index i = 0; i < x.size(); ++i)
      if (x[i] * x[i] <= cut) out[i] = 0.0;
    return out;
  };
  return t;
}

ProxTerm group_l21_term(double rho, int rows, int cols) {
  ProxTerm t;
  t.name = "group_l21";
  t.is_convex = true;
  t.lipschitz_const = rho * std::sqrt(static_cast<double>(rows));
  t.value = [rho, rows, cols](const Vec& x) {
    Eigen::Map<const Mat> m(x.data(), rows, cols);
    double s = 0.0;
    for (int i = 0; i < rows; ++i) s += m.row(i).norm();
    return rho * s;
  };
  t.prox = [rho, rows, cols](const Vec& x, double tau) {
    Eigen::Map<const Mat> m(x.data(), rows, cols);
    Mat out(rows, cols);
    const double thr = rho * tau;
    for (int i = 0; i < rows; ++i) {
      const double nr = m.row(i).norm();
      out.row(i) = nr > thr ? ((1.0 - thr / nr) * m.row(i)).eval()
                            : Eigen::RowVectorXd::Zero(cols).eval();
    }
    return Vec(Eigen::Map<const Vec>(out.data(), out.size()));
  };
  return t;
}

ProxTerm nonneg_indicator() {
  ProxTerm t;
  t.name = "indicator_nonneg";
  t.is_convex = true;
  t.value = [](const Vec& x) { return x.minCoeff() >= -kIndicatorTol ? 0.0 : kInf; };
  t.prox = [](const Vec& x, double) { return Vec(x.cwiseMax(0.0)); };
  return t;
}

ProxTerm cardinality_indicator(int s) {
  ProxTerm t;
  t.name = "indicator_cardinality";
  t.is_convex = false;
  t.value = [s](const Vec& x) {
    int nnz = 0;
    for (Eigen::Index i = 0; i < x.size(); ++i)
      if (x[i] != 0.0) ++nnz;
    return nnz <= s ? 0.0 : kInf;
  };
  t.prox = [s](const Vec& x, double tau) { return prox_cardinality(x, s, tau); };
  return t;
}

ProxTerm orthogonality_indicator(int d, int r) {
  ProxTerm t;
  t.name = "indicator_orthogonality";
  t.is_convex = false;
  t.value = [d, r](const Vec& x) {
    Eigen::Map<const Mat> v(x.data(), d, r);
    Mat gram = v.transpose() * v;
    double off = (gram - Mat::Identity(r, r)).norm();
    return off <= kIndicatorTol * std::sqrt(static_cast<double>(r)) ? 0.0 : kInf;
  };
  t.prox = [d, r](const Vec& x, double tau) {
    return prox_indicator_orthogonality(x, d, r, tau);
  };
  return t;
}

ProxTerm zero_term() {
  ProxTerm t;
  t.name = "zero";
  t.is_convex = true;
  t.lipschitz_const = 0.0;
  t.value = [](const Vec&) { return 0.0; };
  t.prox = [](const Vec& x, double) { return x; };
  return t;
}

}  // namespace ipds
