#include "ipds/solver.hpp"

#include <cassert>
#include <chrono>
#include <cmath>
#include <iostream>

namespace ipds {

void CompositeProblem::validate() const {
  if (n < 1) throw std::invalid_argument("problem: need at least one block");
  if (coupling.n() != n || static_cast<int>(smooth.size()) != n ||
      static_cast<int>(prox.size()) != n)
    throw std::invalid_argument("problem: block count mismatch across terms/coupling");
  if (coupling.output_dim != m || rhs.size() != m)
    throw std::invalid_argument("problem: rhs/coupling output dim mismatch");
  for (int i = 0; i < n; ++i)
    if (coupling.blocks[i].rows() != m)
      throw DimensionError(i, "problem: coupling block " + std::to_string(i) +
                                  " maps into dim " +
                                  std::to_string(coupling.blocks[i].rows()) +
                                  ", expected " + std::to_string(m));
  if (static_cast<int>(spectral.op_norms.size()) != n)
    throw std::invalid_argument("problem: spectral info missing per-block norms");
  if (!(spectral.lambda_down > 0.0))
    throw std::invalid_argument("problem: last coupling block must be surjective "
                                "(lambda_min(A_n A_n^T) > 0)");
  if (!allow_nonconvex_last) {
    if (!prox.back().is_convex)
      throw std::invalid_argument("problem: last-block h must be convex");
    if (!std::isfinite(C_h))
      throw std::invalid_argument("problem: last-block C_h must be finite");
  }
  if (initial_x) {
    if (initial_x->n() != n)
      throw std::invalid_argument("problem: initial point has wrong block count");
    for (int i = 0; i < n; ++i)
      if (initial_x->blocks[i].size() != dim(i))
        throw DimensionError(i, "problem: initial block dim mismatch");
  }
}

void StoppingRule::validate() const {
  if (!(epsilon > 0.0) && max_iter < 0 && max_wall_time < 0)
    throw std::invalid_argument("stopping rule: at least one bound must be set");
}

SolverState make_initial_state(const CompositeProblem& prob, const IpdsSchedule& sched) {
  prob.validate();
  SolverState s;
  if (prob.initial_x) {
    s.x = *prob.initial_x;
  } else {
    s.x.blocks.resize(prob.n);
    for (int i = 0; i < prob.n; ++i) s.x.blocks[i] = Vec::Zero(prob.dim(i));
  }
  s.x_breve_n = s.x.blocks.back();
  s.t = 0;
  s.beta = beta_at(sched, 0);
  s.mu = mu_at(sched, 0);
  s.z_hat = prob.initial_z ? Vec(*prob.initial_z / std::sqrt(s.beta))
                           : Vec(Vec::Zero(prob.m));
  s.residual = apply(prob.coupling, s.x) - prob.rhs;
  s.has_caches = false;
  return s;
}

double augmented_smooth_value(const CompositeProblem& prob, const BlockVector& x,
                              const Vec& z, double beta) {
  double v = 0.0;
  for (int i = 0; i < prob.n; ++i) v += prob.smooth[i].value(x.blocks[i]);
  Vec r = apply(prob.coupling, x) - prob.rhs;
  return v + r.dot(z) + 0.5 * beta * r.squaredNorm();
}

Vec partial_gradient(const CompositeProblem& prob, const BlockVector& x_mixed,
                     const Vec& z, double beta, int i) {
  Vec r = apply(prob.coupling, x_mixed) - prob.rhs;
  return Vec(prob.smooth[i].gradient(x_mixed.blocks[i]) +
             apply_adjoint_block(prob.coupling, i, Vec(z + beta * r)));
}

namespace {

double block_L(const CompositeProblem& prob, double beta, int i) {
  // For the last block use lambda_up itself: ||A_n||^2 = lambda_max(A_n A_n^T).
  const double a2 = (i == prob.n - 1)
                        ? prob.spectral.lambda_up
                        : prob.spectral.op_norms[i] * prob.spectral.op_norms[i];
  return prob.smooth[i].lipschitz + beta * a2;
}

#ifndef NDEBUG
// Surrogate optimality of the prox update (Algorithm step S2-S4):
// h(x+) + <x+ - x, g> + (theta1 L / 2)||x+ - x||^2 <= h(x).
// The slack scales with the cancelling terms so the check stays quiet while a
// genuinely diverging run heads for its nonfinite-iterate error.
void assert_surrogate_decrease(const ProxTerm& h, const Vec& x_old, const Vec& x_new,
                               const Vec& g, double theta1_L) {
  const double rhs = h.value(x_old);
  if (!std::isfinite(rhs)) return;
  const Vec d = x_new - x_old;
  const double cross = d.dot(g);
  const double quad = 0.5 * theta1_L * d.squaredNorm();
  const double lhs = h.value(x_new) + cross + quad;
  // nonfinite values mean the run is already diverging; the nonfinite-iterate
  // check reports that as a structured error.
  assert(!std::isfinite(lhs) ||
         lhs <= rhs + 1e-9 * (1.0 + std::abs(rhs) + std::abs(cross) + quad));
}
#endif

}  // namespace

SolverState step(const CompositeProblem& prob, const SolverState& state,
                 const RegimeParams& params, const IpdsSchedule& sched) {
  const int n = prob.n;
  const long t = state.t;
  const double beta = beta_at(sched, t);
  const double mu = mu_at(sched, t);
  const double sigma = params.sigma;

#ifndef NDEBUG
  // L_n <= delta beta^t lambda_up whenever beta0 clears its admissibility floor.
  assert(prob.smooth[n - 1].lipschitz >
             sched.delta * sched.beta0 * sched.lambda_up * (1.0 + 1e-12) ||
         prob.smooth[n - 1].lipschitz <=
             sched.delta * beta * sched.lambda_up * (1.0 + 1e-12) + 1e-300);
#endif

  SolverState next;
  next.x = state.x;
  const Vec z = state.z();
  Vec r = state.residual;

  for (int i = 0; i < n - 1; ++i) {
    const double Li = block_L(prob, beta, i);
    const double stiff = params.theta1 * Li;
    Vec gi = prob.smooth[i].gradient(next.x.blocks[i]) +
             apply_adjoint_block(prob.coupling, i, Vec(z + beta * r));
    Vec xi_new = prob.prox[i].prox(Vec(next.x.blocks[i] - gi / stiff), 1.0 / stiff);
    if (!all_finite(xi_new))
      throw DivergenceError(i, t, "step: nonfinite iterate in block " +
                                      std::to_string(i) + " at iteration " +
                                      std::to_string(t));
#ifndef NDEBUG
    assert_surrogate_decrease(prob.prox[i], next.x.blocks[i], xi_new, gi, stiff);
#endif
    r += prob.coupling.blocks[i].apply(Vec(xi_new - next.x.blocks[i]));
    next.x.blocks[i] = std::move(xi_new);
  }

  // S5: smoothed last-block subproblem in closed form.
  const double Ln = block_L(prob, beta, n - 1);
  const double rho = params.theta2 * Ln;
  const Vec grad_fn_old = prob.smooth[n - 1].gradient(state.x.blocks[n - 1]);
  Vec gn = grad_fn_old + apply_adjoint_block(prob.coupling, n - 1, Vec(z + beta * r));
  Vec c = state.x.blocks[n - 1] - gn / rho;
  Vec x_breve = prob.prox[n - 1].prox(c, mu + 1.0 / rho);
  Vec x_bar = (x_breve + (mu * rho) * c) / (1.0 + mu * rho);
  if (!all_finite(x_bar) || !all_finite(x_breve))
    throw DivergenceError(n - 1, t, "step: nonfinite iterate in block " +
                                        std::to_string(n - 1) + " at iteration " +
                                        std::to_string(t));
#ifndef NDEBUG
  // The smoothed minimizer stays within mu C_h of the inner prox point.
  assert(!std::isfinite(prob.C_h) ||
         (x_bar - x_breve).norm() <= mu * prob.C_h + 1e-9 * (1.0 + x_bar.norm()));
#endif
  Vec dxn = x_bar - state.x.blocks[n - 1];
  r += prob.coupling.blocks[n - 1].apply(dxn);
  next.x.blocks[n - 1] = x_bar;
  next.x_breve_n = std::move(x_breve);

  // S6, rescaled multipliers: z_hat^{t+1} = z_hat^t sqrt(b/b+) + (b/sqrt(b+)) sigma r.
  const double beta_next = beta_at(sched, t + 1);
  const double sb = std::sqrt(beta), sbn = std::sqrt(beta_next);
  next.z_hat = (sb / sbn) * state.z_hat + (beta / sbn) * sigma * r;
  const Vec dz = (sigma * beta) * r;

  if ((t + 1) % 100 == 0) {
    Vec r_exact = apply(prob.coupling, next.x) - prob.rhs;
    const double drift = (r_exact - r).norm();
    if (drift > 1e-9)
      std::cerr << "ipds: coupling residual drift " << drift << " at iteration "
                << (t + 1) << ", resetting\n";
    r = std::move(r_exact);
  }
  next.residual = std::move(r);

  next.t = t + 1;
  next.beta = beta_next;
  next.mu = mu_at(sched, t + 1);

  Vec an_dxn = prob.coupling.blocks[n - 1].apply(dxn);
  next.last_u_n = rho * dxn - beta * apply_adjoint_block(prob.coupling, n - 1, an_dxn);
  next.last_s_n = rho * (c - x_bar);  // exact element of subdiff h_n at x_breve
  next.last_w_n = next.last_s_n + grad_fn_old;
  next.last_a_vec = apply_adjoint_block(prob.coupling, n - 1, dz);
  if (params.regime == Regime::Surjective) next.last_a_vec += sigma * next.last_u_n;
  next.last_dxn_norm = dxn.norm();

  double dx2 = 0.0;
  for (int i = 0; i < n; ++i)
    dx2 += (next.x.blocks[i] - state.x.blocks[i]).squaredNorm();
  next.last_step_residual = dz.norm() + beta * std::sqrt(dx2);
  next.has_caches = true;
  return next;
}

double objective_at_q(const CompositeProblem& prob, const SolverState& state) {
  double v = 0.0;
  for (int i = 0; i < prob.n - 1; ++i)
    v += prob.smooth[i].value(state.x.blocks[i]) + prob.prox[i].value(state.x.blocks[i]);
  v += prob.smooth[prob.n - 1].value(state.x_breve_n) +
       prob.prox[prob.n - 1].value(state.x_breve_n);
  return v;
}

double feasibility_at_q(const CompositeProblem& prob, const SolverState& state) {
  Vec shift = prob.coupling.blocks[prob.n - 1].apply(
      Vec(state.x_breve_n - state.x.blocks[prob.n - 1]));
  return (state.residual + shift).norm();
}

double crit_bound(const CompositeProblem& prob, const SolverState& prev,
                  const SolverState& next, const RegimeParams& params) {
  const int n = prob.n;
  const double beta = prev.beta;
  const double sigma = params.sigma;
  const Vec z_t = prev.z();
  const Vec z_t1 = next.z();
  const Vec dz = z_t1 - z_t;

  double total = feasibility_at_q(prob, next);

  if (n > 1) {
    // Suffix sums S_i = sum_{j >= i} A_j (x_j^{t+1} - x_j^t).
    std::vector<Vec> suffix(n + 1);
    suffix[n] = Vec::Zero(prob.m);
    for (int j = n - 1; j >= 0; --j)
      suffix[j] = suffix[j + 1] + prob.coupling.blocks[j].apply(
                                      Vec(next.x.blocks[j] - prev.x.blocks[j]));
    for (int i = 0; i < n - 1; ++i) {
      const double Li = block_L(prob, beta, i);
      Vec u_i = params.theta1 * Li * (next.x.blocks[i] - prev.x.blocks[i]) -
                beta * apply_adjoint_block(prob.coupling, i, suffix[i]);
      // Certified subgradient of h_i at x_i^{t+1}, rearranged first-order identity.
      Vec s_i = -u_i - apply_adjoint_block(prob.coupling, i, z_t) -
                apply_adjoint_block(prob.coupling, i, dz) / sigma -
                prob.smooth[i].gradient(prev.x.blocks[i]);
      total += (s_i + prob.smooth[i].gradient(next.x.blocks[i]) +
                apply_adjoint_block(prob.coupling, i, z_t1))
                   .norm();
    }
  }

  // Last block: rho (c - x_n^{t+1}) is an exact subgradient of h_n at x_breve.
  total += (next.last_s_n + prob.smooth[n - 1].gradient(next.x_breve_n) +
            apply_adjoint_block(prob.coupling, n - 1, z_t1))
               .norm();
  return total;
}

double potential_theta(const CompositeProblem& prob, const SolverState& state,
                       const RegimeParams& params) {
  if (!state.has_caches)
    throw std::invalid_argument("potential_theta: defined from t >= 1 (caches missing)");
  const int n = prob.n;
  const double lam_down = prob.spectral.lambda_down;
  const Vec z = state.z();

  // L(x, z; beta, mu) with the smoothed last block.
  double val = 0.0;
  for (int i = 0; i < n; ++i) val += prob.smooth[i].value(state.x.blocks[i]);
  for (int i = 0; i < n - 1; ++i) val += prob.prox[i].value(state.x.blocks[i]);
  {
    const Vec& xn = state.x.blocks[n - 1];
    Vec p = prob.prox[n - 1].prox(xn, state.mu);
    val += prob.prox[n - 1].value(p) + (p - xn).squaredNorm() / (2.0 * state.mu);
  }
  val += state.residual.dot(z) + 0.5 * state.beta * state.residual.squaredNorm();

  double theta0 = val + 0.5 * prob.C_h * state.mu;
  const bool bi = params.regime == Regime::Bijective;
  const double a = (bi ? 1.0 : 2.0) * params.omega * params.sigma2 / lam_down;
  const double b = (bi ? 3.0 : 6.0) * params.omega * params.sigma1 / lam_down;
  const double A_t = state.last_a_vec.squaredNorm() / state.beta;
  const double u_scale = bi ? 1.0 : params.sigma;
  const double base = prob.smooth[n - 1].lipschitz * state.last_dxn_norm +
                      u_scale * state.last_u_n.norm();
  const double B_t = base * base / state.beta;
  return theta0 + a * A_t + b * B_t;
}

PotentialValue potential_value(const CompositeProblem& prob, const SolverState& prev,
                               const SolverState& next, const RegimeParams& params,
                               const IpdsSchedule& sched) {
  if (!prev.has_caches)
    throw std::invalid_argument("potential_value: defined from t >= 1 (caches missing)");
  if (next.t != prev.t + 1)
    throw std::invalid_argument("potential_value: states must be consecutive");

  PotentialValue out;
  out.theta = potential_theta(prob, prev, params);

  const bool bi = params.regime == Regime::Bijective;
  const double b = (bi ? 3.0 : 6.0) * params.omega * params.sigma1 /
                   prob.spectral.lambda_down;
  const double ratio = beta_at(sched, prev.t) / beta_at(sched, prev.t - 1);  // mu^{t-1}/mu^t
  out.u = prob.C_h * prob.C_h * (b / prev.beta) * (ratio - 1.0) * (ratio - 1.0);

  double e = 0.0;
  for (int i = 0; i < prob.n - 1; ++i)
    e += params.eps1 * block_L(prob, prev.beta, i) *
         (next.x.blocks[i] - prev.x.blocks[i]).squaredNorm();
  e += params.eps2 * block_L(prob, prev.beta, prob.n - 1) *
       (next.x.blocks[prob.n - 1] - prev.x.blocks[prob.n - 1]).squaredNorm();
  e += params.eps3 / prev.beta * (next.z() - prev.z()).squaredNorm();
  out.e_next = e;
  return out;
}

SolveResult solve(const CompositeProblem& prob, const RegimeParams& params,
                  const IpdsSchedule& sched, const StoppingRule& rule,
                  long record_every, bool record_theta) {
  rule.validate();
  if (record_every < 1) record_every = 1;

  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&t0]() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  SolverState state = make_initial_state(prob, sched);
  SolverState prev_of_last = state;

  SolveResult out;
  out.best = state;
  out.status = SolveStatus::IterBudget;

  auto make_record = [&](const SolverState& p, const SolverState& s) {
    TraceRecord rec;
    rec.t = s.t;
    rec.wall_time = elapsed();
    rec.objective = objective_at_q(prob, s);
    rec.feasibility = feasibility_at_q(prob, s);
    rec.crit_bound = crit_bound(prob, p, s, params);
    rec.step_residual = s.last_step_residual;
    if (record_theta && s.has_caches) rec.theta = potential_theta(prob, s, params);
    rec.beta = s.beta;
    rec.mu = s.mu;
    return rec;
  };

  long iter = 0;
  while (true) {
    if (rule.max_iter >= 0 && iter >= rule.max_iter) {
      out.status = SolveStatus::IterBudget;
      break;
    }
    if (rule.max_wall_time >= 0 && elapsed() > rule.max_wall_time) {
      out.status = SolveStatus::TimeBudget;
      break;
    }
    SolverState next = step(prob, state, params, sched);
    ++iter;
    const double res = next.last_step_residual;
    if (res < out.best_residual) {
      out.best_residual = res;
      out.best = next;
      out.best_t = state.t;
    }
    const bool reached = rule.epsilon > 0.0 && res <= rule.epsilon;
    if (next.t % record_every == 0 || reached)
      out.trace.push_back(make_record(state, next));
    prev_of_last = std::move(state);
    state = std::move(next);
    if (reached) {
      out.status = SolveStatus::Tolerance;
      break;
    }
  }

  if (state.t > 0 && (out.trace.empty() || out.trace.back().t != state.t))
    out.trace.push_back(make_record(prev_of_last, state));
  out.final_state = std::move(state);
  return out;
}

}  // namespace ipds
