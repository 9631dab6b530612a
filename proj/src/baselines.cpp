#include "ipds/baselines.hpp"

#include <chrono>
#include <cmath>

namespace ipds {

namespace {

// The reduced single-variable form exists when the two blocks are coupled by
// unit scaled identities with c2 = -c1 and b = 0, i.e. the constraint is x1 = x2.
void check_reducible(const CompositeProblem& prob) {
  const auto fail = [](const std::string& msg) { throw StructureError("baseline: " + msg); };
  if (prob.n != 2) fail("reduced form needs exactly two blocks");
  if (prob.rhs.norm() != 0.0) fail("reduced form needs b = 0");
  const LinearMap& a1 = prob.coupling.blocks[0];
  const LinearMap& a2 = prob.coupling.blocks[1];
  if (!a1.is_scaled_identity() || !a2.is_scaled_identity())
    fail("reduced form needs identity coupling");
  if (std::abs(a1.identity_scale()) != 1.0 || a2.identity_scale() != -a1.identity_scale())
    fail("reduced form needs A_1 = -A_2 = +-I");
}

struct ReducedLoop {
  const CompositeProblem& prob;
  const StoppingRule& rule;
  long record_every;
  BaselineResult out;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }

  double objective(const Vec& v) const {
    return prob.smooth[0].value(v) + prob.smooth[1].value(v) + prob.prox[0].value(v) +
           prob.prox[1].value(v);
  }

  // Runs v <- update(v, t) until the budget; records the shared trace schema.
  template <typename Update>
  void run(Vec v, Update update, std::function<double(long)> mu_of_t) {
    out.status = SolveStatus::IterBudget;
    long iter = 0;
    Vec v_prev = v;
    long last_recorded = -1;
    while (true) {
      if (rule.max_iter >= 0 && iter >= rule.max_iter) break;
      if (rule.max_wall_time >= 0 && elapsed() > rule.max_wall_time) {
        out.status = SolveStatus::TimeBudget;
        break;
      }
      Vec v_next = update(v, iter);
      ++iter;
      const double res = (v_next - v).norm();
      v_prev = std::move(v);
      v = std::move(v_next);
      const bool reached = rule.epsilon > 0.0 && res <= rule.epsilon;
      if (iter % record_every == 0 || reached) {
        TraceRecord rec;
        rec.t = iter;
        rec.wall_time = elapsed();
        rec.objective = objective(v);
        rec.feasibility = 0.0;  // reduced iterate satisfies the coupling by construction
        rec.step_residual = res;
        if (mu_of_t) rec.mu = mu_of_t(iter - 1);
        out.trace.push_back(rec);
        last_recorded = iter;
      }
      if (reached) {
        out.status = SolveStatus::Tolerance;
        break;
      }
    }
    if (iter > 0 && last_recorded != iter) {
      TraceRecord rec;
      rec.t = iter;
      rec.wall_time = elapsed();
      rec.objective = objective(v);
      rec.feasibility = 0.0;
      rec.step_residual = (v - v_prev).norm();
      if (mu_of_t) rec.mu = mu_of_t(iter - 1);
      out.trace.push_back(rec);
    }
    out.x_final = BlockVector{{v, v}};
    out.v_final = std::move(v);
    out.final_objective = objective(out.v_final);
  }
};

Vec reduced_initial(const CompositeProblem& prob) {
  Vec v = prob.initial_x ? prob.initial_x->blocks[1] : Vec(Vec::Zero(prob.dim(1)));
  return prob.prox[0].prox(v, 1.0);  // start on the constraint set
}

}  // namespace

BaselineResult run_subgrad(const CompositeProblem& prob, const BaselineConfig& cfg,
                           const StoppingRule& rule, long record_every) {
  check_reducible(prob);
  rule.validate();
  if (record_every < 1) record_every = 1;
  ReducedLoop loop{prob, rule, record_every};

  // Subgradient of h_2 taken through its prox at a small fixed smoothing.
  const double mu_sg = 1e-6;
  auto update = [&](const Vec& v, long t) {
    Vec g = prob.smooth[0].gradient(v) + prob.smooth[1].gradient(v) +
            (v - prob.prox[1].prox(v, mu_sg)) / mu_sg;
    const double eta = cfg.step0 / std::pow(static_cast<double>(t + 1), cfg.decay);
    return prob.prox[0].prox(Vec(v - eta * g), eta);
  };
  loop.run(reduced_initial(prob), update, nullptr);
  return std::move(loop.out);
}

BaselineResult run_spgm(const CompositeProblem& prob, const BaselineConfig& cfg,
                        const StoppingRule& rule, long record_every) {
  check_reducible(prob);
  rule.validate();
  if (record_every < 1) record_every = 1;
  ReducedLoop loop{prob, rule, record_every};

  const double ch = prob.prox[1].lipschitz_const.value_or(1.0);
  const double mu0 = cfg.spgm_mu0 > 0.0 ? cfg.spgm_mu0 : 1.0 / std::max(1.0, ch);
  const double lf = prob.smooth[0].lipschitz + prob.smooth[1].lipschitz;
  auto mu_of = [mu0, &cfg](long t) {
    return mu0 * std::pow(static_cast<double>(t + 1), -cfg.spgm_mu_decay);
  };
  auto update = [&](const Vec& v, long t) {
    const double mu = mu_of(t);
    Vec g = prob.smooth[0].gradient(v) + prob.smooth[1].gradient(v) +
            (v - prob.prox[1].prox(v, mu)) / mu;
    const double eta = cfg.step0 / (lf + 1.0 / mu);
    return prob.prox[0].prox(Vec(v - eta * g), eta);
  };
  loop.run(reduced_initial(prob), update, mu_of);
  return std::move(loop.out);
}

BaselineResult run_radmm(const CompositeProblem& prob, const BaselineConfig& cfg,
                         const StoppingRule& rule, long record_every) {
  if (prob.n != 2 || !prob.coupling.blocks[1].is_scaled_identity() ||
      std::abs(prob.coupling.blocks[1].identity_scale()) != 1.0)
    throw StructureError("run_radmm: needs a two-block problem with A_2 = +-I");
  if (!(cfg.beta_fixed > 0.0))
    throw StructureError("run_radmm: beta_fixed must be positive");

  const double lu = prob.spectral.lambda_up;
  const double mu = cfg.mu_fixed > 0.0 ? cfg.mu_fixed : 1.0 / (lu * 0.25 * cfg.beta_fixed);
  const double delta = 1.0 / (lu * cfg.beta_fixed * mu);
  if (!(delta > 0.0 && delta < 1.0))
    throw StructureError("run_radmm: mu_fixed incompatible with beta_fixed "
                         "(implied delta outside (0,1))");

  // Frozen schedule: xi = 0 makes beta^t == beta_fixed and mu^t == mu_fixed.
  IpdsSchedule sched = IpdsSchedule::checked(cfg.beta_fixed, 0.0, 1.0 / 3.0, delta, lu,
                                             prob.smooth[1].lipschitz);
  RegimeParams params;
  params.regime = Regime::Bijective;
  params.sigma = 1.0;
  params.theta1 = cfg.theta1;
  params.theta2 = cfg.theta2;
  params.xi = 0.0;
  params.delta = delta;
  params.theory_certified = false;
  fill_derived_constants(params, prob.spectral.kappa);

  SolveResult res = solve(prob, params, sched, rule, record_every);
  BaselineResult out;
  out.trace = std::move(res.trace);
  out.status = res.status;
  out.v_final = res.final_state.x_breve_n;
  out.x_final = res.final_state.x;
  out.final_objective = objective_at_q(prob, res.final_state);
  return out;
}

}  // namespace ipds
