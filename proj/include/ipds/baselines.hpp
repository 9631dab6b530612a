#pragma once

#include "ipds/solver.hpp"

namespace ipds {

/// Comparison-solver settings. The update rules for SubGrad/SPGM follow the
/// usual recipes for their method class (diminishing-step projected subgradient;
/// variable-smoothing proximal gradient); stepsizes are exposed rather than
/// taken from any reference implementation.
struct BaselineConfig {
  enum class Method { SubGrad, SPGM, RADMM };
  Method method = Method::SubGrad;

  double step0 = 1.0;
  double decay = 0.5;  // SubGrad stepsize exponent: step0 / (t+1)^decay

  double spgm_mu0 = 0.0;            // 0: defaults to 1 / max(1, C_h)
  double spgm_mu_decay = 1.0 / 3.0;  // mu_t = mu0 (t+1)^-decay

  double beta_fixed = 0.0;  // RADMM penalty (e.g. 100 rho)
  double mu_fixed = 0.0;    // RADMM smoothing; 0: 1/(lambda_up * 0.25 * beta_fixed)
  double theta1 = 1.01;
  double theta2 = 1.01;
};

struct StructureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BaselineResult {
  std::vector<TraceRecord> trace;
  SolveStatus status = SolveStatus::IterBudget;
  Vec v_final;
  BlockVector x_final;  // per-block final point ([v, v] for the reduced methods)
  double final_objective = std::numeric_limits<double>::quiet_NaN();
};

/// Projected subgradient on the constraint-eliminated single-variable form
/// (requires the two-block identity coupling x_1 = x_2, b = 0).
BaselineResult run_subgrad(const CompositeProblem& prob, const BaselineConfig& cfg,
                           const StoppingRule& rule, long record_every = 1);

/// Smoothing proximal gradient on the same reduced form: gradient of
/// f + h_2(.; mu_t) with mu_t ~ t^{-1/3}, then projection on the constraint term.
BaselineResult run_spgm(const CompositeProblem& prob, const BaselineConfig& cfg,
                        const StoppingRule& rule, long record_every = 1);

/// Fixed-penalty, fixed-smoothing ADMM: the IPDS loop with beta^t == beta_fixed,
/// mu^t == mu_fixed and sigma = 1. Reuses the solver internals verbatim.
BaselineResult run_radmm(const CompositeProblem& prob, const BaselineConfig& cfg,
                         const StoppingRule& rule, long record_every = 1);

}  // namespace ipds
