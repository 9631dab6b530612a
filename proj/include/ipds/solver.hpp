#pragma once

#include "ipds/linblock.hpp"
#include "ipds/moreau.hpp"
#include "ipds/schedule.hpp"
#include "ipds/terms.hpp"

#include <optional>
#include <vector>

namespace ipds {

/// A full Problem instance: n blocks (f_i, h_i, A_i) with sum_i A_i x_i = b.
/// The last block's h must be convex Lipschitz (C_h) and f_n gradient-bounded
/// (C_f); allow_nonconvex_last is the explicit escape hatch for empirical runs
/// outside the certified setting (e.g. l0-regularized PCA).
struct CompositeProblem {
  int n = 0;
  int m = 0;
  std::vector<SmoothTerm> smooth;
  std::vector<ProxTerm> prox;
  BlockOperator coupling;
  Vec rhs;
  SpectralInfo spectral;
  double C_h = 0.0;
  double C_f = 0.0;
  bool allow_nonconvex_last = false;
  std::optional<BlockVector> initial_x;
  std::optional<Vec> initial_z;

  int dim(int i) const { return coupling.blocks[i].cols(); }
  void validate() const;
};

/// Iterate of Algorithm IPDS-ADMM. Only the rescaled dual z_hat = z / sqrt(beta)
/// is stored; z is reconstructed on demand. The trailing caches (valid once
/// has_caches, i.e. t >= 1) carry what the potential monitor and the certified
/// stationarity bound need from the step that produced this state.
struct SolverState {
  BlockVector x;
  Vec x_breve_n;
  Vec z_hat;
  long t = 0;
  double beta = 0.0;
  double mu = 0.0;
  Vec residual;  // A x^t - b, incrementally maintained

  bool has_caches = false;
  Vec last_u_n;             // u_n^t = H^{t-1}(x_n^t - x_n^{t-1})
  Vec last_w_n;             // w_n^t = grad h_n(x_n^t; mu^{t-1}) + grad f_n(x_n^{t-1})
  Vec last_s_n;             // certified subgradient of h_n at x_breve_n
  Vec last_a_vec;           // regime-dependent a^t
  double last_dxn_norm = 0.0;
  double last_step_residual = 0.0;  // ||z^t - z^{t-1}|| + beta^{t-1} ||x^t - x^{t-1}||

  Vec z() const { return Vec(std::sqrt(beta) * z_hat); }
};

struct DivergenceError : std::runtime_error {
  int block_index;
  long iteration;
  DivergenceError(int block, long t, const std::string& what)
      : std::runtime_error(what), block_index(block), iteration(t) {}
};

struct StoppingRule {
  double epsilon = 0.0;
  long max_iter = -1;         // < 0: unbounded
  double max_wall_time = -1;  // seconds; < 0: unbounded
  void validate() const;
};

struct TraceRecord {
  long t = 0;
  double wall_time = 0.0;
  double objective = 0.0;
  double feasibility = 0.0;
  double crit_bound = std::numeric_limits<double>::quiet_NaN();
  double step_residual = std::numeric_limits<double>::quiet_NaN();
  double theta = std::numeric_limits<double>::quiet_NaN();
  double beta = std::numeric_limits<double>::quiet_NaN();
  double mu = std::numeric_limits<double>::quiet_NaN();
};

enum class SolveStatus { Tolerance, IterBudget, TimeBudget };

struct SolveResult {
  SolverState best;  // post-step state of the smallest-residual transition
  SolverState final_state;
  std::vector<TraceRecord> trace;
  SolveStatus status = SolveStatus::IterBudget;
  double best_residual = std::numeric_limits<double>::infinity();
  long best_t = 0;
};

SolverState make_initial_state(const CompositeProblem& prob, const IpdsSchedule& sched);

/// Smooth part G(x, z; beta) = sum_i f_i(x_i) + <Ax - b, z> + (beta/2)||Ax - b||^2.
double augmented_smooth_value(const CompositeProblem& prob, const BlockVector& x,
                              const Vec& z, double beta);

/// grad_{x_i} G at the mixed point (already-updated blocks < i, stale blocks >= i).
Vec partial_gradient(const CompositeProblem& prob, const BlockVector& x_mixed,
                     const Vec& z, double beta, int i);

/// One full sweep S1-S6 of Algorithm IPDS-ADMM (rescaled-multiplier form).
SolverState step(const CompositeProblem& prob, const SolverState& state,
                 const RegimeParams& params, const IpdsSchedule& sched);

SolveResult solve(const CompositeProblem& prob, const RegimeParams& params,
                  const IpdsSchedule& sched, const StoppingRule& rule,
                  long record_every = 1, bool record_theta = false);

/// Composite objective sum_i f_i + h_i at q = (x_1, ..., x_{n-1}, x_breve_n).
double objective_at_q(const CompositeProblem& prob, const SolverState& state);
/// ||A q - b|| at the same point.
double feasibility_at_q(const CompositeProblem& prob, const SolverState& state);

/// Certified upper bound on Crit(q^{t+1}, z^{t+1}) =
/// ||A q - b|| + sum_i dist(0, grad f_i + subdiff h_i + A_i^T z), evaluated with
/// the first-order-identity subgradient certificates of the two states.
double crit_bound(const CompositeProblem& prob, const SolverState& prev,
                  const SolverState& next, const RegimeParams& params);

struct PotentialValue {
  double theta;   // Theta^t at prev
  double u;       // U^t     tail term
  double e_next;  // E^{t+1} weighted squared step
};

/// Potential-function monitor. Needs prev.has_caches (defined from t >= 1).
PotentialValue potential_value(const CompositeProblem& prob, const SolverState& prev,
                               const SolverState& next, const RegimeParams& params,
                               const IpdsSchedule& sched);

/// Theta^t of a single state (same quantity potential_value reports for prev).
double potential_theta(const CompositeProblem& prob, const SolverState& state,
                       const RegimeParams& params);

}  // namespace ipds
