#include "ipds/solver.hpp"

#include "ipds/problems.hpp"
#include "oracles.hpp"
#include "toys.hpp"

#include <doctest.h>

#include <bit>
#include <random>

using namespace ipds;

namespace {

CompositeProblem single_block(SmoothTerm f, ProxTerm h, int dim, Vec b, double c_h) {
  CompositeProblem p;
  p.n = 1;
  p.m = dim;
  p.coupling.output_dim = dim;
  p.coupling.blocks.push_back(LinearMap::identity(dim));
  p.rhs = std::move(b);
  p.smooth.push_back(std::move(f));
  p.prox.push_back(std::move(h));
  p.C_h = c_h;
  p.C_f = 100.0;
  p.spectral.lambda_up = 1.0;
  p.spectral.lambda_down = 1.0;
  p.spectral.lambda_down_prime = 1.0;
  p.spectral.kappa = 1.0;
  p.spectral.op_norms = {1.0};
  return p;
}

RegimeParams stable_bi_params(double xi = 0.5, double delta = 0.05) {
  SelectOverrides ov;
  ov.xi = xi;
  ov.delta = delta;
  ov.sigma = 1.0;
  return select_params(Regime::Bijective, 1.0, 1.0, 1.0, ov);
}

}  // namespace

TEST_CASE("partial_gradient: degenerate cases") {
  std::mt19937_64 rng(31);
  CompositeProblem p = toys::bi_toy(5);
  p.smooth[0] = SmoothTerm::zero();
  p.smooth[1] = SmoothTerm::zero();
  BlockVector x{{oracle::randn_vec(4, rng), oracle::randn_vec(4, rng)}};
  p.rhs.setZero();
  CHECK(partial_gradient(p, x, Vec::Zero(4), 0.0, 0).norm() == 0.0);
  CHECK(partial_gradient(p, x, Vec::Zero(4), 0.0, 1).norm() == 0.0);

  CompositeProblem q =
      single_block(SmoothTerm::zero(), zero_term(), 3, Vec::Zero(3), 0.0);
  Vec xv = oracle::randn_vec(3, rng);
  Vec g = partial_gradient(q, BlockVector{{xv}}, Vec::Zero(3), 1.0, 0);
  CHECK((g - xv).norm() <= 1e-15);
}

TEST_CASE("partial_gradient matches finite differences of G") {
  std::mt19937_64 rng(32);
  CompositeProblem p = toys::su_toy(4);
  Vec z = oracle::randn_vec(3, rng);
  const double beta = 2.7;
  BlockVector x{{oracle::randn_vec(4, rng), oracle::randn_vec(5, rng)}};
  for (int i = 0; i < 2; ++i) {
    Vec g = partial_gradient(p, x, z, beta, i);
    auto g_of = [&](const Vec& xi) {
      BlockVector xm = x;
      xm.blocks[i] = xi;
      return augmented_smooth_value(p, xm, z, beta);
    };
    Vec fd = oracle::central_diff(g_of, x.blocks[i]);
    CHECK((g - fd).norm() <= 1e-5 * (1.0 + fd.norm()));
  }
}

TEST_CASE("step: nonnegative single block contracts to feasibility") {
  // n = 1, A = I, b = 0, f = 0, h = indicator of the nonnegative orthant.
  // C_h is nominal; no potential diagnostics are evaluated here.
  CompositeProblem p =
      single_block(SmoothTerm::zero(), nonneg_indicator(), 3, Vec::Zero(3), 1.0);
  p.initial_x = BlockVector{{Vec::Constant(3, 2.0)}};
  RegimeParams params = stable_bi_params();
  params.theta2 = 1.01;
  fill_derived_constants(params, 1.0);
  IpdsSchedule sched = IpdsSchedule::checked(5.0, 0.5, 1.0 / 3.0, 0.05, 1.0, 0.0);
  SolverState s = make_initial_state(p, sched);
  for (int t = 0; t < 400; ++t) {
    s = step(p, s, params, sched);
    CHECK(s.x_breve_n.minCoeff() >= -1e-15);
  }
  CHECK(feasibility_at_q(p, s) <= 1e-6);
}

TEST_CASE("step: hand-derived scalar iteration") {
  // f = x^2/2, h = 0, A = 1, b = 0, z = 0, beta = 1. The one-block sweep with
  // prox weight rho = theta2 * (L + beta) and theta2 = theta1 * (1 + 1) gives
  //   x+ = x - 2x/rho = x - x/(theta1 * (1 + 1)).
  const double theta1 = 1.01;
  SmoothTerm f;
  f.value = [](const Vec& x) { return 0.5 * x.squaredNorm(); };
  f.gradient = [](const Vec& x) { return x; };
  f.lipschitz = 1.0;
  CompositeProblem p = single_block(f, zero_term(), 1, Vec::Zero(1), 0.0);
  const double x0 = 0.8;
  p.initial_x = BlockVector{{Vec::Constant(1, x0)}};

  RegimeParams params;
  params.regime = Regime::Bijective;
  params.sigma = 1.0;
  params.theta1 = theta1;
  params.theta2 = theta1 * (1.0 + 1.0);
  params.xi = 0.0;
  params.delta = 0.9;  // mu plays no role with h = 0
  fill_derived_constants(params, 1.0);
  IpdsSchedule sched{1.0, 0.0, 1.0 / 3.0, 0.9, 1.0};

  SolverState s = make_initial_state(p, sched);
  SolverState nx = step(p, s, params, sched);
  const double want = x0 - x0 / (theta1 * (1.0 + 1.0));
  CHECK(nx.x.blocks[0][0] == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("step/solve: two-block toy against the feasible-set grid search") {
  // d = m = 2, A = (-I, I), h_1 pins block 1 to the unit circle, f_2 quadratic,
  // h_2 = l1. The feasible set is x_2 = x_1 on the circle: one angle.
  std::mt19937_64 rng(33);
  CompositeProblem p;
  p.n = 2;
  p.m = 2;
  p.coupling.output_dim = 2;
  p.coupling.blocks.push_back(LinearMap::scaled_identity(2, -1.0));
  p.coupling.blocks.push_back(LinearMap::identity(2));
  p.rhs = Vec::Zero(2);
  p.smooth.push_back(SmoothTerm::zero());
  Vec center(2);
  center << 1.3, -0.4;
  p.smooth.push_back(toys::quadratic(center, 1.0));
  p.prox.push_back(orthogonality_indicator(2, 1));
  p.prox.push_back(l1_term(0.3, 2));
  p.C_h = *p.prox.back().lipschitz_const;
  p.C_f = 10.0;
  p.spectral.lambda_up = p.spectral.lambda_down = p.spectral.lambda_down_prime = 1.0;
  p.spectral.kappa = 1.0;
  p.spectral.op_norms = {1.0, 1.0};
  Vec y0(2);
  y0 << 0.0, 1.0;
  p.initial_x = BlockVector{{y0, Vec(Vec::Zero(2))}};

  RegimeParams params = stable_bi_params(0.5, 0.05);
  IpdsSchedule sched = IpdsSchedule::checked(
      p.smooth[1].lipschitz / params.delta, params.xi, params.p, params.delta, 1.0,
      p.smooth[1].lipschitz);
  StoppingRule rule;
  rule.max_iter = 500;
  SolveResult res = solve(p, params, sched, rule, 50);
  CHECK(res.final_state.last_step_residual < 1e-3);

  auto objective_angle = [&](double th) {
    Vec u(2);
    u << std::cos(th), std::sin(th);
    return p.smooth[1].value(u) + p.prox[1].value(u);
  };
  double best = objective_angle(0.0);
  for (double th = 0.0; th < 6.2832; th += 1e-4)
    best = std::min(best, objective_angle(th));
  const Vec& y_final = res.final_state.x.blocks[0];
  double got = p.smooth[1].value(y_final) + p.prox[1].value(y_final);
  CHECK(got == doctest::Approx(best).epsilon(1e-2));
}

TEST_CASE("solve: already-critical start terminates immediately") {
  std::mt19937_64 rng(34);
  Vec a = oracle::randn_vec(3, rng);
  CompositeProblem p =
      single_block(toys::quadratic(Vec(Vec::Zero(3)), 1.0), zero_term(), 3,
                   Vec::Zero(3), 0.0);
  // stationary feasible start: x* = 0 = b, exact multiplier z* = -grad f(0) = 0.
  // make it nontrivial: f = 0.5||x - a||^2, grad f(0) = -a, so z* = a.
  p.smooth[0] = toys::quadratic(a, 1.0);
  p.initial_x = BlockVector{{Vec(Vec::Zero(3))}};
  p.initial_z = a;
  RegimeParams params = stable_bi_params();
  IpdsSchedule sched = IpdsSchedule::checked(25.0, 0.5, 1.0 / 3.0, 0.05, 1.0, 1.0);
  StoppingRule rule;
  rule.epsilon = 1e-8;
  rule.max_iter = 100;
  SolveResult res = solve(p, params, sched, rule);
  CHECK(res.status == SolveStatus::Tolerance);
  CHECK(res.final_state.t == 1);
  CHECK(res.best_residual <= 1e-10);
  CHECK(res.trace.size() == 1);
}

TEST_CASE("solve: step-residual trend on sparse PCA decreases after smoothing") {
  // Frozen empirical instance (data seed 0): the 50-iteration window means of
  // the step residual are nonincreasing across all 2000 iterations.
  Mat d = synth_data("randn", 200, 50, 0);
  SparsePcaSpec spec;
  spec.D = d;
  spec.r = 5;
  spec.rho = 10.0;
  CompositeProblem p = build_sparse_pca(spec, 1);
  RegimeParams params = stable_bi_params();
  IpdsSchedule sched = IpdsSchedule::checked(default_sparse_pca_beta0(spec.rho),
                                             params.xi, params.p, params.delta, 1.0,
                                             p.smooth[1].lipschitz);
  StoppingRule rule;
  rule.max_iter = 2000;
  SolveResult res = solve(p, params, sched, rule, 1);
  REQUIRE(res.trace.size() == 2000);
  std::vector<double> window_means;
  for (size_t w = 0; w + 50 <= 2000; w += 50) {
    double s = 0.0;
    for (size_t i = w; i < w + 50; ++i) s += res.trace[i].step_residual;
    window_means.push_back(s / 50.0);
  }
  int increases = 0;
  for (size_t k = 1; k < window_means.size(); ++k)
    if (window_means[k] > window_means[k - 1] * (1.0 + 1e-9)) ++increases;
  CHECK(increases == 0);
  CHECK(window_means.back() < 1e-3 * window_means.front());
}

TEST_CASE("crit_bound: zero at a stationary feasible point with exact multiplier") {
  std::mt19937_64 rng(35);
  Vec a = oracle::randn_vec(3, rng);
  CompositeProblem p = single_block(toys::quadratic(a, 1.0), zero_term(), 3,
                                    Vec::Zero(3), 0.0);
  p.initial_x = BlockVector{{Vec(Vec::Zero(3))}};
  p.initial_z = a;
  RegimeParams params = stable_bi_params();
  IpdsSchedule sched = IpdsSchedule::checked(25.0, 0.5, 1.0 / 3.0, 0.05, 1.0, 1.0);
  SolverState s0 = make_initial_state(p, sched);
  SolverState s1 = step(p, s0, params, sched);
  CHECK(crit_bound(p, s0, s1, params) <= 1e-10);
}

TEST_CASE("crit_bound: smooth single block reduces to the plain residuals") {
  std::mt19937_64 rng(36);
  CompositeProblem p = single_block(toys::quadratic(oracle::randn_vec(3, rng), 2.0),
                                    zero_term(), 3, oracle::randn_vec(3, rng), 0.0);
  p.initial_x = BlockVector{{oracle::randn_vec(3, rng)}};
  RegimeParams params = stable_bi_params();
  IpdsSchedule sched = IpdsSchedule::checked(60.0, 0.5, 1.0 / 3.0, 0.05, 1.0, 2.0);
  SolverState s = make_initial_state(p, sched);
  for (int t = 0; t < 5; ++t) {
    SolverState nx = step(p, s, params, sched);
    Vec z1 = nx.z();
    double direct = nx.residual.norm() +
                    (p.smooth[0].gradient(nx.x_breve_n) + z1).norm();
    CHECK(crit_bound(p, s, nx, params) == doctest::Approx(direct).epsilon(1e-12));
    s = std::move(nx);
  }
}

TEST_CASE("crit_bound dominates the exact l1 subdifferential distance") {
  std::mt19937_64 rng(37);
  const double rho = 0.7;
  CompositeProblem p = single_block(toys::quadratic(oracle::randn_vec(3, rng), 1.0),
                                    l1_term(rho, 3), 3, oracle::randn_vec(3, rng),
                                    rho * std::sqrt(3.0));
  p.initial_x = BlockVector{{oracle::randn_vec(3, rng)}};
  RegimeParams params = stable_bi_params();
  IpdsSchedule sched = IpdsSchedule::checked(20.0, 0.5, 1.0 / 3.0, 0.05, 1.0, 1.0);
  SolverState s = make_initial_state(p, sched);
  for (int t = 0; t < 50; ++t) {
    SolverState nx = step(p, s, params, sched);
    Vec z1 = nx.z();
    Vec g = p.smooth[0].gradient(nx.x_breve_n) + z1;
    double exact =
        feasibility_at_q(p, nx) + oracle::l1_dist_exact(g, nx.x_breve_n, rho);
    CHECK(crit_bound(p, s, nx, params) >= exact - 1e-10);
    s = std::move(nx);
  }
}

TEST_CASE("potential_value: static iterate gives E = 0 and B = 0") {
  std::mt19937_64 rng(38);
  Vec a = oracle::randn_vec(3, rng);
  CompositeProblem p = single_block(toys::quadratic(a, 1.0), zero_term(), 3,
                                    Vec::Zero(3), 0.0);
  p.initial_x = BlockVector{{Vec(Vec::Zero(3))}};
  p.initial_z = a;
  RegimeParams params = stable_bi_params();
  params.xi = 0.0;  // frozen schedule: U = 0 as well
  IpdsSchedule sched{25.0, 0.0, 1.0 / 3.0, 0.05, 1.0};
  SolverState s0 = make_initial_state(p, sched);
  SolverState s1 = step(p, s0, params, sched);
  SolverState s2 = step(p, s1, params, sched);
  CHECK(s1.last_dxn_norm == 0.0);
  CHECK(s1.last_u_n.norm() == 0.0);
  PotentialValue pv = potential_value(p, s1, s2, params, sched);
  CHECK(pv.e_next == 0.0);
  CHECK(pv.u == 0.0);
  CHECK(std::isfinite(pv.theta));
}

TEST_CASE("potential_theta: the half C_h mu term by direct arithmetic") {
  CompositeProblem p = toys::bi_toy(9);
  RegimeParams params = toys::bi_toy_params();
  IpdsSchedule sched = toys::bi_toy_schedule(p, params, 10.0);
  SolverState s0 = make_initial_state(p, sched);
  SolverState s1 = step(p, s0, params, sched);

  const Vec z = s1.z();
  double l_val = augmented_smooth_value(p, s1.x, z, s1.beta);
  l_val += p.prox[0].value(s1.x.blocks[0]);
  MoreauEnvelope env = make_envelope(p.prox[1], s1.mu);
  l_val += envelope_value(env, s1.x.blocks[1]);

  const double lam = p.spectral.lambda_down;
  const double a_c = params.omega * params.sigma2 / lam;
  const double b_c = 3.0 * params.omega * params.sigma1 / lam;
  const double a_t = s1.last_a_vec.squaredNorm() / s1.beta;
  const double base =
      p.smooth[1].lipschitz * s1.last_dxn_norm + s1.last_u_n.norm();
  const double b_t = base * base / s1.beta;

  double expect_half_term = potential_theta(p, s1, params) - (l_val + a_c * a_t + b_c * b_t);
  CHECK(expect_half_term == doctest::Approx(0.5 * p.C_h * s1.mu).epsilon(1e-9));
}

TEST_CASE("potential decrease E <= dTheta + U on the certified bijective toy") {
  CompositeProblem p = toys::bi_toy(1);
  RegimeParams params = toys::bi_toy_params();
  IpdsSchedule sched = toys::bi_toy_schedule(p, params, 10.0);
  std::vector<SolverState> st;
  st.push_back(make_initial_state(p, sched));
  for (int t = 0; t < 102; ++t) st.push_back(step(p, st.back(), params, sched));
  for (int t = 1; t <= 100; ++t) {
    PotentialValue pv = potential_value(p, st[t], st[t + 1], params, sched);
    double theta_next = potential_theta(p, st[t + 1], params);
    CHECK(pv.e_next <= pv.theta - theta_next + pv.u + 1e-8 * std::abs(pv.theta));
  }
}

TEST_CASE("potential_value requires caches") {
  CompositeProblem p = toys::bi_toy(2);
  RegimeParams params = toys::bi_toy_params();
  IpdsSchedule sched = toys::bi_toy_schedule(p, params, 10.0);
  SolverState s0 = make_initial_state(p, sched);
  SolverState s1 = step(p, s0, params, sched);
  CHECK_THROWS_AS((void)potential_value(p, s0, s1, params, sched), std::invalid_argument);
}

TEST_CASE("surrogate decrease at every prox update") {
  CompositeProblem p = toys::su_toy(6);
  RegimeParams params = toys::su_toy_params(p);
  IpdsSchedule sched = toys::su_toy_schedule(p, params);
  SolverState s = make_initial_state(p, sched);
  for (int t = 0; t < 20; ++t) {
    SolverState nx = step(p, s, params, sched);
    for (int i = 0; i < p.n - 1; ++i) {
      BlockVector mixed = s.x;
      for (int j = 0; j < i; ++j) mixed.blocks[j] = nx.x.blocks[j];
      Vec g = partial_gradient(p, mixed, s.z(), s.beta, i);
      const double li =
          p.smooth[i].lipschitz + s.beta * p.spectral.op_norms[i] * p.spectral.op_norms[i];
      Vec dxi = nx.x.blocks[i] - s.x.blocks[i];
      double lhs = p.prox[i].value(nx.x.blocks[i]) + dxi.dot(g) +
                   0.5 * params.theta1 * li * dxi.squaredNorm();
      double rhs = p.prox[i].value(s.x.blocks[i]);
      if (std::isfinite(rhs)) CHECK(lhs <= rhs + 1e-9 * (1.0 + std::abs(rhs)));
    }
    s = std::move(nx);
  }
}

TEST_CASE("rescaled dual reconstructs the raw multiplier update") {
  CompositeProblem p = toys::bi_toy(10);
  RegimeParams params = toys::bi_toy_params();
  IpdsSchedule sched = toys::bi_toy_schedule(p, params, 5.0);
  SolverState s = make_initial_state(p, sched);
  for (int t = 0; t < 100; ++t) {
    SolverState nx = step(p, s, params, sched);
    Vec dz = nx.z() - s.z();
    Vec want = params.sigma * s.beta * (apply(p.coupling, nx.x) - p.rhs);
    CHECK((dz - want).norm() <= 1e-10 * (1.0 + want.norm()));
    s = std::move(nx);
  }
}

TEST_CASE("determinism: identical runs produce bit-identical traces") {
  auto run = []() {
    CompositeProblem p = toys::su_toy(12);
    RegimeParams params = toys::su_toy_params(p);
    IpdsSchedule sched = toys::su_toy_schedule(p, params);
    StoppingRule rule;
    rule.max_iter = 200;
    return solve(p, params, sched, rule, 1, true);
  };
  SolveResult r1 = run();
  SolveResult r2 = run();
  REQUIRE(r1.trace.size() == r2.trace.size());
  auto bits = [](double x) { return std::bit_cast<std::uint64_t>(x); };
  for (size_t i = 0; i < r1.trace.size(); ++i) {
    CHECK(r1.trace[i].t == r2.trace[i].t);
    CHECK(bits(r1.trace[i].objective) == bits(r2.trace[i].objective));
    CHECK(bits(r1.trace[i].feasibility) == bits(r2.trace[i].feasibility));
    CHECK(bits(r1.trace[i].crit_bound) == bits(r2.trace[i].crit_bound));
    CHECK(bits(r1.trace[i].step_residual) == bits(r2.trace[i].step_residual));
    CHECK(bits(r1.trace[i].theta) == bits(r2.trace[i].theta));
    CHECK(bits(r1.trace[i].beta) == bits(r2.trace[i].beta));
    CHECK(bits(r1.trace[i].mu) == bits(r2.trace[i].mu));
  }
}

TEST_CASE("divergence raises a structured error") {
  // Pinned scalar first block with an over-relaxed dual and a small theta2 is
  // linearly unstable; the solver must fail loudly, not silently.
  CompositeProblem p;
  p.n = 2;
  p.m = 1;
  p.coupling.output_dim = 1;
  p.coupling.blocks.push_back(LinearMap::scaled_identity(1, -1.0));
  p.coupling.blocks.push_back(LinearMap::identity(1));
  p.rhs = Vec::Zero(1);
  p.smooth.push_back(SmoothTerm::zero());
  p.smooth.push_back(SmoothTerm::zero());
  p.prox.push_back(orthogonality_indicator(1, 1));  // pins block 1 to {+-1}
  p.prox.push_back(l1_term(1.0, 1));
  p.C_h = 1.0;
  p.C_f = 1.0;
  p.spectral.lambda_up = p.spectral.lambda_down = p.spectral.lambda_down_prime = 1.0;
  p.spectral.kappa = 1.0;
  p.spectral.op_norms = {1.0, 1.0};
  // Start far out so the unstable mode overflows within a few sweeps.
  p.initial_x = BlockVector{{Vec(Vec::Ones(1)), Vec(Vec::Constant(1, 1e300))}};

  RegimeParams params = experiment_defaults(1.0);  // theta2 = 0.6, sigma = 1.618
  IpdsSchedule sched{50.0, 0.5, 1.0 / 3.0, 0.25, 1.0};
  StoppingRule rule;
  rule.max_iter = 500;
  CHECK_THROWS_AS((void)solve(p, params, sched, rule), DivergenceError);
}

TEST_CASE("solve records the best-residual iterate") {
  CompositeProblem p = toys::bi_toy(13);
  RegimeParams params = toys::bi_toy_params();
  IpdsSchedule sched = toys::bi_toy_schedule(p, params, 10.0);
  StoppingRule rule;
  rule.max_iter = 300;
  SolveResult res = solve(p, params, sched, rule);
  double best = std::numeric_limits<double>::infinity();
  for (const TraceRecord& r : res.trace) best = std::min(best, r.step_residual);
  CHECK(res.best_residual == doctest::Approx(best));
  CHECK(res.best.last_step_residual == doctest::Approx(res.best_residual));
}
