#include "ipds/schedule.hpp"

#include <cmath>
#include <string>

namespace ipds {

IpdsSchedule IpdsSchedule::checked(double beta0, double xi, double p, double delta,
                                   double lambda_up, double L_n) {
  if (beta0 <= 0.0) throw std::invalid_argument("schedule: beta0 must be positive");
  if (xi < 0.0) throw std::invalid_argument("schedule: xi must be nonnegative");
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("schedule: need p in (0,1)");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("schedule: need delta in (0,1)");
  if (lambda_up <= 0.0) throw std::invalid_argument("schedule: lambda_up must be positive");
  if (beta0 < L_n / (delta * lambda_up))
    throw std::invalid_argument("schedule: beta0 = " + std::to_string(beta0) +
                                " below L_n/(delta lambda_up) = " +
                                std::to_string(L_n / (delta * lambda_up)));
  return IpdsSchedule{beta0, xi, p, delta, lambda_up};
}

double beta_at(const IpdsSchedule& s, long t) {
  return s.beta0 * (1.0 + s.xi * std::pow(static_cast<double>(t), s.p));
}

double mu_at(const IpdsSchedule& s, long t) {
  return 1.0 / (s.lambda_up * s.delta * beta_at(s, t));
}

void fill_derived_constants(RegimeParams& pr, double kappa) {
  const double sg = pr.sigma;
  const double dev = std::abs(1.0 - sg);
  pr.omega = 1.0 + pr.xi / (2.0 * sg) + sg * pr.xi;
  pr.sigma1 = sg / ((1.0 - dev) * (1.0 - dev));
  pr.sigma2 = dev / (sg * (1.0 - dev));
  pr.eps1 = 0.5 * pr.theta1 - 0.5;
  pr.eps3 = pr.xi;
  pr.varrho = 6.0 * pr.omega * pr.sigma1 * kappa;
  if (pr.regime == Regime::Bijective) {
    pr.q = pr.theta2 * (1.0 + pr.delta) - 1.0 / kappa;
    pr.chi = pr.varrho * (pr.delta + pr.q) * (pr.delta + pr.q);
  } else {
    pr.q = pr.theta2 * (1.0 + pr.delta);
    const double sq = sg * pr.q;
    pr.chi = (2.0 * pr.omega * kappa / sg) *
             (sq * sq + 3.0 * pr.delta * pr.delta +
              3.0 * (pr.delta + sq) * (pr.delta + sq));
  }
  pr.eps2 = pr.theta2 - 0.5 - pr.chi;
}

RegimeParams select_params(Regime regime, double kappa, double lambda_down_prime,
                           double lambda_up, const SelectOverrides& ov) {
  (void)lambda_down_prime;
  (void)lambda_up;
  if (!(kappa >= 1.0))
    throw std::invalid_argument("select_params: kappa must be >= 1");

  RegimeParams pr;
  pr.regime = regime;
  pr.p = 1.0 / 3.0;
  pr.theta1 = 1.01;
  pr.theory_certified = true;

  if (regime == Regime::Bijective) {
    if (kappa >= 2.0)
      throw RegimeError("select_params: Bijective regime needs kappa < 2 (got " +
                        std::to_string(kappa) + "); use the Surjective regime");
    const double delta_sup = (1.0 / 3.0) * (2.0 / kappa - 1.0);
    pr.xi = ov.xi.value_or(0.5);
    // Small default delta keeps theta2 near 1/kappa; together with sigma = 1 the
    // last-block step then also damps the modes an indicator h_1 pins, which the
    // golden-ratio sigma does not.
    pr.delta = ov.delta.value_or(std::min(0.9 * delta_sup, 0.05));
    pr.sigma = ov.sigma.value_or(1.0);
    if (!(pr.xi > 0.0)) throw std::invalid_argument("select_params: need xi > 0");
    if (!(pr.delta > 0.0 && pr.delta < delta_sup))
      throw std::invalid_argument("select_params: need delta in (0, (1/3)(2/kappa - 1))");
    if (!(pr.sigma >= 1.0 && pr.sigma < 2.0))
      throw std::invalid_argument("select_params: Bijective needs sigma in [1,2)");
    // theta2 maximizes theta - 1/2 - varrho (delta + theta(1+delta) - 1/kappa)^2.
    const double sg = pr.sigma;
    const double dev = std::abs(1.0 - sg);
    const double omega = 1.0 + pr.xi / (2.0 * sg) + sg * pr.xi;
    const double sigma1 = sg / ((1.0 - dev) * (1.0 - dev));
    const double varrho = 6.0 * omega * sigma1 * kappa;
    const double dp1 = 1.0 + pr.delta;
    pr.theta2 = (1.0 / kappa - pr.delta) / dp1 + 1.0 / (2.0 * varrho * dp1 * dp1);
  } else {
    const double c = 0.01 / kappa;
    pr.xi = ov.xi.value_or(c);
    pr.delta = ov.delta.value_or(c);
    pr.sigma = ov.sigma.value_or(c);
    if (!(pr.sigma > 0.0 && pr.sigma < 1.0))
      throw std::invalid_argument("select_params: Surjective needs sigma in (0,1)");
    pr.theta2 = 1.5;
  }

  fill_derived_constants(pr, kappa);
  if (!(pr.eps2 > 0.0))
    throw ParamInfeasibleError(pr.chi, "select_params: eps2 = theta2 - 1/2 - chi = " +
                                            std::to_string(pr.eps2) +
                                            " not positive (chi = " +
                                            std::to_string(pr.chi) + ")");
  return pr;
}

RegimeParams experiment_defaults(double kappa) {
  RegimeParams pr;
  pr.regime = Regime::Bijective;
  pr.xi = 0.5;
  pr.p = 1.0 / 3.0;
  pr.delta = 0.25;
  pr.theta1 = 1.01;
  pr.theta2 = 0.60;
  pr.sigma = 1.618;
  pr.theory_certified = false;
  fill_derived_constants(pr, std::isfinite(kappa)
                                 ? kappa
                                 : std::numeric_limits<double>::quiet_NaN());
  return pr;
}

}  // namespace ipds
