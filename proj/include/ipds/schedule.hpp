#pragma once

#include <limits>
#include <optional>
#include <stdexcept>

namespace ipds {

/// Increasing-penalization / decreasing-smoothing schedule:
///   beta^t = beta0 (1 + xi t^p),   mu^t = 1 / (lambda_up delta beta^t).
/// Construction requires beta0 >= L_n / (delta lambda_up). xi = 0 freezes the
/// schedule (the fixed-penalty degeneracy used by RADMM).
struct IpdsSchedule {
  double beta0;
  double xi;
  double p;
  double delta;
  double lambda_up;

  static IpdsSchedule checked(double beta0, double xi, double p, double delta,
                              double lambda_up, double L_n);
};

double beta_at(const IpdsSchedule& s, long t);
double mu_at(const IpdsSchedule& s, long t);

enum class Regime { Bijective, Surjective };

/// Stepsize/regularization constants of the two parameter regimes together
/// with every derived analysis constant the runtime checks need.
struct RegimeParams {
  Regime regime = Regime::Bijective;
  double sigma = 1.0;
  double theta1 = 1.01;
  double theta2 = 1.0;
  double xi = 0.5;
  double delta = 0.25;
  double p = 1.0 / 3.0;

  double omega = 0.0;
  double sigma1 = 0.0;
  double sigma2 = 0.0;
  double varrho = 0.0;
  double q = 0.0;
  double chi = 0.0;
  double eps1 = 0.0;
  double eps2 = 0.0;
  double eps3 = 0.0;

  bool theory_certified = false;
};

struct RegimeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParamInfeasibleError : std::runtime_error {
  double chi;
  ParamInfeasibleError(double chi_, const std::string& what)
      : std::runtime_error(what), chi(chi_) {}
};

struct SelectOverrides {
  std::optional<double> xi;
  std::optional<double> delta;
  std::optional<double> sigma;
};

/// Regime-dependent parameter selection. Bijective requires kappa < 2 and
/// returns the theta2 maximizing the certified decrease margin; Surjective
/// uses the conservative 0.01/kappa settings.
RegimeParams select_params(Regime regime, double kappa, double lambda_down_prime,
                           double lambda_up, const SelectOverrides& ov = {});

/// The reported empirical settings (xi, p, delta, theta1, theta2, sigma)
/// = (1/2, 1/3, 1/4, 1.01, 0.60, 1.618). Not certified: theta2/delta need not
/// satisfy the per-iteration decrease conditions for a given kappa. Derived
/// constants are filled when kappa is supplied.
RegimeParams experiment_defaults(
    double kappa = std::numeric_limits<double>::quiet_NaN());

/// Recompute the derived constants (omega, sigma1, sigma2, varrho, q, chi,
/// eps1..eps3) of params for the given kappa, in place.
void fill_derived_constants(RegimeParams& params, double kappa);

}  // namespace ipds
