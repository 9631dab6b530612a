#include "ipds/moreau.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace ipds {

MoreauEnvelope make_envelope(ProxTerm base, double mu) {
  if (mu <= 0.0) throw std::invalid_argument("make_envelope: mu must be positive");
  if (!base.is_convex)
    throw std::invalid_argument("make_envelope: base term must be convex");
  if (!base.lipschitz_const)
    throw std::invalid_argument("make_envelope: base term needs a Lipschitz constant");
  return MoreauEnvelope{std::move(base), mu};
}

double envelope_value(const MoreauEnvelope& env, const Vec& u) {
  Vec p = env.base.prox(u, env.mu);
  return env.base.value(p) + (p - u).squaredNorm() / (2.0 * env.mu);
}

Vec envelope_gradient(const MoreauEnvelope& env, const Vec& u) {
  return (u - env.base.prox(u, env.mu)) / env.mu;
}

SmoothedProxResult smoothed_prox_step(const MoreauEnvelope& env, const Vec& c, double rho) {
  if (rho <= 0.0) throw std::invalid_argument("smoothed_prox_step: rho must be positive");
  const double mu = env.mu;
  SmoothedProxResult out;
  out.x_breve = env.base.prox(c, mu + 1.0 / rho);
  out.x_bar = (out.x_breve + mu * rho * c) / (1.0 + mu * rho);
  out.subgrad_certificate = rho * (c - out.x_bar);
#ifndef NDEBUG
  // ||x_bar - x_breve|| <= mu C_h
  assert((out.x_bar - out.x_breve).norm() <=
         mu * env.base.lipschitz_const.value() + 1e-9);
#endif
  return out;
}

double envelope_mu_gap(const MoreauEnvelope& env, const Vec& u, double mu1, double mu2) {
  if (!(0.0 < mu2 && mu2 < mu1))
    throw std::invalid_argument("envelope_mu_gap: need 0 < mu2 < mu1");
  MoreauEnvelope e1{env.base, mu1};
  MoreauEnvelope e2{env.base, mu2};
  return (envelope_value(e2, u) - envelope_value(e1, u)) / (mu1 - mu2);
}

}  // namespace ipds
