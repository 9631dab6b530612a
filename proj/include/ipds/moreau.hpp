#pragma once

#include "ipds/terms.hpp"

namespace ipds {

/// Moreau envelope h(u; mu) = min_v h(v) + (1/(2 mu)) ||v - u||^2 of a convex,
/// C_h-Lipschitz prox term. The envelope is C_h-Lipschitz and (1/mu)-smooth.
struct MoreauEnvelope {
  ProxTerm base;
  double mu;
};

MoreauEnvelope make_envelope(ProxTerm base, double mu);

double envelope_value(const MoreauEnvelope& env, const Vec& u);

/// grad h(u; mu) = (u - prox_h(u, mu)) / mu, exact from the prox.
Vec envelope_gradient(const MoreauEnvelope& env, const Vec& u);

/// Minimizer of h(.; mu) + (rho/2) ||. - c||^2 in closed form:
///   x_breve = prox_h(c, mu + 1/rho),
///   x_bar   = (x_breve + mu rho c) / (1 + mu rho),
/// with certificate rho (c - x_bar) in the subdifferential of h at x_breve.
struct SmoothedProxResult {
  Vec x_bar;
  Vec x_breve;
  Vec subgrad_certificate;
};

SmoothedProxResult smoothed_prox_step(const MoreauEnvelope& env, const Vec& c, double rho);

/// Diagnostic: (h(u; mu2) - h(u; mu1)) / (mu1 - mu2) for 0 < mu2 < mu1.
/// Always lies in [0, C_h^2 / 2]; costs two prox evaluations.
double envelope_mu_gap(const MoreauEnvelope& env, const Vec& u, double mu1, double mu2);

}  // namespace ipds
