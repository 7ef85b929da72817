#include "foct/cholera.hpp"

#include <cmath>
#include <stdexcept>

namespace foct {

void ModelParams::validate() const {
    const double vals[] = {pi1,  pi2,  beta1,  beta2,  varrho1, varrho2, K,
                           mu1,  mu2,  delta1, delta2, gamma1,  gamma2,  omega,
                           a1,   a2,   b1,     b2,     c1,      c2,      sigma1,
                           sigma2, mu_p, g1,   g2};
    for (double x : vals)
        if (!(x >= 0.0) || !std::isfinite(x))
            throw std::invalid_argument("ModelParams: rates must be finite and nonnegative");
    if (!(K > 0.0))
        throw std::invalid_argument("ModelParams: K must be positive");
    if (!(mu_p > g1) || !(mu_p > g2))
        throw std::invalid_argument(
            "ModelParams: bacterial decay mu_p must exceed both growth rates");
}

ScaledParams alpha_scale(const ModelParams& p, double alpha) {
    if (!(alpha > 0.0) || alpha > 1.0)
        throw std::invalid_argument("alpha_scale: alpha must lie in (0, 1]");
    p.validate();

    ScaledParams s;
    s.alpha = alpha;
    s.K = p.K;
    if (alpha == 1.0) {
        // Exact identity, no pow round-off.
        s.pi1 = p.pi1; s.pi2 = p.pi2;
        s.beta1 = p.beta1; s.beta2 = p.beta2;
        s.varrho1 = p.varrho1; s.varrho2 = p.varrho2;
        s.mu1 = p.mu1; s.mu2 = p.mu2;
        s.delta1 = p.delta1; s.delta2 = p.delta2;
        s.gamma1 = p.gamma1; s.gamma2 = p.gamma2;
        s.omega = p.omega;
        s.a1 = p.a1; s.a2 = p.a2;
        s.b1 = p.b1; s.b2 = p.b2;
        s.c1 = p.c1; s.c2 = p.c2;
        s.sigma1 = p.sigma1; s.sigma2 = p.sigma2;
        s.mu_p = p.mu_p; s.g1 = p.g1; s.g2 = p.g2;
    } else {
        auto sc = [alpha](double x) { return std::pow(x, alpha); };
        s.pi1 = sc(p.pi1); s.pi2 = sc(p.pi2);
        s.beta1 = sc(p.beta1); s.beta2 = sc(p.beta2);
        s.varrho1 = sc(p.varrho1); s.varrho2 = sc(p.varrho2);
        s.mu1 = sc(p.mu1); s.mu2 = sc(p.mu2);
        s.delta1 = sc(p.delta1); s.delta2 = sc(p.delta2);
        s.gamma1 = sc(p.gamma1); s.gamma2 = sc(p.gamma2);
        s.omega = sc(p.omega);
        s.a1 = sc(p.a1); s.a2 = sc(p.a2);
        s.b1 = sc(p.b1); s.b2 = sc(p.b2);
        s.c1 = sc(p.c1); s.c2 = sc(p.c2);
        s.sigma1 = sc(p.sigma1); s.sigma2 = sc(p.sigma2);
        s.mu_p = sc(p.mu_p); s.g1 = sc(p.g1); s.g2 = sc(p.g2);
    }
    s.Q1 = s.mu1 + s.delta1 + s.gamma1 + s.b1;
    s.Q2 = s.mu_p - s.g1;
    s.Q3 = s.mu2 + s.delta2 + s.gamma2 + s.b2;
    s.Q4 = s.mu_p - s.g2;
    if (!(s.Q2 > 0.0) || !(s.Q4 > 0.0))
        throw std::invalid_argument("alpha_scale: scaled bacterial budget nonpositive");
    return s;
}

void rhs(double /*t*/, const State& x, const ControlVector& c,
         const ScaledParams& sp, std::span<double> dydt) {
    if (dydt.size() != State::dim)
        throw std::invalid_argument("rhs: output span must have dimension 8");
    if (!(sp.K + x.B1 > 0.0) || !(sp.K + x.B2 > 0.0))
        throw NumericalError("rhs: vanishing ingestion denominator K + B");

    const double foi1 = (1.0 - c.u) * sp.beta1 * x.B1 * x.S1 / (sp.K + x.B1);
    const double foi2 = (1.0 - c.u) * sp.beta2 * x.B2 * x.S2 / (sp.K + x.B2);
    const double p2p1 = (1.0 - c.m) * sp.varrho1 * x.I1 * x.S1;
    const double p2p2 = (1.0 - c.m) * sp.varrho2 * x.I2 * x.S2;

    dydt[0] = sp.pi1 + sp.a2 * x.S2 + sp.omega * x.R1 - foi1 - p2p1
              - (sp.a1 + sp.mu1 + c.v) * x.S1;
    dydt[1] = foi1 + p2p1 + sp.b2 * x.I2 - sp.Q1 * x.I1;
    dydt[2] = c.v * x.S1 + sp.gamma1 * x.I1 - (sp.mu1 + sp.omega + sp.c1) * x.R1
              + sp.c2 * x.R2;
    dydt[3] = sp.sigma1 * x.I1 - sp.Q2 * x.B1;
    dydt[4] = sp.pi2 + sp.a1 * x.S1 + sp.omega * x.R2 - foi2 - p2p2
              - (sp.a2 + sp.mu2 + c.v) * x.S2;
    dydt[5] = foi2 + p2p2 + sp.b1 * x.I1 - sp.Q3 * x.I2;
    dydt[6] = c.v * x.S2 + sp.gamma2 * x.I2 - (sp.mu2 + sp.omega + sp.c2) * x.R2
              + sp.c1 * x.R1;
    dydt[7] = sp.sigma2 * x.I2 - sp.Q4 * x.B2;
}

RhsFunction make_rhs(const ScaledParams& sp, const ControlVector& c) {
    return [sp, c](double t, std::span<const double> y, std::span<double> dydt) {
        rhs(t, State::from(y), c, sp, dydt);
    };
}

ReproductionNumbers reproduction_numbers(const ScaledParams& sp, double u,
                                         double m, double v) {
    const double d1 = sp.mu1 + sp.a1 + v;
    const double d2 = sp.mu2 + sp.a2 + v;
    const double phi1 = sp.a1 * sp.a2 / (d1 * d2);
    if (!(phi1 < 1.0))
        throw std::invalid_argument(
            "reproduction_numbers: migration factor phi1 >= 1");

    ReproductionNumbers out;
    out.phi1 = phi1;
    out.r01 = (sp.pi1 * d2 + sp.a2 * sp.pi2)
              * ((1.0 - u) * sp.beta1 * sp.sigma1
                 + (1.0 - m) * sp.Q2 * sp.varrho1 * sp.K)
              / (sp.Q1 * sp.Q2 * d1 * d2 * (1.0 - phi1) * sp.K);
    out.r02 = (sp.pi2 * d1 + sp.a1 * sp.pi1)
              * ((1.0 - u) * sp.beta2 * sp.sigma2
                 + (1.0 - m) * sp.Q4 * sp.varrho2 * sp.K)
              / (sp.Q3 * sp.Q4 * d1 * d2 * (1.0 - phi1) * sp.K);
    return out;
}

ModelParams derived_default_params() {
    ModelParams p;
    // b-rates from the reported infectious-migration indices -0.343, -0.259:
    // index = -b/Q with Q = mu + delta + gamma + b, solved for b.
    p.b1 = 0.343 * (p.mu1 + p.delta1 + p.gamma1) / (1.0 - 0.343);
    p.b2 = 0.259 * (p.mu2 + p.delta2 + p.gamma2) / (1.0 - 0.259);
    // a-rates from the reported susceptible-migration indices 0.454, 0.545:
    // a1 = 0.454*s, a2 = 0.545*s with s = mu + a1 + a2.
    const double s = p.mu1 / (1.0 - 0.454 - 0.545);
    p.a1 = 0.454 * s;
    p.a2 = 0.545 * s;
    // omega, c1, c2 keep their placeholder defaults (no inversion exists).
    return p;
}

State reference_initial_state() {
    return {0.53144, 0.001997, 0.01028, 0.30254, 0.44222, 0.002380, 0.01082, 0.36065};
}

}  // namespace foct
