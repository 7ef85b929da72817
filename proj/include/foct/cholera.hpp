#pragma once

#include <array>
#include <span>

#include "foct/grid.hpp"

namespace foct {

// Epidemiological rates of the two-community waterborne-cholera model, all at
// their nominal (unscaled) values. Communities are indexed 1 and 2; B is the
// aquatic bacterial reservoir coupled to each community.
struct ModelParams {
    double pi1 = 1.08e-4;     // recruitment into community 1 (1/day)
    double pi2 = 1.08e-4;     // recruitment into community 2 (1/day)
    double beta1 = 0.00125;   // water-to-person ingestion rate, community 1 (1/day)
    double beta2 = 0.0125;    // water-to-person ingestion rate, community 2 (1/day)
    double varrho1 = 0.102;   // person-to-person contact rate, community 1 (1/day)
    double varrho2 = 0.1875;  // person-to-person contact rate, community 2 (1/day)
    double K = 1e6;           // half-saturation bacterial concentration (cells/mL)
    double mu1 = 8.4e-5;      // natural mortality, community 1 (1/day)
    double mu2 = 8.4e-5;      // natural mortality, community 2 (1/day)
    double delta1 = 0.0125;   // disease-induced mortality, community 1 (1/day)
    double delta2 = 0.045;    // disease-induced mortality, community 2 (1/day)
    double gamma1 = 0.045;    // recovery rate, community 1 (1/day)
    double gamma2 = 0.035;    // recovery rate, community 2 (1/day)
    double omega = 0.001;     // immunity waning rate (1/day)
    double a1 = 0.0381360;    // susceptible migration 1 -> 2 (1/day)
    double a2 = 0.0457800;    // susceptible migration 2 -> 1 (1/day)
    double b1 = 0.03006288;   // infectious migration 1 -> 2 (1/day)
    double b2 = 0.02799157;   // infectious migration 2 -> 1 (1/day)
    double c1 = 0.03;         // recovered migration 1 -> 2 (1/day)
    double c2 = 0.03;         // recovered migration 2 -> 1 (1/day)
    double sigma1 = 50.0;     // shedding into water, community 1 (cells/mL/day per person)
    double sigma2 = 50.0;     // shedding into water, community 2 (cells/mL/day per person)
    double mu_p = 1.06;       // bacterial decay in water (1/day)
    double g1 = 0.73;         // bacterial growth near community 1 (1/day)
    double g2 = 0.73;         // bacterial growth near community 2 (1/day)

    void validate() const;
};

// The same rates after raising each one to the power alpha (the dimensional
// correction that keeps every term of the fractional system in units of
// day^-alpha), together with the aggregate outflow groups Q1..Q4. Control
// variables are never scaled.
struct ScaledParams {
    double alpha = 1.0;
    double pi1, pi2;
    double beta1, beta2;
    double varrho1, varrho2;
    double K;  // concentration scale, not a rate: left unscaled
    double mu1, mu2;
    double delta1, delta2;
    double gamma1, gamma2;
    double omega;
    double a1, a2, b1, b2, c1, c2;
    double sigma1, sigma2;
    double mu_p, g1, g2;
    double Q1;  // mu1^a + delta1^a + gamma1^a + b1^a
    double Q2;  // mu_p^a - g1^a
    double Q3;  // mu2^a + delta2^a + gamma2^a + b2^a
    double Q4;  // mu_p^a - g2^a
};

// Compartment values at one instant: susceptible/infectious/recovered
// proportions per community plus the two bacterial concentrations.
struct State {
    double S1 = 0, I1 = 0, R1 = 0, B1 = 0;
    double S2 = 0, I2 = 0, R2 = 0, B2 = 0;

    static constexpr std::size_t dim = 8;

    static State from(std::span<const double> v) {
        return {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]};
    }
    [[nodiscard]] std::array<double, 8> to_array() const {
        return {S1, I1, R1, B1, S2, I2, R2, B2};
    }
};

// Intervention levels: u treats the water supply, v vaccinates susceptibles,
// m is the fraction of contacts rendered safe by hygiene measures.
struct ControlVector {
    double u = 0.0;
    double v = 0.0;
    double m = 0.0;
};

struct ReproductionNumbers {
    double r01 = 0.0;
    double r02 = 0.0;
    double phi1 = 0.0;  // migration coupling factor, must stay below 1
};

// Raises every rate to the power alpha and assembles Q1..Q4. alpha = 1
// reproduces the nominal parameters exactly. Throws std::invalid_argument if
// alpha is outside (0, 1] or the scaled bacterial budget would be nonpositive.
[[nodiscard]] ScaledParams alpha_scale(const ModelParams& params, double alpha);

// Right-hand side of the eight coupled balance equations at one instant.
void rhs(double t, const State& x, const ControlVector& c, const ScaledParams& sp,
         std::span<double> dydt);

// Adapter for the fractional solver: constant controls over the whole run.
[[nodiscard]] RhsFunction make_rhs(const ScaledParams& sp, const ControlVector& c);

// Community reproduction numbers from the closed forms, at constant control
// levels. Throws std::invalid_argument when the migration factor phi1
// reaches 1 (closed forms lose meaning).
[[nodiscard]] ReproductionNumbers reproduction_numbers(const ScaledParams& sp,
                                                       double u, double m, double v);

// The four migration/immunity rates absent from published tables, recovered
// by inverting the reported sensitivity indices:
//   b1 from  -b1/Q1 = -0.343,   b2 from -b2/Q3 = -0.259,
//   a1, a2 from  a1/(mu+a1+a2) = 0.454,  a2/(mu+a1+a2) = 0.545.
// omega, c1, c2 admit no such inversion; the values used for them here are
// plain placeholders and no quantitative check depends on them.
[[nodiscard]] ModelParams derived_default_params();

// Endemic starting point used throughout the control experiments.
[[nodiscard]] State reference_initial_state();

}  // namespace foct
