#pragma once

#include "riskbudget/core.hpp"

#include <string>
#include <variant>

namespace riskbudget {

struct Volatility {};

struct ExpectedShortfall {
    double alpha = 0.95;
};

/// beta * ES_alpha + delta * E[loss]; ES - E is beta = 1, delta = -1.
struct ESMeanMixture {
    double beta = 1.0;
    double delta = -1.0;
    double alpha = 0.95;
};

/// Spectral measure with distortion h(s) = s^(1/c - 1) / c, discretized on
/// `nodes` levels. subtract_mean removes E[loss].
struct Spectral {
    double c = 0.05;
    int nodes = 20;
    bool subtract_mean = false;
};

/// min_zeta E[(a^p (Z - zeta)_+^p + b^p (Z - zeta)_-^p)]^(1/p).
/// MAD is a = b = 1, p = 1; standard deviation is a = b = 1, p = 2.
struct Deviation {
    double a = 1.0;
    double b = 1.0;
    double p = 2.0;
};

/// Deviation + delta * E[loss]. Only p = 1 is supported (the sum is then
/// homogeneous of degree one and the objective stays jointly convex).
struct DeviationPlusMean {
    double a = 1.0;
    double b = 1.0;
    double p = 1.0;
    double delta = 1.0;
};

using RiskMeasureSpec =
    std::variant<Volatility, ExpectedShortfall, ESMeanMixture, Spectral, Deviation, DeviationPlusMean>;

/// Throws InputError when parameters fall outside their domain.
void validate(const RiskMeasureSpec& spec);

/// Exponent q of the homogenization g(x) = x^q used in the RB objective.
double homogenization_exponent(const RiskMeasureSpec& spec);

/// Short human-readable name, e.g. "ES_0.95", "MAD+E", "rho_h(c=0.05)-E".
std::string label(const RiskMeasureSpec& spec);

/// ExpectedShortfall or ESMeanMixture.
bool is_es_family(const RiskMeasureSpec& spec);

/// Number of auxiliary zeta variables of the stochastic objective (0 for volatility).
Eigen::Index zeta_size(const RiskMeasureSpec& spec);

struct SpectralGrid {
    Vector s;      // node levels, strictly increasing in (0, 0.999]
    Vector coeff;  // positive, summing to 1
};

inline constexpr double kSpectralMaxLevel = 0.999;

/// Midpoint rule on (0, 0.999] for the measure (1 - s) h'(s) ds, renormalized.
SpectralGrid spectral_grid(const Spectral& spec);

struct ZetaState {
    Vector zeta;
};

}  // namespace riskbudget
