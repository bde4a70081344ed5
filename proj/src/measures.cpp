#include "riskbudget/measures.hpp"

#include "riskbudget/errors.hpp"

#include <cmath>
#include <sstream>

namespace riskbudget {
namespace {

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw InputError("risk measure: alpha must lie in (0, 1)");
    }
}

void check_deviation(double a, double b, double p) {
    if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
        throw InputError("deviation: a and b must be positive");
    }
    if (!(p >= 1.0) || !std::isfinite(p)) {
        throw InputError("deviation: p must be >= 1");
    }
}

std::string fmt(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
}

template <class... F>
struct overloaded : F... {
    using F::operator()...;
};
template <class... F>
overloaded(F...) -> overloaded<F...>;

}  // namespace

void validate(const RiskMeasureSpec& spec) {
    std::visit(overloaded{
                   [](const Volatility&) {},
                   [](const ExpectedShortfall& s) { check_alpha(s.alpha); },
                   [](const ESMeanMixture& s) {
                       check_alpha(s.alpha);
                       if (!(s.beta > 0.0) || !std::isfinite(s.beta) || !std::isfinite(s.delta)) {
                           throw InputError("es_mean: beta must be positive and delta finite");
                       }
                   },
                   [](const Spectral& s) {
                       if (!(s.c > 0.0 && s.c < 1.0)) {
                           throw InputError(
                               "spectral: c must lie in (0, 1); c = 1 gives a constant distortion");
                       }
                       if (s.nodes < 1) {
                           throw InputError("spectral: nodes must be >= 1");
                       }
                   },
                   [](const Deviation& s) { check_deviation(s.a, s.b, s.p); },
                   [](const DeviationPlusMean& s) {
                       check_deviation(s.a, s.b, s.p);
                       if (s.p != 1.0) {
                           throw InputError("deviation_mean: only p = 1 is supported");
                       }
                       if (!std::isfinite(s.delta)) {
                           throw InputError("deviation_mean: delta must be finite");
                       }
                   },
               },
               spec);
}

double homogenization_exponent(const RiskMeasureSpec& spec) {
    return std::visit(overloaded{
                          [](const Volatility&) { return 2.0; },
                          [](const Deviation& s) { return s.p; },
                          [](const auto&) { return 1.0; },
                      },
                      spec);
}

std::string label(const RiskMeasureSpec& spec) {
    return std::visit(
        overloaded{
            [](const Volatility&) { return std::string("Volatility"); },
            [](const ExpectedShortfall& s) { return "ES_" + fmt(s.alpha); },
            [](const ESMeanMixture& s) {
                if (s.beta == 1.0 && s.delta == -1.0) {
                    return "ES_" + fmt(s.alpha) + "-E";
                }
                return fmt(s.beta) + "*ES_" + fmt(s.alpha) + (s.delta < 0 ? "" : "+") +
                       fmt(s.delta) + "*E";
            },
            [](const Spectral& s) {
                return "rho_h(c=" + fmt(s.c) + ")" + (s.subtract_mean ? "-E" : "");
            },
            [](const Deviation& s) {
                if (s.a == 1.0 && s.b == 1.0 && s.p == 1.0) {
                    return std::string("MAD");
                }
                if (s.a == 1.0 && s.b == 1.0 && s.p == 2.0) {
                    return std::string("StdDev");
                }
                if (s.p == 2.0 && std::abs(s.a * s.a + s.b * s.b - 1.0) < 1e-12) {
                    return "variantile_" + fmt(s.a * s.a);
                }
                return "Dev(a=" + fmt(s.a) + ",b=" + fmt(s.b) + ",p=" + fmt(s.p) + ")";
            },
            [](const DeviationPlusMean& s) {
                std::string base = (s.a == 1.0 && s.b == 1.0)
                                       ? std::string("MAD")
                                       : "Dev(a=" + fmt(s.a) + ",b=" + fmt(s.b) + ",p=1)";
                if (s.delta == 1.0) {
                    return base + "+E";
                }
                return base + (s.delta < 0 ? "" : "+") + fmt(s.delta) + "*E";
            },
        },
        spec);
}

bool is_es_family(const RiskMeasureSpec& spec) {
    return std::holds_alternative<ExpectedShortfall>(spec) ||
           std::holds_alternative<ESMeanMixture>(spec);
}

Eigen::Index zeta_size(const RiskMeasureSpec& spec) {
    return std::visit(overloaded{
                          [](const Volatility&) -> Eigen::Index { return 0; },
                          [](const Spectral& s) -> Eigen::Index { return s.nodes; },
                          [](const auto&) -> Eigen::Index { return 1; },
                      },
                      spec);
}

SpectralGrid spectral_grid(const Spectral& spec) {
    validate(spec);
    const auto K = static_cast<Eigen::Index>(spec.nodes);
    const double ds = kSpectralMaxLevel / static_cast<double>(K);
    const double inv_c = 1.0 / spec.c;
    SpectralGrid g{Vector(K), Vector(K)};
    for (Eigen::Index k = 0; k < K; ++k) {
        const double s = (static_cast<double>(k) + 0.5) * ds;
        const double dh = (inv_c - 1.0) * std::pow(s, inv_c - 2.0) / spec.c;
        g.s[k] = s;
        g.coeff[k] = (1.0 - s) * dh * ds;
    }
    const double total = g.coeff.sum();
    if (!(total > 0.0) || !std::isfinite(total)) {
        throw NumericError("spectral_grid: degenerate coefficients");
    }
    g.coeff /= total;
    return g;
}

}  // namespace riskbudget
