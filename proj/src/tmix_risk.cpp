#include "loss_law.hpp"
#include "riskbudget/errors.hpp"
#include "riskbudget/risk.hpp"

#include <cmath>
#include <string>

namespace riskbudget {
namespace {

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw InputError("alpha must lie in (0, 1)");
    }
}

template <class Model>
detail::LossMixture projected(const Model& model, const RawAllocation& y) {
    if (y.size() != model.dimension()) {
        throw InputError("allocation dimension " + std::to_string(y.size()) +
                         " does not match model dimension " + std::to_string(model.dimension()));
    }
    return detail::LossMixture(model, y.values());
}

// Bracket expansion then safeguarded Newton/bisection on F(z) = alpha.
double loss_quantile(const detail::LossMixture& law, double alpha) {
    double spread = 0;
    double shift = 0;
    for (const auto& c : law.components()) {
        spread = std::max(spread, c.scale);
        shift = std::max(shift, std::abs(c.mean_return));
    }
    double lo = -shift - 10.0 * spread;
    double hi = shift + 10.0 * spread;
    int doublings = 0;
    while (law.cdf(lo) > alpha) {
        lo -= (hi - lo);
        if (++doublings > 100) {
            throw NumericError("var: bracket expansion failed");
        }
    }
    while (law.cdf(hi) < alpha) {
        hi += (hi - lo);
        if (++doublings > 100) {
            throw NumericError("var: bracket expansion failed");
        }
    }

    double z = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double f = law.cdf(z) - alpha;
        if (f == 0.0) {
            return z;
        }
        if (f < 0) {
            lo = z;
        } else {
            hi = z;
        }
        const double slope = law.pdf(z);
        double next = slope > 0 ? z - f / slope : lo;
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
        }
        if (next == z || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(z)) {
            z = next;
            break;
        }
        z = next;
    }
    if (std::abs(law.cdf(z) - alpha) >= 1e-12) {
        throw NumericError("var: root solver did not reach |F - alpha| < 1e-12");
    }
    return z;
}

double mixture_es(const detail::LossMixture& law, double alpha) {
    const double var = loss_quantile(law, alpha);
    double s = 0;
    for (const auto& c : law.components()) {
        const double t = law.standardized(c, var);
        s += c.weight * (c.scale * c.law.upper_first_moment(t) - c.mean_return * c.law.cdf(-t));
    }
    return s / (1.0 - alpha);
}

Vector mixture_es_gradient(const detail::LossMixture& law, double alpha) {
    const double var = loss_quantile(law, alpha);
    Vector g = Vector::Zero(law.components().front().location.size());
    for (const auto& c : law.components()) {
        const double t = law.standardized(c, var);
        g += c.weight * (c.scale_times_y * (c.law.upper_first_moment(t) / c.scale) -
                         c.location * c.law.cdf(-t));
    }
    return g / (1.0 - alpha);
}

}  // namespace

double var_tmix(const StudentTMixture& model, const RawAllocation& y, double alpha) {
    check_alpha(alpha);
    return loss_quantile(projected(model, y), alpha);
}

double es_tmix(const StudentTMixture& model, const RawAllocation& y, double alpha) {
    check_alpha(alpha);
    return mixture_es(projected(model, y), alpha);
}

Vector es_tmix_gradient(const StudentTMixture& model, const RawAllocation& y, double alpha) {
    check_alpha(alpha);
    return mixture_es_gradient(projected(model, y), alpha);
}

double var_gmix(const GaussianMixture& model, const RawAllocation& y, double alpha) {
    check_alpha(alpha);
    return loss_quantile(projected(model, y), alpha);
}

double es_gmix(const GaussianMixture& model, const RawAllocation& y, double alpha) {
    check_alpha(alpha);
    return mixture_es(projected(model, y), alpha);
}

Vector es_gmix_gradient(const GaussianMixture& model, const RawAllocation& y, double alpha) {
    check_alpha(alpha);
    return mixture_es_gradient(projected(model, y), alpha);
}

double var_model(const ReturnModel& model, const RawAllocation& y, double alpha) {
    check_alpha(alpha);
    return std::visit([&](const auto& m) { return loss_quantile(projected(m, y), alpha); }, model);
}

double es_model(const ReturnModel& model, const RawAllocation& y, double alpha) {
    check_alpha(alpha);
    return std::visit([&](const auto& m) { return mixture_es(projected(m, y), alpha); }, model);
}

Vector es_model_gradient(const ReturnModel& model, const RawAllocation& y, double alpha) {
    check_alpha(alpha);
    return std::visit([&](const auto& m) { return mixture_es_gradient(projected(m, y), alpha); },
                      model);
}

std::pair<double, Vector> volatility_value_and_gradient(const Matrix& sigma, const RawAllocation& y) {
    if (sigma.rows() != y.size() || sigma.cols() != y.size()) {
        throw InputError("volatility: covariance dimension mismatch");
    }
    if (!sigma.allFinite() || (sigma - sigma.transpose()).cwiseAbs().maxCoeff() >
                                  1e-12 * std::max(1.0, sigma.cwiseAbs().maxCoeff())) {
        throw InputError("volatility: covariance must be finite and symmetric");
    }
    Eigen::LLT<Matrix> llt(sigma);
    if (llt.info() != Eigen::Success) {
        throw InputError("volatility: covariance is not positive-definite");
    }
    const Vector sy = sigma * y.values();
    const double v = std::sqrt(y.values().dot(sy));
    return {v, sy / v};
}

}  // namespace riskbudget
