#include "riskbudget/errors.hpp"
#include "riskbudget/risk.hpp"

namespace riskbudget {

bool has_exact_risk(const RiskMeasureSpec& spec) {
    return std::holds_alternative<Volatility>(spec) || std::holds_alternative<Spectral>(spec) ||
           is_es_family(spec);
}

RiskFunction exact_risk(const RiskMeasureSpec& spec, const ReturnModel& model) {
    validate(spec);
    if (std::holds_alternative<Volatility>(spec)) {
        const Matrix sigma = covariance(model);
        return {
            [sigma](const Vector& y) { return volatility_value_and_gradient(sigma, RawAllocation(y)).first; },
            [sigma](const Vector& y) { return volatility_value_and_gradient(sigma, RawAllocation(y)).second; },
        };
    }
    if (const auto* s = std::get_if<ExpectedShortfall>(&spec)) {
        const double alpha = s->alpha;
        return {
            [model, alpha](const Vector& y) { return es_model(model, RawAllocation(y), alpha); },
            [model, alpha](const Vector& y) { return es_model_gradient(model, RawAllocation(y), alpha); },
        };
    }
    const Vector mean = std::visit([](const auto& m) { return m.mean(); }, model);
    if (const auto* s = std::get_if<ESMeanMixture>(&spec)) {
        const ESMeanMixture p = *s;
        // E[loss] = -y'mean
        return {
            [model, p, mean](const Vector& y) {
                return p.beta * es_model(model, RawAllocation(y), p.alpha) - p.delta * y.dot(mean);
            },
            [model, p, mean](const Vector& y) {
                return Vector(p.beta * es_model_gradient(model, RawAllocation(y), p.alpha) -
                              p.delta * mean);
            },
        };
    }
    if (const auto* s = std::get_if<Spectral>(&spec)) {
        const SpectralGrid grid = spectral_grid(*s);
        const bool centered = s->subtract_mean;
        return {
            [model, grid, centered, mean](const Vector& y) {
                const RawAllocation ry(y);
                double v = 0;
                for (Eigen::Index k = 0; k < grid.s.size(); ++k) {
                    v += grid.coeff[k] * es_model(model, ry, grid.s[k]);
                }
                return centered ? v + y.dot(mean) : v;
            },
            [model, grid, centered, mean](const Vector& y) {
                const RawAllocation ry(y);
                Vector g = Vector::Zero(y.size());
                for (Eigen::Index k = 0; k < grid.s.size(); ++k) {
                    g += grid.coeff[k] * es_model_gradient(model, ry, grid.s[k]);
                }
                return centered ? Vector(g + mean) : g;
            },
        };
    }
    throw InputError("no exact evaluator for " + label(spec));
}

RiskFunction sample_risk(const RiskMeasureSpec& spec, const ReturnSample& sample, double h) {
    validate(spec);
    if (!(h > 0)) {
        throw InputError("sample_risk: finite-difference step must be positive");
    }
    // The sample is captured by reference and must outlive the returned evaluator.
    const ReturnSample* data = &sample;
    auto value = [spec, data](const Vector& y) {
        const Vector L = portfolio_losses(data->data(), y);
        return empirical_risk(spec, std::span<const double>(L.data(), static_cast<std::size_t>(L.size())));
    };
    return {value, [value, h](const Vector& y) { return central_difference_gradient(value, y, h); }};
}

}  // namespace riskbudget
