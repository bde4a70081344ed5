#include "riskbudget/rng.hpp"
#include "solver_internal.hpp"

#include <cmath>

namespace riskbudget {
namespace {

// Budgets scaled along their ray, then perturbed by a random factor in
// [e^-1, e^1] per coordinate.
std::vector<Vector> random_starts(const Vector& base, int starts, std::uint64_t seed) {
    std::vector<Vector> out;
    for (int s = 0; s < starts; ++s) {
        Rng rng(derive_seed(seed, Stream::multistart, static_cast<std::uint64_t>(s)));
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        Vector y = base;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            y[i] *= std::exp(u(rng));
        }
        out.push_back(std::move(y));
    }
    return out;
}

MultistartResult collect(const std::vector<Vector>& starts,
                         const std::function<SolveReport(const SolveHooks&)>& solve) {
    MultistartResult out;
    for (const Vector& y0 : starts) {
        SolveHooks hooks;
        hooks.initial_y = y0;
        out.solutions.push_back(solve(hooks).weights);
    }
    for (std::size_t i = 0; i < out.solutions.size(); ++i) {
        for (std::size_t j = i + 1; j < out.solutions.size(); ++j) {
            out.max_pairwise_l1 =
                std::max(out.max_pairwise_l1, l1_accuracy(out.solutions[i], out.solutions[j]));
        }
    }
    return out;
}

void check_starts(int starts) {
    if (starts < 2) {
        throw InputError("multistart: at least two starts are required");
    }
}

}  // namespace

MultistartResult multistart_uniqueness_check(const RiskMeasureSpec& spec, const Budgets& budgets,
                                             const ReturnSample& sample, const SolverConfig& config,
                                             int starts) {
    check_starts(starts);
    validate(spec);
    const Vector L = portfolio_losses(sample.data(), budgets.values());
    const double sd = std::sqrt((L.array() - L.mean()).square().mean());
    const double lambda = detail::ray_scale(empirical_risk(spec, detail::as_span(L)),
                                            homogenization_exponent(spec), sd);
    const auto inits = random_starts(lambda * budgets.values(), starts, config.seed);
    return collect(inits, [&](const SolveHooks& hooks) {
        switch (config.method) {
            case Method::sgd:
                return sgd_solve(spec, budgets, sample, config, hooks);
            case Method::osbgd:
                return osbgd_solve(spec, budgets, sample, config, hooks);
            default:
                throw InputError("multistart: a sample supports only the sgd and osbgd methods");
        }
    });
}

MultistartResult multistart_uniqueness_check(const RiskMeasureSpec& spec, const Budgets& budgets,
                                             const ReturnModel& model, const SolverConfig& config,
                                             int starts) {
    check_starts(starts);
    validate(spec);
    double r = 0;
    if (has_exact_risk(spec)) {
        r = exact_risk(spec, model).value(budgets.values());
    } else {
        const ReturnSample s = sample_model(model, config.resample_size, config.seed, config.jobs);
        const Vector L = portfolio_losses(s.data(), budgets.values());
        r = empirical_risk(spec, detail::as_span(L));
    }
    const double lambda = detail::ray_scale(r, homogenization_exponent(spec), 1.0);
    const auto inits = random_starts(lambda * budgets.values(), starts, config.seed);
    return collect(inits, [&](const SolveHooks& hooks) {
        switch (config.method) {
            case Method::reference:
                return reference_solve(spec, budgets, model, config, hooks);
            case Method::msbgd:
                return msbgd_solve(spec, budgets, model, config, hooks);
            default:
                throw InputError("multistart: a model supports only the reference and msbgd methods");
        }
    });
}

}  // namespace riskbudget
