#include "riskbudget/rng.hpp"
#include "solver_internal.hpp"

#include <cmath>
#include <memory>

namespace riskbudget {
namespace detail {

DescentResult bb_descent(const std::function<double(const Vector&, long)>& objective,
                         const Vector& y0, const SolverConfig& config, long iterations,
                         bool stop_on_tolerance) {
    const double h = config.fd_step;
    DescentResult out;
    Vector y = y0;
    Vector y_prev, g_prev;
    double first_step = 0;
    double f = objective(y, 0);
    if (!std::isfinite(f)) {
        throw NumericError("descent: objective is not finite at the starting point");
    }
    for (long k = 0; k < iterations; ++k) {
        if (k > 0 && !stop_on_tolerance) {
            f = objective(y, k);  // the sample changed
        }
        Vector g(y.size());
        Vector probe = y;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            probe[i] = y[i] + h;
            g[i] = (objective(probe, k) - f) / h;
            probe[i] = y[i];
        }
        if (!g.allFinite()) {
            throw NumericError("descent: non-finite gradient at iteration " + std::to_string(k));
        }

        double gamma = 0;
        if (k == 0) {
            const double gn = g.norm();
            first_step = gn > 0 ? 0.1 * y.norm() / gn : 1.0;
            gamma = first_step;
        } else {
            const Vector s = y - y_prev;
            const Vector r = g - g_prev;
            const double den = s.dot(r);
            gamma = den > 0 ? s.squaredNorm() / den : 0.0;
            if (!(gamma > 0) || !std::isfinite(gamma)) {
                gamma = first_step / static_cast<double>(k + 1);
            }
        }

        // Fraction to the boundary: no coordinate loses more than half its value.
        Vector step = -gamma * g;
        double tau = 1.0;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            if (step[i] < -0.5 * y[i]) {
                tau = std::min(tau, 0.5 * y[i] / -step[i]);
            }
        }
        const Vector y_new = y + tau * step;
        const double f_new = objective(y_new, k);
        if (!std::isfinite(f_new)) {
            throw NumericError("descent: non-finite objective at iteration " + std::to_string(k + 1));
        }
        out.trace.push_back({k + 1, f_new});
        out.iterates.push_back(y_new);
        out.iterations = k + 1;
        y_prev = y;
        g_prev = g;
        y = y_new;
        const bool small = std::abs(f_new - f) < config.stop_tol;
        f = f_new;
        if (stop_on_tolerance && small) {
            out.converged = true;
            break;
        }
    }
    out.y = y;
    if (!stop_on_tolerance) {
        out.converged = true;
    }
    return out;
}

}  // namespace detail

namespace {

void check_dims(const Budgets& budgets, Eigen::Index d, const char* who) {
    if (budgets.size() != d) {
        throw InputError(std::string(who) + ": budgets have " + std::to_string(budgets.size()) +
                         " components, data has " + std::to_string(d) + " assets");
    }
    if (d < 2) {
        throw InputError(std::string(who) + ": at least two assets are required");
    }
}

double sample_objective(const RiskMeasureSpec& spec, double q, const Budgets& budgets,
                        const RowMatrix& data, const Vector& y) {
    if ((y.array() <= 0).any()) {
        return std::numeric_limits<double>::infinity();
    }
    const Vector L = portfolio_losses(data, y);
    return detail::homogenized(empirical_risk(spec, detail::as_span(L)), q, budgets, y);
}

Vector start_point(const RiskMeasureSpec& spec, double q, const Budgets& budgets,
                   const RowMatrix& data, const SolveHooks& hooks) {
    if (hooks.initial_y) {
        if (hooks.initial_y->size() != budgets.size()) {
            throw InputError("initial allocation has the wrong dimension");
        }
        return RawAllocation(*hooks.initial_y).values();
    }
    const Vector L = portfolio_losses(data, budgets.values());
    const double m = L.mean();
    const double sd = std::sqrt((L.array() - m).square().mean());
    return detail::ray_scale(empirical_risk(spec, detail::as_span(L)), q, sd) * budgets.values();
}

}  // namespace

SolveReport osbgd_solve(const RiskMeasureSpec& spec, const Budgets& budgets,
                        const ReturnSample& sample, const SolverConfig& config,
                        const SolveHooks& hooks) {
    validate(spec);
    config.validate();
    check_dims(budgets, sample.cols(), "osbgd");
    const double q = homogenization_exponent(spec);
    const RowMatrix& data = sample.data();
    const Vector y0 = start_point(spec, q, budgets, data, hooks);

    const detail::Stopwatch clock;
    auto objective = [&](const Vector& y, long) { return sample_objective(spec, q, budgets, data, y); };
    detail::DescentResult res = detail::bb_descent(objective, y0, config, config.max_iters, true);
    const double wall = clock.seconds();

    const Vector losses = portfolio_losses(data, res.y);
    Vector zeta = StochasticObjective(spec).optimal_zeta(detail::as_span(losses)).zeta;
    return detail::finish_report(Method::osbgd, &spec, budgets, res.y, std::move(zeta),
                                 std::move(res.trace), wall, res.iterations, res.converged, config,
                                 hooks, sample_risk(spec, sample, config.fd_step));
}

SolveReport msbgd_solve(const RiskMeasureSpec& spec, const Budgets& budgets,
                        const ReturnModel& model, const SolverConfig& config,
                        const SolveHooks& hooks) {
    validate(spec);
    config.validate();
    check_dims(budgets, dimension(model), "msbgd");
    const double q = homogenization_exponent(spec);

    // One fresh sample per iteration, drawn lazily and kept while in use.
    long cached = -1;
    std::shared_ptr<ReturnSample> current;
    auto sample_at = [&](long k) -> const ReturnSample& {
        if (k != cached) {
            current = std::make_shared<ReturnSample>(sample_model(
                model, config.resample_size,
                derive_seed(config.seed, Stream::resample, static_cast<std::uint64_t>(k)),
                config.jobs));
            cached = k;
        }
        return *current;
    };

    const detail::Stopwatch clock;
    const Vector y0 = start_point(spec, q, budgets, sample_at(0).data(), hooks);
    auto objective = [&](const Vector& y, long k) {
        return sample_objective(spec, q, budgets, sample_at(k).data(), y);
    };
    detail::DescentResult res =
        detail::bb_descent(objective, y0, config, config.msbgd_iterations, false);
    const double wall = clock.seconds();

    Vector y = Vector::Zero(y0.size());
    const auto n_iter = res.iterates.size();
    const auto k_avg = std::min<std::size_t>(static_cast<std::size_t>(config.last_k), n_iter);
    for (std::size_t i = n_iter - k_avg; i < n_iter; ++i) {
        y += res.iterates[i];
    }
    y /= static_cast<double>(k_avg);

    const ReturnSample& last = *current;
    const Vector losses = portfolio_losses(last.data(), y);
    Vector zeta = StochasticObjective(spec).optimal_zeta(detail::as_span(losses)).zeta;

    RiskFunction audit;
    if (has_exact_risk(spec)) {
        audit = exact_risk(spec, model);
    } else {
        auto keep = current;
        RiskFunction inner = sample_risk(spec, *keep, config.fd_step);
        audit = {[keep, inner](const Vector& v) { return inner.value(v); },
                 [keep, inner](const Vector& v) { return inner.gradient(v); }};
    }
    return detail::finish_report(Method::msbgd, &spec, budgets, y, std::move(zeta),
                                 std::move(res.trace), wall, res.iterations, true, config, hooks,
                                 audit);
}

}  // namespace riskbudget
