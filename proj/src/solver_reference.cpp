#include "solver_internal.hpp"

#include <cmath>

namespace riskbudget {
namespace {

struct ReferenceResult {
    Vector y;
    std::vector<TracePoint> trace;
    long iterations = 0;
    double wall = 0;
};

// Monotone Barzilai-Borwein descent with Armijo backtracking in u = log y.
ReferenceResult reference_core(const RiskFunction& risk, double q, const Budgets& budgets,
                               const SolverConfig& config, const SolveHooks& hooks) {
    const Vector& b = budgets.values();
    Vector y;
    if (hooks.initial_y) {
        if (hooks.initial_y->size() != b.size()) {
            throw InputError("reference: initial allocation has the wrong dimension");
        }
        y = RawAllocation(*hooks.initial_y).values();
    } else {
        y = detail::ray_scale(risk.value(b), q, 1.0) * b;
    }

    auto value = [&](const Vector& v) {
        const double r = risk.value(v);
        return r > 0 ? detail::homogenized(r, q, budgets, v) : std::numeric_limits<double>::infinity();
    };
    auto gradient = [&](const Vector& v) -> Vector {
        const double r = risk.value(v);
        const double gprime = q == 1.0 ? 1.0 : q * std::pow(r, q - 1.0);
        return gprime * risk.gradient(v) - b.cwiseQuotient(v);
    };

    const detail::Stopwatch clock;
    ReferenceResult out;
    double f = value(y);
    if (!std::isfinite(f)) {
        throw NumericError("reference: risk is not positive at the starting point");
    }
    out.trace.push_back({0, f});
    Vector u = y.array().log();
    Vector gu_prev, u_prev;
    double t = 1.0;
    for (long k = 0;; ++k) {
        const Vector gy = gradient(y);
        if (!gy.allFinite()) {
            throw NumericError("reference: non-finite gradient at iteration " + std::to_string(k));
        }
        if (gy.cwiseAbs().maxCoeff() < config.stop_tol) {
            out.iterations = k;
            break;
        }
        if (k >= config.max_iters) {
            throw ConvergenceError("reference: gradient norm " +
                                       std::to_string(gy.cwiseAbs().maxCoeff()) +
                                       " above tolerance after " + std::to_string(k) + " iterations",
                                   std::move(out.trace));
        }
        const Vector gu = y.cwiseProduct(gy);
        if (k > 0) {
            const Vector s = u - u_prev;
            const Vector r = gu - gu_prev;
            const double den = s.dot(r);
            t = den > 0 ? s.squaredNorm() / den : 2.0 * t;
            t = std::clamp(t, 1e-12, 1e12);
        }
        const double slope = gu.squaredNorm();
        Vector u_new, y_new;
        double f_new = 0;
        int halvings = 0;
        for (;; ++halvings) {
            u_new = u - t * gu;
            y_new = u_new.array().exp();
            f_new = value(y_new);
            if (std::isfinite(f_new) && f_new <= f - 1e-4 * t * slope) {
                break;
            }
            if (halvings == 80) {
                throw ConvergenceError("reference: line search failed at iteration " +
                                           std::to_string(k),
                                       std::move(out.trace));
            }
            t *= 0.5;
        }
        u_prev = u;
        gu_prev = gu;
        u = u_new;
        y = y_new;
        f = f_new;
        out.trace.push_back({k + 1, f});
    }
    out.y = y;
    out.wall = clock.seconds();
    return out;
}

}  // namespace

SolveReport reference_solve(const RiskMeasureSpec& spec, const Budgets& budgets,
                            const ReturnModel& model, const SolverConfig& config,
                            const SolveHooks& hooks) {
    validate(spec);
    config.validate();
    if (budgets.size() != dimension(model)) {
        throw InputError("reference: budgets and model differ in dimension");
    }
    const RiskFunction risk = exact_risk(spec, model);
    ReferenceResult res = reference_core(risk, homogenization_exponent(spec), budgets, config, hooks);
    Vector zeta;
    if (const auto* es = std::get_if<ExpectedShortfall>(&spec)) {
        zeta = Vector::Constant(1, var_model(model, RawAllocation(res.y), es->alpha));
    } else if (const auto* mix = std::get_if<ESMeanMixture>(&spec)) {
        zeta = Vector::Constant(1, var_model(model, RawAllocation(res.y), mix->alpha));
    }
    return detail::finish_report(Method::reference, &spec, budgets, res.y, std::move(zeta), std::move(res.trace),
                                 res.wall, res.iterations, true, config, hooks, risk);
}

SolveReport reference_solve(const RiskFunction& risk, double exponent, const Budgets& budgets,
                            const SolverConfig& config, const SolveHooks& hooks) {
    config.validate();
    if (!(exponent >= 1.0)) {
        throw InputError("reference: homogenization exponent must be >= 1");
    }
    ReferenceResult res = reference_core(risk, exponent, budgets, config, hooks);
    return detail::finish_report(Method::reference, nullptr, budgets, res.y, Vector(),
                                 std::move(res.trace), res.wall, res.iterations, true, config,
                                 hooks, risk);
}

}  // namespace riskbudget
