#include "solver_internal.hpp"

#include <cmath>
#include <sstream>

namespace riskbudget {

std::string to_string(Method m) {
    switch (m) {
        case Method::sgd:
            return "sgd";
        case Method::osbgd:
            return "osbgd";
        case Method::msbgd:
            return "msbgd";
        case Method::reference:
            return "reference";
    }
    return "unknown";
}

Method method_from_string(const std::string& s) {
    for (Method m : {Method::sgd, Method::osbgd, Method::msbgd, Method::reference}) {
        if (s == to_string(m)) {
            return m;
        }
    }
    throw InputError("unknown method '" + s + "' (expected sgd, osbgd, msbgd or reference)");
}

double StepSchedule::at(long k) const {
    if (kind == Kind::constant) {
        return base;
    }
    return base / std::pow(1.0 + static_cast<double>(k), exponent);
}

void SolverConfig::validate() const {
    if (batch_size < 1) {
        throw InputError("solver: batch_size must be >= 1");
    }
    if (epochs < 1) {
        throw InputError("solver: epochs must be >= 1");
    }
    if (!(fd_step > 0)) {
        throw InputError("solver: fd_step must be positive");
    }
    if (!(averaging_fraction > 0 && averaging_fraction <= 1)) {
        throw InputError("solver: averaging_fraction must lie in (0, 1]");
    }
    if (!(step.base > 0) || !std::isfinite(step.base) || !(step.exponent >= 0)) {
        throw InputError("solver: step base must be positive and exponent non-negative");
    }
    if (!(stop_tol > 0)) {
        throw InputError("solver: stop_tol must be positive");
    }
    if (max_iters < 1 || msbgd_iterations < 1) {
        throw InputError("solver: iteration limits must be >= 1");
    }
    if (last_k < 1 || last_k > msbgd_iterations) {
        throw InputError("solver: last_k must lie in [1, msbgd_iterations]");
    }
    if (resample_size < 2 || pilot_size < 1) {
        throw InputError("solver: resample_size must be >= 2 and pilot_size >= 1");
    }
    if (step_clip < 0 || step_clip >= 1) {
        throw InputError("solver: step_clip must lie in [0, 1)");
    }
}

std::vector<std::string> positivity_warnings(const RiskMeasureSpec& spec, const RiskFunction& risk,
                                             Eigen::Index d) {
    std::vector<std::string> out;
    if (!is_es_family(spec)) {
        return out;
    }
    auto check = [&](const Vector& w, const std::string& where) {
        const double r = risk.value(w);
        if (!(r > 0)) {
            std::ostringstream os;
            os << label(spec) << " is not positive (" << r << ") at " << where
               << "; the risk budgeting solution may not exist";
            out.push_back(os.str());
        }
    };
    check(Vector::Constant(d, 1.0 / static_cast<double>(d)), "the equal-weight portfolio");
    if (d > 1) {
        for (Eigen::Index i = 0; i < d; ++i) {
            Vector w = Vector::Constant(d, 0.1 / static_cast<double>(d - 1));
            w[i] = 0.9;
            check(w, "0.9 weight on asset " + std::to_string(i + 1));
        }
    }
    return out;
}

namespace detail {

double ray_scale(double risk_at_b, double exponent, double fallback_scale) {
    if (risk_at_b > 0 && std::isfinite(risk_at_b)) {
        return std::pow(exponent, -1.0 / exponent) / risk_at_b;
    }
    if (fallback_scale > 0 && std::isfinite(fallback_scale)) {
        return 1.0 / fallback_scale;
    }
    return 1.0;
}

SolveReport finish_report(Method method, const RiskMeasureSpec* spec, const Budgets& budgets, const Vector& y,
                          Vector zeta, std::vector<TracePoint> trace, double wall_time,
                          long iterations, bool converged, const SolverConfig& config,
                          const SolveHooks& hooks, const RiskFunction& default_audit) {
    const RawAllocation raw(y);
    Weights w = normalize(raw);
    const RiskFunction& audit = hooks.audit ? *hooks.audit : default_audit;
    RiskContributionReport contributions = euler_audit(w, audit, budgets);
    std::vector<std::string> warnings;
    if (spec != nullptr) {
        warnings = positivity_warnings(*spec, audit, budgets.size());
    }
    if (!converged) {
        warnings.push_back("stopped at the iteration limit before meeting the tolerance");
    }
    return SolveReport{std::move(w),
                       raw,
                       ZetaState{std::move(zeta)},
                       std::move(contributions),
                       std::move(trace),
                       wall_time,
                       iterations,
                       converged,
                       config.seed,
                       method,
                       spec != nullptr ? label(*spec) : std::string("custom"),
                       std::move(warnings)};
}

}  // namespace detail
}  // namespace riskbudget
