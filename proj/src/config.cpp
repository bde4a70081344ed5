#include "riskbudget/config.hpp"

#include "riskbudget/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace riskbudget {
namespace {

void check_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) {
        throw InputError(where + ": expected a JSON object");
    }
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& item : j.items()) {
        if (!ok.count(item.key())) {
            throw InputError(where + ": unknown key '" + item.key() + "'");
        }
    }
}

double get_number(const Json& j, const std::string& where) {
    if (!j.is_number()) {
        throw InputError(where + ": expected a number");
    }
    return j.get<double>();
}

long long get_integer(const Json& j, const std::string& where) {
    if (j.is_number_integer()) {
        return j.get<long long>();
    }
    if (j.is_number_float()) {
        const double v = j.get<double>();
        if (std::floor(v) == v && std::abs(v) < 9e15) {
            return static_cast<long long>(v);
        }
    }
    throw InputError(where + ": expected an integer");
}

std::uint64_t get_seed(const Json& j, const std::string& where) {
    if (j.is_number_unsigned()) {
        return j.get<std::uint64_t>();
    }
    const long long v = get_integer(j, where);
    if (v < 0) {
        throw InputError(where + ": seed must be non-negative");
    }
    return static_cast<std::uint64_t>(v);
}

bool get_bool(const Json& j, const std::string& where) {
    if (!j.is_boolean()) {
        throw InputError(where + ": expected true or false");
    }
    return j.get<bool>();
}

std::string get_string(const Json& j, const std::string& where) {
    if (!j.is_string()) {
        throw InputError(where + ": expected a string");
    }
    return j.get<std::string>();
}

template <class T, class F>
void read_if(const Json& j, const char* key, T& target, F convert, const std::string& where) {
    if (j.contains(key)) {
        target = static_cast<T>(convert(j.at(key), where + "." + key));
    }
}

std::string line_col(const std::string& text, std::size_t byte) {
    long line = 1;
    long col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return std::to_string(line) + ":" + std::to_string(col);
}

Json vector_json(const Vector& v) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        a.push_back(v[i]);
    }
    return a;
}

}  // namespace

Json parse_json(const std::string& text, const std::string& source) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw InputError(source + ":" + line_col(text, e.byte > 0 ? e.byte - 1 : 0) +
                         ": invalid JSON: " + e.what());
    }
}

RiskMeasureSpec spec_from_json(const Json& j) {
    const std::string where = "measure";
    if (!j.is_object() || !j.contains("measure")) {
        throw InputError(where + ": expected an object with a \"measure\" key");
    }
    const std::string kind = get_string(j.at("measure"), where + ".measure");
    RiskMeasureSpec spec;
    if (kind == "volatility") {
        check_keys(j, {"measure"}, where);
        spec = Volatility{};
    } else if (kind == "es") {
        check_keys(j, {"measure", "alpha"}, where);
        ExpectedShortfall s;
        read_if(j, "alpha", s.alpha, get_number, where);
        spec = s;
    } else if (kind == "es_mean") {
        check_keys(j, {"measure", "alpha", "beta", "delta"}, where);
        ESMeanMixture s;
        read_if(j, "alpha", s.alpha, get_number, where);
        read_if(j, "beta", s.beta, get_number, where);
        read_if(j, "delta", s.delta, get_number, where);
        spec = s;
    } else if (kind == "spectral") {
        check_keys(j, {"measure", "c", "nodes", "subtract_mean"}, where);
        Spectral s;
        read_if(j, "c", s.c, get_number, where);
        read_if(j, "nodes", s.nodes, get_integer, where);
        read_if(j, "subtract_mean", s.subtract_mean, get_bool, where);
        spec = s;
    } else if (kind == "deviation") {
        check_keys(j, {"measure", "a", "b", "p"}, where);
        Deviation s;
        read_if(j, "a", s.a, get_number, where);
        read_if(j, "b", s.b, get_number, where);
        read_if(j, "p", s.p, get_number, where);
        spec = s;
    } else if (kind == "deviation_mean") {
        check_keys(j, {"measure", "a", "b", "p", "delta"}, where);
        DeviationPlusMean s;
        read_if(j, "a", s.a, get_number, where);
        read_if(j, "b", s.b, get_number, where);
        read_if(j, "p", s.p, get_number, where);
        read_if(j, "delta", s.delta, get_number, where);
        spec = s;
    } else {
        throw InputError("measure: unknown kind '" + kind +
                         "' (expected volatility, es, es_mean, spectral, deviation or deviation_mean)");
    }
    validate(spec);
    return spec;
}

Json spec_to_json(const RiskMeasureSpec& spec) {
    return std::visit(
        [](const auto& s) -> Json {
            using T = std::decay_t<decltype(s)>;
            Json j;
            if constexpr (std::is_same_v<T, Volatility>) {
                j["measure"] = "volatility";
            } else if constexpr (std::is_same_v<T, ExpectedShortfall>) {
                j["measure"] = "es";
                j["alpha"] = s.alpha;
            } else if constexpr (std::is_same_v<T, ESMeanMixture>) {
                j["measure"] = "es_mean";
                j["alpha"] = s.alpha;
                j["beta"] = s.beta;
                j["delta"] = s.delta;
            } else if constexpr (std::is_same_v<T, Spectral>) {
                j["measure"] = "spectral";
                j["c"] = s.c;
                j["nodes"] = s.nodes;
                j["subtract_mean"] = s.subtract_mean;
            } else if constexpr (std::is_same_v<T, Deviation>) {
                j["measure"] = "deviation";
                j["a"] = s.a;
                j["b"] = s.b;
                j["p"] = s.p;
            } else {
                j["measure"] = "deviation_mean";
                j["a"] = s.a;
                j["b"] = s.b;
                j["p"] = s.p;
                j["delta"] = s.delta;
            }
            return j;
        },
        spec);
}

SolverConfig solver_config_from_json(const Json& j, SolverConfig c) {
    const std::string where = "solver";
    check_keys(j,
               {"method", "batch_size", "epochs", "step", "averaging_fraction", "last_k", "step_clip",
                "fd_step", "stop_tol", "max_iters", "msbgd_iterations", "resample_size", "pilot_size",
                "seed", "jobs", "trace_every"},
               where);
    if (j.contains("method")) {
        c.method = method_from_string(get_string(j.at("method"), where + ".method"));
    }
    read_if(j, "batch_size", c.batch_size, get_integer, where);
    read_if(j, "epochs", c.epochs, get_integer, where);
    if (j.contains("step")) {
        const Json& s = j.at("step");
        check_keys(s, {"kind", "base", "exponent"}, where + ".step");
        if (s.contains("kind")) {
            const std::string kind = get_string(s.at("kind"), where + ".step.kind");
            if (kind == "constant") {
                c.step.kind = StepSchedule::Kind::constant;
            } else if (kind == "polynomial") {
                c.step.kind = StepSchedule::Kind::polynomial;
            } else {
                throw InputError(where + ".step.kind: expected constant or polynomial");
            }
        }
        read_if(s, "base", c.step.base, get_number, where + ".step");
        read_if(s, "exponent", c.step.exponent, get_number, where + ".step");
    }
    read_if(j, "averaging_fraction", c.averaging_fraction, get_number, where);
    read_if(j, "last_k", c.last_k, get_integer, where);
    read_if(j, "step_clip", c.step_clip, get_number, where);
    read_if(j, "fd_step", c.fd_step, get_number, where);
    read_if(j, "stop_tol", c.stop_tol, get_number, where);
    read_if(j, "max_iters", c.max_iters, get_integer, where);
    read_if(j, "msbgd_iterations", c.msbgd_iterations, get_integer, where);
    read_if(j, "resample_size", c.resample_size, get_integer, where);
    read_if(j, "pilot_size", c.pilot_size, get_integer, where);
    read_if(j, "seed", c.seed, get_seed, where);
    if (j.contains("jobs")) {
        const long long jobs = get_integer(j.at("jobs"), where + ".jobs");
        if (jobs < 1) {
            throw InputError(where + ".jobs: must be >= 1");
        }
        c.jobs = static_cast<unsigned>(jobs);
    }
    read_if(j, "trace_every", c.trace_every, get_integer, where);
    c.validate();
    return c;
}

Json solver_config_to_json(const SolverConfig& c) {
    Json j;
    j["method"] = to_string(c.method);
    j["batch_size"] = c.batch_size;
    j["epochs"] = c.epochs;
    j["step"] = {{"kind", c.step.kind == StepSchedule::Kind::constant ? "constant" : "polynomial"},
                 {"base", c.step.base},
                 {"exponent", c.step.exponent}};
    j["averaging_fraction"] = c.averaging_fraction;
    j["last_k"] = c.last_k;
    j["step_clip"] = c.step_clip;
    j["fd_step"] = c.fd_step;
    j["stop_tol"] = c.stop_tol;
    j["max_iters"] = c.max_iters;
    j["msbgd_iterations"] = c.msbgd_iterations;
    j["resample_size"] = c.resample_size;
    j["pilot_size"] = c.pilot_size;
    j["seed"] = c.seed;
    j["jobs"] = c.jobs;
    j["trace_every"] = c.trace_every;
    return j;
}

DGPSpec dgp_from_json(const Json& j, DGPSpec s) {
    const std::string where = "dgp";
    check_keys(j,
               {"weight_min", "weight_max", "nu_calm", "nu_stress", "location_calm_min",
                "location_calm_max", "location_stress_min", "location_stress_max", "vol_min", "vol_max",
                "stress_vol_multiplier_min", "stress_vol_multiplier_max", "avg_correlation_calm",
                "avg_correlation_stress", "factors", "ridge"},
               where);
    read_if(j, "weight_min", s.weight_min, get_number, where);
    read_if(j, "weight_max", s.weight_max, get_number, where);
    read_if(j, "nu_calm", s.nu_calm, get_number, where);
    read_if(j, "nu_stress", s.nu_stress, get_number, where);
    read_if(j, "location_calm_min", s.location_calm_min, get_number, where);
    read_if(j, "location_calm_max", s.location_calm_max, get_number, where);
    read_if(j, "location_stress_min", s.location_stress_min, get_number, where);
    read_if(j, "location_stress_max", s.location_stress_max, get_number, where);
    read_if(j, "vol_min", s.vol_min, get_number, where);
    read_if(j, "vol_max", s.vol_max, get_number, where);
    read_if(j, "stress_vol_multiplier_min", s.stress_vol_multiplier_min, get_number, where);
    read_if(j, "stress_vol_multiplier_max", s.stress_vol_multiplier_max, get_number, where);
    read_if(j, "avg_correlation_calm", s.avg_correlation_calm, get_number, where);
    read_if(j, "avg_correlation_stress", s.avg_correlation_stress, get_number, where);
    read_if(j, "factors", s.factors, get_integer, where);
    read_if(j, "ridge", s.ridge, get_number, where);
    return s;
}

Json dgp_to_json(const DGPSpec& s) {
    Json j;
    j["weight_min"] = s.weight_min;
    j["weight_max"] = s.weight_max;
    j["nu_calm"] = s.nu_calm;
    j["nu_stress"] = s.nu_stress;
    j["location_calm_min"] = s.location_calm_min;
    j["location_calm_max"] = s.location_calm_max;
    j["location_stress_min"] = s.location_stress_min;
    j["location_stress_max"] = s.location_stress_max;
    j["vol_min"] = s.vol_min;
    j["vol_max"] = s.vol_max;
    j["stress_vol_multiplier_min"] = s.stress_vol_multiplier_min;
    j["stress_vol_multiplier_max"] = s.stress_vol_multiplier_max;
    j["avg_correlation_calm"] = s.avg_correlation_calm;
    j["avg_correlation_stress"] = s.avg_correlation_stress;
    j["factors"] = s.factors;
    j["ridge"] = s.ridge;
    return j;
}

ExperimentSpec experiment_from_json(const Json& j, ExperimentSpec s) {
    const std::string where = "study";
    check_keys(j,
               {"dims", "repetitions", "alpha", "dgp", "history_size", "simulation_size", "settings",
                "nu_fixed", "sgd_history", "osbgd", "sgd_simulated", "msbgd", "reference", "seed",
                "jobs"},
               where);
    if (j.contains("dims")) {
        const Json& d = j.at("dims");
        if (!d.is_array()) {
            throw InputError(where + ".dims: expected an array");
        }
        s.dims.clear();
        for (const auto& v : d) {
            s.dims.push_back(static_cast<Eigen::Index>(get_integer(v, where + ".dims")));
        }
    }
    read_if(j, "repetitions", s.repetitions, get_integer, where);
    read_if(j, "alpha", s.alpha, get_number, where);
    if (j.contains("dgp")) {
        s.dgp = dgp_from_json(j.at("dgp"), s.dgp);
    }
    read_if(j, "history_size", s.history_size, get_integer, where);
    read_if(j, "simulation_size", s.simulation_size, get_integer, where);
    if (j.contains("settings")) {
        const Json& a = j.at("settings");
        if (!a.is_array()) {
            throw InputError(where + ".settings: expected an array");
        }
        s.settings.clear();
        for (const auto& v : a) {
            s.settings.push_back(setting_from_string(get_string(v, where + ".settings")));
        }
    }
    if (j.contains("nu_fixed")) {
        const Json& a = j.at("nu_fixed");
        if (!a.is_array()) {
            throw InputError(where + ".nu_fixed: expected an array");
        }
        s.nu_fixed.clear();
        for (const auto& v : a) {
            s.nu_fixed.push_back(get_number(v, where + ".nu_fixed"));
        }
    }
    auto solver = [&](const char* key, SolverConfig& target) {
        if (j.contains(key)) {
            target = solver_config_from_json(j.at(key), target);
        }
    };
    solver("sgd_history", s.sgd_history);
    solver("osbgd", s.osbgd);
    solver("sgd_simulated", s.sgd_simulated);
    solver("msbgd", s.msbgd);
    solver("reference", s.reference);
    read_if(j, "seed", s.seed, get_seed, where);
    if (j.contains("jobs")) {
        const long long jobs = get_integer(j.at("jobs"), where + ".jobs");
        if (jobs < 1) {
            throw InputError(where + ".jobs: must be >= 1");
        }
        s.jobs = static_cast<unsigned>(jobs);
    }
    s.validate();
    return s;
}

Json experiment_to_json(const ExperimentSpec& s) {
    Json j;
    j["dims"] = s.dims;
    j["repetitions"] = s.repetitions;
    j["alpha"] = s.alpha;
    j["dgp"] = dgp_to_json(s.dgp);
    j["history_size"] = s.history_size;
    j["simulation_size"] = s.simulation_size;
    Json settings = Json::array();
    for (Setting v : s.settings) {
        settings.push_back(to_string(v));
    }
    j["settings"] = settings;
    j["nu_fixed"] = s.nu_fixed;
    j["sgd_history"] = solver_config_to_json(s.sgd_history);
    j["osbgd"] = solver_config_to_json(s.osbgd);
    j["sgd_simulated"] = solver_config_to_json(s.sgd_simulated);
    j["msbgd"] = solver_config_to_json(s.msbgd);
    j["reference"] = solver_config_to_json(s.reference);
    j["seed"] = s.seed;
    j["jobs"] = s.jobs;
    return j;
}

Budgets budgets_from_json(const Json& j, Eigen::Index d) {
    if (j.is_null() || (j.is_array() && j.empty())) {
        return Budgets::equal(d);
    }
    if (!j.is_array()) {
        throw InputError("budgets: expected an array of numbers");
    }
    if (static_cast<Eigen::Index>(j.size()) != d) {
        throw InputError("budgets: expected " + std::to_string(d) + " values, got " +
                         std::to_string(j.size()));
    }
    Vector b(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        b[i] = get_number(j[static_cast<std::size_t>(i)], "budgets");
    }
    return Budgets(std::move(b));
}

Json report_to_json(const SolveReport& r, bool timing, std::size_t max_trace) {
    Json j;
    j["measure"] = r.measure;
    j["method"] = to_string(r.method);
    j["seed"] = r.seed;
    j["weights"] = vector_json(r.weights.values());
    j["raw"] = vector_json(r.raw.values());
    j["zeta"] = vector_json(r.zeta.zeta);
    j["contributions"] = vector_json(r.contributions.contributions);
    j["total_risk"] = r.contributions.total_risk;
    j["budget_errors"] = vector_json(r.contributions.budget_errors);
    j["max_relative_budget_error"] = r.contributions.max_relative_budget_error();
    j["iterations"] = r.iterations;
    j["converged"] = r.converged;
    if (timing) {
        j["wall_time"] = r.wall_time;
    }
    j["warnings"] = r.warnings;
    Json trace = Json::array();
    const std::size_t n = r.objective_trace.size();
    const std::size_t stride = (max_trace == 0 || n <= max_trace) ? 1 : (n + max_trace - 1) / max_trace;
    for (std::size_t i = 0; i < n; i += stride) {
        trace.push_back({r.objective_trace[i].iteration, r.objective_trace[i].value});
    }
    if (n > 0 && (n - 1) % stride != 0) {
        trace.push_back({r.objective_trace.back().iteration, r.objective_trace.back().value});
    }
    j["objective_trace"] = trace;
    return j;
}

}  // namespace riskbudget
