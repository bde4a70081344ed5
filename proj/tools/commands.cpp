#include "commands.hpp"

#include "riskbudget/bench.hpp"
#include "riskbudget/config.hpp"
#include "riskbudget/csv.hpp"
#include "riskbudget/model_io.hpp"
#include "riskbudget/risk.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

namespace rbudget {
namespace {

using namespace riskbudget;

constexpr long long kDefaultSampleSize = 1000000;

// Top-level sections of the configuration file.
struct Config {
    Json root = Json::object();

    bool has(const char* key) const { return root.contains(key); }
    const Json& at(const char* key) const { return root.at(key); }
};

Config load_config(const GlobalOptions& g) {
    Config c;
    if (g.config.empty()) {
        return c;
    }
    c.root = parse_json(read_text_file(g.config), g.config);
    if (!c.root.is_object()) {
        throw InputError(g.config + ": expected a JSON object");
    }
    for (const auto& item : c.root.items()) {
        static const std::vector<std::string> known{"model",  "sample",      "budgets", "measure",
                                                    "measures", "solver", "sample_size", "study"};
        if (std::find(known.begin(), known.end(), item.key()) == known.end()) {
            throw InputError(g.config + ": unknown key '" + item.key() + "'");
        }
    }
    return c;
}

std::string string_field(const Config& c, const char* key, const std::string& cli) {
    if (!cli.empty()) {
        return cli;
    }
    if (c.has(key)) {
        if (!c.at(key).is_string()) {
            throw InputError(std::string("config: '") + key + "' must be a path string");
        }
        return c.at(key).get<std::string>();
    }
    return {};
}

SolverConfig solver_config(const Config& c, const GlobalOptions& g, SolverConfig base) {
    SolverConfig s = c.has("solver") ? solver_config_from_json(c.at("solver"), base) : base;
    if (g.seed) {
        s.seed = *g.seed;
    }
    if (g.jobs) {
        s.jobs = *g.jobs;
    }
    return s;
}

RiskMeasureSpec with_alpha(RiskMeasureSpec spec, const std::optional<double>& alpha) {
    if (!alpha) {
        return spec;
    }
    if (auto* es = std::get_if<ExpectedShortfall>(&spec)) {
        es->alpha = *alpha;
    } else if (auto* mix = std::get_if<ESMeanMixture>(&spec)) {
        mix->alpha = *alpha;
    } else {
        throw InputError("--alpha only applies to the es and es_mean measures");
    }
    validate(spec);
    return spec;
}

RiskMeasureSpec measure(const Config& c, const InputOptions& o) {
    RiskMeasureSpec spec = ExpectedShortfall{};
    if (!o.measure.empty()) {
        spec = spec_from_json(Json{{"measure", o.measure}});
    } else if (c.has("measure")) {
        spec = spec_from_json(c.at("measure"));
    }
    return with_alpha(spec, o.alpha);
}

Budgets budgets(const Config& c, const InputOptions& o, Eigen::Index d) {
    if (!o.budgets.empty()) {
        Json a = Json::array();
        for (double b : o.budgets) {
            a.push_back(b);
        }
        return budgets_from_json(a, d);
    }
    return budgets_from_json(c.has("budgets") ? c.at("budgets") : Json(), d);
}

long long sample_size(const Config& c, const InputOptions& o) {
    long long n = kDefaultSampleSize;
    if (o.sample_size) {
        n = *o.sample_size;
    } else if (c.has("sample_size")) {
        if (!c.at("sample_size").is_number_integer()) {
            throw InputError("config: 'sample_size' must be an integer");
        }
        n = c.at("sample_size").get<long long>();
    }
    if (n < 2) {
        throw InputError("sample size must be >= 2");
    }
    return n;
}

ReturnModel require_model(const Config& c, const InputOptions& o) {
    const std::string path = string_field(c, "model", o.model);
    if (path.empty()) {
        throw InputError("a model file is required (--model or \"model\" in the configuration)");
    }
    return read_model_file(path);
}

std::filesystem::path output_path(const GlobalOptions& g, const std::string& name) {
    const std::filesystem::path dir(g.out);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw InputError("cannot create output directory '" + g.out + "': " + ec.message());
    }
    return dir / name;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw InputError("cannot write '" + path.string() + "'");
    }
    return os;
}

void write_json(const GlobalOptions& g, const std::string& name, const Json& j) {
    auto os = open_output(output_path(g, name));
    os << j.dump(2) << "\n";
}

void print_weights(const SolveReport& r) {
    std::cout << "measure: " << r.measure << "  method: " << to_string(r.method) << "\n";
    std::cout << std::left << std::setw(8) << "asset" << std::setw(12) << "weight"
              << "contribution\n";
    for (Eigen::Index i = 0; i < r.weights.size(); ++i) {
        std::cout << std::left << std::setw(8) << (i + 1) << std::setw(12)
                  << format_fixed(r.weights[i], 5) << format_fixed(r.contributions.contributions[i], 5)
                  << "\n";
    }
    std::cout << "total risk: " << format_fixed(r.contributions.total_risk, 5) << "\n";
    for (const auto& w : r.warnings) {
        std::cerr << "warning: " << w << "\n";
    }
}

}  // namespace

int run_reference(const GlobalOptions& g, const InputOptions& o) {
    const Config c = load_config(g);
    const ReturnModel model = require_model(c, o);
    const RiskMeasureSpec spec = measure(c, o);
    SolverConfig base;
    base.method = Method::reference;
    const SolverConfig cfg = solver_config(c, g, base);
    const SolveReport r = reference_solve(spec, budgets(c, o, dimension(model)), model, cfg);
    print_weights(r);
    write_json(g, "reference.json", report_to_json(r, !g.no_timing));
    return 0;
}

int run_solve(const GlobalOptions& g, const SolveOptions& o) {
    const Config c = load_config(g);
    SolverConfig base;
    if (!o.method.empty()) {
        base.method = method_from_string(o.method);
    }
    SolverConfig cfg = solver_config(c, g, base);
    if (!o.method.empty()) {
        cfg.method = base.method;
    }
    const RiskMeasureSpec spec = measure(c, o.input);
    const std::string sample_path = string_field(c, "sample", o.input.sample);

    SolveReport r = [&] {
        if (cfg.method == Method::reference || cfg.method == Method::msbgd) {
            const ReturnModel model = require_model(c, o.input);
            const Budgets b = budgets(c, o.input, dimension(model));
            return cfg.method == Method::reference ? reference_solve(spec, b, model, cfg)
                                                   : msbgd_solve(spec, b, model, cfg);
        }
        std::optional<ReturnModel> model;
        std::optional<ReturnSample> sample;
        if (!sample_path.empty()) {
            sample = read_sample_file(sample_path);
        } else {
            model = require_model(c, o.input);
            sample = sample_model(*model, sample_size(c, o.input), cfg.seed, cfg.jobs);
        }
        const Budgets b = budgets(c, o.input, sample->cols());
        SolveHooks hooks;
        if (model && has_exact_risk(spec)) {
            hooks.audit = exact_risk(spec, *model);
        }
        return cfg.method == Method::sgd ? sgd_solve(spec, b, *sample, cfg, hooks)
                                         : osbgd_solve(spec, b, *sample, cfg, hooks);
    }();
    print_weights(r);
    write_json(g, "solve.json", report_to_json(r, !g.no_timing));
    return 0;
}

int run_trace(const GlobalOptions& g, const InputOptions& o) {
    const Config c = load_config(g);
    const SolverConfig cfg = solver_config(c, g, SolverConfig{});
    const RiskMeasureSpec spec = measure(c, o);
    const std::string sample_path = string_field(c, "sample", o.sample);
    const ReturnSample sample = sample_path.empty()
                                    ? sample_model(require_model(c, o), sample_size(c, o), cfg.seed, cfg.jobs)
                                    : read_sample_file(sample_path);
    auto os = open_output(output_path(g, "trace.csv"));
    const SolveReport r = write_sgd_trace(os, spec, budgets(c, o, sample.cols()), sample, cfg);
    print_weights(r);
    write_json(g, "trace.json", report_to_json(r, !g.no_timing));
    return 0;
}

int run_study(const GlobalOptions& g, const StudyOptions& o) {
    const Config c = load_config(g);
    ExperimentSpec spec = c.has("study") ? experiment_from_json(c.at("study")) : ExperimentSpec{};
    if (!o.dims.empty()) {
        spec.dims.assign(o.dims.begin(), o.dims.end());
    }
    if (o.repetitions) {
        spec.repetitions = *o.repetitions;
    }
    if (!o.settings.empty()) {
        spec.settings.clear();
        for (const auto& s : o.settings) {
            spec.settings.push_back(setting_from_string(s));
        }
    }
    if (g.seed) {
        spec.seed = *g.seed;
    }
    if (g.jobs) {
        spec.jobs = *g.jobs;
    }
    spec.validate();

    const StudyResult result = run_accuracy_study(spec, [](const RepetitionResult& r) {
        std::cerr << "d=" << r.d << " rep=" << r.repetition << " " << to_string(r.setting) << " "
                  << to_string(r.method) << ": "
                  << (r.error.empty() ? format_fixed(r.accuracy, 2) : "error: " + r.error) << "\n";
    });
    {
        auto os = open_output(output_path(g, "study.csv"));
        write_bench_csv(os, result.rows, !g.no_timing);
    }
    {
        auto os = open_output(output_path(g, "study_repetitions.csv"));
        write_repetitions_csv(os, result.repetitions, !g.no_timing);
    }
    std::cout << std::left << std::setw(6) << "d" << std::setw(13) << "setting" << std::setw(11)
              << "method" << std::setw(16) << "accuracy" << std::setw(20) << "time (s)"
              << "errors\n";
    for (const auto& r : result.rows) {
        const std::string acc = format_fixed(r.accuracy_mean, 2) + " (" + format_fixed(r.accuracy_std, 2) + ")";
        const std::string time =
            g.no_timing ? "-" : format_fixed(r.time_mean, 3) + " (" + format_fixed(r.time_std, 3) + ")";
        std::cout << std::left << std::setw(6) << r.d << std::setw(13) << to_string(r.setting)
                  << std::setw(11) << to_string(r.method) << std::setw(16) << acc << std::setw(20)
                  << time << r.errors << "\n";
    }
    return 0;
}

int run_compare(const GlobalOptions& g, const InputOptions& o) {
    const Config c = load_config(g);
    const ReturnModel model = require_model(c, o);
    std::vector<RiskMeasureSpec> measures = default_comparison_measures();
    if (c.has("measures")) {
        const Json& a = c.at("measures");
        if (!a.is_array() || a.empty()) {
            throw InputError("config: 'measures' must be a non-empty array");
        }
        measures.clear();
        for (const auto& m : a) {
            measures.push_back(spec_from_json(m));
        }
    }
    const SolverConfig cfg = solver_config(c, g, SolverConfig{});
    const auto rows = compare_measures(model, measures, budgets(c, o, dimension(model)), cfg,
                                       sample_size(c, o));
    {
        auto os = open_output(output_path(g, "compare.csv"));
        write_comparison_csv(os, rows);
    }
    std::cout << std::left << std::setw(28) << "measure";
    for (Eigen::Index i = 0; i < dimension(model); ++i) {
        std::cout << std::setw(10) << ("asset " + std::to_string(i + 1));
    }
    std::cout << "\n";
    for (const auto& r : rows) {
        std::cout << std::left << std::setw(28) << r.measure;
        for (Eigen::Index i = 0; i < r.weights.size(); ++i) {
            std::cout << std::setw(10) << format_fixed(r.weights[i], 5);
        }
        std::cout << "\n";
        for (const auto& w : r.warnings) {
            std::cerr << "warning: " << w << "\n";
        }
    }
    return 0;
}

int run_fit(const GlobalOptions& g, const FitOptions& o) {
    const Config c = load_config(g);
    const ReturnSample sample = read_sample_file(o.sample);
    if (o.components < 1) {
        throw InputError("--components must be >= 1");
    }
    EMConfig em;
    em.seed = g.seed.value_or(0);
    ReturnModel model = [&]() -> ReturnModel {
        if (o.family == "tmix") {
            if (o.nu.size() != static_cast<std::size_t>(o.components)) {
                throw InputError("--nu needs one value per component");
            }
            auto fit = em_fit_tmix(sample, static_cast<std::size_t>(o.components), o.nu, em);
            std::cerr << "EM iterations: " << fit.iterations << (fit.converged ? "" : " (not converged)") << "\n";
            return fit.model;
        }
        if (o.family == "gmix") {
            auto fit = em_fit_gmix(sample, static_cast<std::size_t>(o.components), em);
            std::cerr << "EM iterations: " << fit.iterations << (fit.converged ? "" : " (not converged)") << "\n";
            return fit.model;
        }
        throw InputError("--family must be tmix or gmix");
    }();
    const auto path = output_path(g, "fitted_model.json");
    write_model_file(path.string(), model);
    std::cout << "wrote " << path.string() << "\n";
    return 0;
}

int run_sample(const GlobalOptions& g, const InputOptions& o) {
    const Config c = load_config(g);
    const ReturnModel model = require_model(c, o);
    const SolverConfig cfg = solver_config(c, g, SolverConfig{});
    const ReturnSample sample = sample_model(model, sample_size(c, o), cfg.seed, cfg.jobs);
    auto os = open_output(output_path(g, "sample.csv"));
    write_sample_csv(os, sample, true);
    std::cout << "wrote " << sample.rows() << " rows\n";
    return 0;
}

}  // namespace rbudget
