#include "commands.hpp"

#include "riskbudget/errors.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>

namespace {

void add_input_options(CLI::App* cmd, rbudget::InputOptions& o, bool with_sample) {
    cmd->add_option("--model", o.model, "Model JSON file");
    if (with_sample) {
        cmd->add_option("--sample", o.sample, "Return sample CSV (one row per scenario)");
    }
    cmd->add_option("--budgets", o.budgets, "Risk budgets, comma separated (default: equal)")
        ->delimiter(',');
    cmd->add_option("--alpha", o.alpha, "ES confidence level");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Risk budgeting portfolios for ES, spectral and deviation measures"};
    app.require_subcommand(1);
    app.fallthrough();  // global options may follow the subcommand

    rbudget::GlobalOptions g;
    app.add_option("--config", g.config, "JSON configuration file");
    app.add_option("--seed", g.seed, "Master seed (overrides the configuration)");
    app.add_option("--jobs", g.jobs, "Worker threads")->check(CLI::PositiveNumber);
    app.add_option("--out", g.out, "Output directory")->capture_default_str();
    app.add_flag("--no-timing", g.no_timing, "Leave wall times out of every output file");

    rbudget::InputOptions reference;
    auto* ref_cmd = app.add_subcommand("reference", "Semi-analytic reference portfolio for a model");
    add_input_options(ref_cmd, reference, false);
    ref_cmd->add_option("--measure", reference.measure, "Measure kind (es, es_mean, spectral, volatility)");

    rbudget::SolveOptions solve;
    auto* solve_cmd = app.add_subcommand("solve", "Solve on a sample or on a model");
    add_input_options(solve_cmd, solve.input, true);
    solve_cmd->add_option("--measure", solve.input.measure, "Measure kind");
    solve_cmd->add_option("--method", solve.method, "sgd, osbgd, msbgd or reference");
    solve_cmd->add_option("--sample-size", solve.input.sample_size, "Draws simulated from --model");

    rbudget::InputOptions trace;
    auto* trace_cmd = app.add_subcommand("trace", "Write the SGD iterates to trace.csv");
    add_input_options(trace_cmd, trace, true);
    trace_cmd->add_option("--measure", trace.measure, "Measure kind");
    trace_cmd->add_option("--sample-size", trace.sample_size, "Draws simulated from --model");

    rbudget::StudyOptions study;
    auto* study_cmd = app.add_subcommand("study", "Accuracy and timing study on synthetic models");
    study_cmd->add_option("--dims", study.dims, "Dimensions, comma separated")->delimiter(',');
    study_cmd->add_option("--repetitions", study.repetitions, "Repetitions per dimension");
    study_cmd->add_option("--settings", study.settings,
                          "model_free, true_params, tmix_em, gmix_em (comma separated)")
        ->delimiter(',');

    rbudget::InputOptions compare;
    auto* compare_cmd = app.add_subcommand("compare", "Risk budgeting portfolios across measures");
    add_input_options(compare_cmd, compare, false);
    compare_cmd->add_option("--sample-size", compare.sample_size, "Simulated draws");

    rbudget::FitOptions fit;
    auto* fit_cmd = app.add_subcommand("fit", "Fit a mixture model to a return sample by EM");
    fit_cmd->add_option("--sample", fit.sample, "Return sample CSV")->required();
    fit_cmd->add_option("--family", fit.family, "tmix or gmix")->capture_default_str();
    fit_cmd->add_option("--components", fit.components, "Mixture components")->capture_default_str();
    fit_cmd->add_option("--nu", fit.nu, "Fixed degrees of freedom (tmix)")->delimiter(',');

    rbudget::InputOptions sample;
    auto* sample_cmd = app.add_subcommand("sample", "Draw a seeded sample from a model");
    add_input_options(sample_cmd, sample, false);
    sample_cmd->add_option("--n", sample.sample_size, "Number of draws")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (ref_cmd->parsed()) {
            return rbudget::run_reference(g, reference);
        }
        if (solve_cmd->parsed()) {
            return rbudget::run_solve(g, solve);
        }
        if (trace_cmd->parsed()) {
            return rbudget::run_trace(g, trace);
        }
        if (study_cmd->parsed()) {
            return rbudget::run_study(g, study);
        }
        if (compare_cmd->parsed()) {
            return rbudget::run_compare(g, compare);
        }
        if (fit_cmd->parsed()) {
            return rbudget::run_fit(g, fit);
        }
        return rbudget::run_sample(g, sample);
    } catch (const riskbudget::InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const riskbudget::NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 2;
    }
}
