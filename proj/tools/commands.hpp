#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rbudget {

struct GlobalOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> jobs;
    std::string out = ".";
    bool no_timing = false;
};

// Options shared by the commands that read a model or a sample.
struct InputOptions {
    std::string model;
    std::string sample;
    std::vector<double> budgets;
    std::string measure;  // kind name; empty: config or command default
    std::optional<double> alpha;
    std::optional<long long> sample_size;
};

struct SolveOptions {
    InputOptions input;
    std::string method;
};

struct StudyOptions {
    std::vector<long long> dims;
    std::optional<int> repetitions;
    std::vector<std::string> settings;
};

struct FitOptions {
    std::string sample;
    std::string family = "tmix";
    int components = 2;
    std::vector<double> nu{4.0, 2.5};
};

int run_reference(const GlobalOptions& g, const InputOptions& o);
int run_solve(const GlobalOptions& g, const SolveOptions& o);
int run_trace(const GlobalOptions& g, const InputOptions& o);
int run_study(const GlobalOptions& g, const StudyOptions& o);
int run_compare(const GlobalOptions& g, const InputOptions& o);
int run_fit(const GlobalOptions& g, const FitOptions& o);
int run_sample(const GlobalOptions& g, const InputOptions& o);

}  // namespace rbudget
