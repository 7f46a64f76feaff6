#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "esl/ensembles.hpp"
#include "esl/limits.hpp"
#include "esl/metrics.hpp"

namespace esl {

inline constexpr const char* kVersion = "0.1.0";

// Limit-law selector, parseable from the CLI (--law) or derived from the
// model ("auto").
struct LawSpec {
    enum class Kind {
        Auto,
        Mp,
        ShiftedSemicircle,
        BlockLaplacian,
        EffectiveMedium,
        FixedPoint,
        AdjacencyGeneral,
    };

    Kind kind = Kind::Auto;
    double b = 1.0, c1 = 1.0;   // mp
    double sc_c1 = 0.0, sc_c2 = 1.0;  // shifted semicircle
    double c = 1.0;             // block laplacian / effective medium
    double a = 1.0;             // fixed-point scale
    std::optional<WeightMeasure> measure;  // fixed-point / adjacency-general

    // Grammar: auto | mp:<b>,<c1> | semicircle | shifted-semicircle:<c1>,<c2>
    // | block-laplacian:<c> | effective-medium:<c> | fixed-point[:<a>]
    // (measure from the model's xi) | adjacency-general.
    static LawSpec parse(std::string_view text);
    std::string descriptor() const;
};

// Resolves "auto" against the model ensemble's limiting law and returns a
// concrete law. Throws when auto is undefined for the configuration.
std::unique_ptr<LimitLaw> resolve_law(const LawSpec& spec,
                                      const EnsembleConfig& config);
std::unique_ptr<LimitLaw> make_law(const LawSpec& spec);

struct ExperimentConfig {
    EnsembleConfig ensemble;
    LawSpec law;
    int trials = 1;
    int bins = 100;
    std::vector<double> eta_schedule;  // empty = default
    std::filesystem::path out_dir;
};

struct ExperimentResult {
    ComparisonReport report;
    EigList pooled;
    std::string law_descriptor;
    bool solver_ok = true;  // all law-solver residual certifications passed
};

// Runs the Monte Carlo trials (worker pool sized by ESL_THREADS), pools
// eigenvalues across trials, and writes esd.csv, theory_density.csv,
// report.json, eigs_trial<k>.txt into out_dir.
ExperimentResult run_experiment(const ExperimentConfig& config);

int env_thread_count();

}  // namespace esl
