#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "esl/experiment.hpp"

namespace {

using namespace esl;

struct CliOptions {
    std::string model;
    long n = 0, m = 0, r = 0, d = 0;
    std::string xi = "const:1";
    std::string cov = "isotropic";
    std::string law = "auto";
    int trials = 1;
    int bins = 100;
    std::uint64_t seed = 0;
    std::string eta;
    std::string out;
    std::string config_file;
};

EnsembleConfig to_ensemble(const CliOptions& opts) {
    EnsembleConfig config;
    config.model = parse_model(opts.model);
    config.n = opts.n;
    config.m = opts.m;
    config.r = opts.r;
    config.d = opts.d;
    config.xi = XiSpec::parse(opts.xi);
    config.cov = CovFamilySpec::parse(opts.cov);
    config.seed = opts.seed;
    return config;
}

void apply_config_file(CliOptions& opts) {
    if (opts.config_file.empty()) return;
    std::ifstream in(opts.config_file);
    if (!in) throw std::runtime_error("cannot open config file " + opts.config_file);
    const auto doc = nlohmann::json::parse(in);
    if (doc.contains("model")) opts.model = doc["model"].get<std::string>();
    if (doc.contains("n")) opts.n = doc["n"].get<long>();
    if (doc.contains("m")) opts.m = doc["m"].get<long>();
    if (doc.contains("r")) opts.r = doc["r"].get<long>();
    if (doc.contains("d")) opts.d = doc["d"].get<long>();
    if (doc.contains("xi")) opts.xi = doc["xi"].get<std::string>();
    if (doc.contains("cov")) opts.cov = doc["cov"].get<std::string>();
    if (doc.contains("law")) opts.law = doc["law"].get<std::string>();
    if (doc.contains("trials")) opts.trials = doc["trials"].get<int>();
    if (doc.contains("bins")) opts.bins = doc["bins"].get<int>();
    if (doc.contains("seed")) opts.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("eta")) opts.eta = doc["eta"].get<std::string>();
    if (doc.contains("out")) opts.out = doc["out"].get<std::string>();
}

std::vector<double> parse_eta(const std::string& text) {
    std::vector<double> out;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) out.push_back(std::stod(item));
    return out;
}

void add_model_flags(CLI::App* cmd, CliOptions& opts) {
    cmd->add_option("--model", opts.model,
                    "general-l | general-a | block-l | block-a");
    cmd->add_option("--n", opts.n, "matrix side (general models)");
    cmd->add_option("--m", opts.m, "number of rank-one terms (general models)");
    cmd->add_option("--r", opts.r, "number of node blocks (block models)");
    cmd->add_option("--d", opts.d, "block dimension (block models)");
    cmd->add_option("--xi", opts.xi,
                    "xi law: const:<b> | bernoulli:<p> | rademacher:<s> | "
                    "atoms:<v>@<p>,...");
    cmd->add_option("--cov", opts.cov, "isotropic | diag-paired:<amp> | sphere");
    cmd->add_option("--seed", opts.seed, "master seed");
}

int run_simulate(CliOptions& opts) {
    apply_config_file(opts);
    if (opts.out.empty()) throw std::runtime_error("simulate needs --out");
    ExperimentConfig config;
    config.ensemble = to_ensemble(opts);
    config.law = LawSpec::parse(opts.law);
    config.trials = opts.trials;
    config.bins = opts.bins;
    if (!opts.eta.empty()) config.eta_schedule = parse_eta(opts.eta);
    config.out_dir = opts.out;
    const ExperimentResult result = run_experiment(config);
    std::cout << "law " << result.law_descriptor << ", pooled n = "
              << result.pooled.count() << ", ks = " << result.report.ks << '\n';
    if (!result.solver_ok) {
        std::cerr << "solver residual certification failed\n";
        return 1;
    }
    return 0;
}

int run_theory(CliOptions& opts, double lambda_min, double lambda_max, int points) {
    apply_config_file(opts);
    if (opts.out.empty()) throw std::runtime_error("theory needs --out");
    LawSpec spec = LawSpec::parse(opts.law);
    std::unique_ptr<LimitLaw> law;
    if (spec.kind == LawSpec::Kind::Auto) {
        throw std::runtime_error("theory needs an explicit law, not auto");
    }
    if ((spec.kind == LawSpec::Kind::FixedPoint ||
         spec.kind == LawSpec::Kind::AdjacencyGeneral) &&
        !opts.model.empty()) {
        law = resolve_law(spec, to_ensemble(opts));
    } else {
        law = make_law(spec);
    }

    std::filesystem::create_directories(opts.out);
    bool solver_ok = true;
    {
        std::ofstream out(std::filesystem::path(opts.out) / "theory_density.csv");
        out << "# law=" << law->descriptor() << '\n'
            << "# version=" << kVersion << '\n';
        if (!law->caveat().empty()) out << "# caveat=" << law->caveat() << '\n';
        out << "lambda,density\n";
        out.precision(17);
        for (int i = 0; i <= points; ++i) {
            const double lambda = lambda_min + (lambda_max - lambda_min) * i / points;
            try {
                out << lambda << ',' << law->density(lambda) << '\n';
            } catch (const std::exception& err) {
                out << lambda << ",nan # " << err.what() << '\n';
                solver_ok = false;
            }
        }
    }
    {
        std::ofstream out(std::filesystem::path(opts.out) / "theory_cdf.csv");
        out << "# law=" << law->descriptor() << '\n'
            << "# version=" << kVersion << '\n';
        out << "lambda,cdf\n";
        out.precision(17);
        for (int i = 0; i <= points; ++i) {
            const double lambda = lambda_min + (lambda_max - lambda_min) * i / points;
            out << lambda << ',' << law->cdf(lambda) << '\n';
        }
    }
    {
        nlohmann::ordered_json doc;
        doc["law"] = law->descriptor();
        doc["version"] = kVersion;
        doc["atoms"] = nlohmann::ordered_json::array();
        for (const auto& atom : law->atoms()) {
            doc["atoms"].push_back({{"lambda", atom.location}, {"w", atom.weight}});
        }
        if (!law->caveat().empty()) doc["caveat"] = law->caveat();
        std::ofstream out(std::filesystem::path(opts.out) / "atoms.json");
        out << doc.dump(2) << '\n';
    }
    return solver_ok ? 0 : 1;
}

int run_compare(CliOptions& opts, const std::string& eigs_path) {
    apply_config_file(opts);
    std::ifstream in(eigs_path);
    if (!in) throw std::runtime_error("cannot open eigenvalue file " + eigs_path);
    const EigList eigs = read_eigenvalues(in);
    LawSpec spec = LawSpec::parse(opts.law);
    if (spec.kind == LawSpec::Kind::Auto) {
        throw std::runtime_error("compare needs an explicit law, not auto");
    }
    std::unique_ptr<LimitLaw> law;
    if ((spec.kind == LawSpec::Kind::FixedPoint ||
         spec.kind == LawSpec::Kind::AdjacencyGeneral) &&
        !opts.model.empty()) {
        law = resolve_law(spec, to_ensemble(opts));
    } else {
        law = make_law(spec);
    }
    const ComparisonReport report = compare(eigs, *law, 1, opts.seed);
    if (opts.out.empty()) {
        std::cout << report.to_json() << '\n';
    } else {
        std::filesystem::create_directories(opts.out);
        std::ofstream out(std::filesystem::path(opts.out) / "report.json");
        out << report.to_json() << '\n';
    }
    return 0;
}

int run_validate(CliOptions& opts) {
    apply_config_file(opts);
    const EnsembleConfig config = to_ensemble(opts);
    const EnsembleDiagnostics diag = validate_ensemble(config);
    nlohmann::ordered_json doc;
    doc["sup_op"] = diag.sup_op;
    doc["sup_trace_dev"] = diag.sup_trace_dev;
    doc["avg_hs_dev"] = diag.avg_hs_dev;
    doc["version"] = kVersion;
    std::cout << doc.dump(2) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Random-matrix spectral laboratory: weighted covariance sums, "
                 "block Laplacians/adjacencies, and their limit laws"};
    app.require_subcommand(1);

    CliOptions opts;
    double lambda_min = -5.0, lambda_max = 5.0;
    int points = 500;
    std::string eigs_path;

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo ESD experiment");
    add_model_flags(simulate, opts);
    simulate->add_option("--law", opts.law, "limit law selector or 'auto'");
    simulate->add_option("--trials", opts.trials, "Monte Carlo trials");
    simulate->add_option("--bins", opts.bins, "histogram bins");
    simulate->add_option("--eta", opts.eta, "inversion eta schedule, comma separated");
    simulate->add_option("--out", opts.out, "output directory");
    simulate->add_option("--config", opts.config_file, "JSON config mirroring the flags");

    auto* theory = app.add_subcommand("theory", "limit-law density/CDF curves");
    add_model_flags(theory, opts);
    theory->add_option("--law", opts.law, "limit law selector");
    theory->add_option("--lambda-min", lambda_min, "grid lower end");
    theory->add_option("--lambda-max", lambda_max, "grid upper end");
    theory->add_option("--points", points, "grid points");
    theory->add_option("--eta", opts.eta, "inversion eta schedule");
    theory->add_option("--out", opts.out, "output directory");
    theory->add_option("--config", opts.config_file, "JSON config mirroring the flags");

    auto* compare_cmd = app.add_subcommand("compare",
                                           "compare an eigenvalue file against a law");
    add_model_flags(compare_cmd, opts);
    compare_cmd->add_option("--eigs", eigs_path, "eigenvalue file (one per line)")
        ->required();
    compare_cmd->add_option("--law", opts.law, "limit law selector");
    compare_cmd->add_option("--out", opts.out, "output directory (default stdout)");
    compare_cmd->add_option("--config", opts.config_file, "JSON config");

    auto* validate = app.add_subcommand("validate", "covariance-family diagnostics");
    add_model_flags(validate, opts);
    validate->add_option("--config", opts.config_file, "JSON config");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) return run_simulate(opts);
        if (theory->parsed()) return run_theory(opts, lambda_min, lambda_max, points);
        if (compare_cmd->parsed()) return run_compare(opts, eigs_path);
        if (validate->parsed()) return run_validate(opts);
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 2;
    }
    return 0;
}
