#include "esl/experiment.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <future>
#include <mutex>
#include <semaphore>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace esl {

namespace {

double parse_real(std::string_view text, const char* what) {
    try {
        std::size_t pos = 0;
        const double value = std::stod(std::string(text), &pos);
        if (pos != text.size()) throw std::invalid_argument("trailing junk");
        return value;
    } catch (const std::exception&) {
        throw std::invalid_argument(std::string("cannot parse ") + what + " from '" +
                                    std::string(text) + "'");
    }
}

std::vector<double> split_reals(std::string_view text, const char* what) {
    std::vector<double> out;
    while (!text.empty()) {
        auto comma = text.find(',');
        out.push_back(parse_real(text.substr(0, comma), what));
        text = comma == std::string_view::npos ? std::string_view{}
                                               : text.substr(comma + 1);
    }
    return out;
}

std::string hex_digest(const std::array<std::uint8_t, 32>& digest) {
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(64);
    for (std::uint8_t byte : digest) {
        out.push_back(hex[byte >> 4]);
        out.push_back(hex[byte & 0xf]);
    }
    return out;
}

void write_provenance(std::ostream& out, const EnsembleConfig& config) {
    out << "# config_digest=" << hex_digest(config.digest()) << '\n'
        << "# seed=" << config.seed << '\n'
        << "# version=" << kVersion << '\n';
}

}  // namespace

LawSpec LawSpec::parse(std::string_view text) {
    LawSpec spec;
    auto colon = text.find(':');
    const std::string_view head = text.substr(0, colon);
    const std::string_view tail = colon == std::string_view::npos
                                      ? std::string_view{}
                                      : text.substr(colon + 1);
    if (head == "auto") {
        spec.kind = Kind::Auto;
    } else if (head == "mp") {
        spec.kind = Kind::Mp;
        const auto params = split_reals(tail, "mp parameters");
        if (params.size() != 2) throw std::invalid_argument("mp wants mp:<b>,<c1>");
        spec.b = params[0];
        spec.c1 = params[1];
    } else if (head == "semicircle") {
        spec.kind = Kind::ShiftedSemicircle;
        spec.sc_c1 = 0.0;
        spec.sc_c2 = 1.0;
    } else if (head == "shifted-semicircle") {
        spec.kind = Kind::ShiftedSemicircle;
        const auto params = split_reals(tail, "shifted-semicircle parameters");
        if (params.size() != 2) {
            throw std::invalid_argument(
                "shifted-semicircle wants shifted-semicircle:<c1>,<c2>");
        }
        spec.sc_c1 = params[0];
        spec.sc_c2 = params[1];
    } else if (head == "block-laplacian") {
        spec.kind = Kind::BlockLaplacian;
        spec.c = parse_real(tail, "block-laplacian c");
    } else if (head == "effective-medium") {
        spec.kind = Kind::EffectiveMedium;
        spec.c = parse_real(tail, "effective-medium c");
    } else if (head == "fixed-point") {
        spec.kind = Kind::FixedPoint;
        spec.a = tail.empty() ? 1.0 : parse_real(tail, "fixed-point a");
    } else if (head == "adjacency-general") {
        spec.kind = Kind::AdjacencyGeneral;
    } else {
        throw std::invalid_argument("unknown law '" + std::string(text) + "'");
    }
    return spec;
}

std::string LawSpec::descriptor() const {
    switch (kind) {
        case Kind::Auto:
            return "auto";
        case Kind::Mp:
        case Kind::ShiftedSemicircle:
        case Kind::BlockLaplacian:
        case Kind::EffectiveMedium:
        case Kind::FixedPoint:
        case Kind::AdjacencyGeneral:
            return make_law(*this)->descriptor();
    }
    return {};
}

std::unique_ptr<LimitLaw> make_law(const LawSpec& spec) {
    switch (spec.kind) {
        case LawSpec::Kind::Auto:
            throw std::invalid_argument("auto law needs a model to resolve against");
        case LawSpec::Kind::Mp:
            return make_mp_law(spec.b, spec.c1);
        case LawSpec::Kind::ShiftedSemicircle:
            return make_shifted_semicircle_law(spec.sc_c1, spec.sc_c2);
        case LawSpec::Kind::BlockLaplacian:
            return make_block_laplacian_law(spec.c);
        case LawSpec::Kind::EffectiveMedium:
            return make_effective_medium_law(spec.c);
        case LawSpec::Kind::FixedPoint:
            if (!spec.measure) {
                throw std::invalid_argument("fixed-point law needs a weight measure");
            }
            return make_fixed_point_law(*spec.measure, spec.a);
        case LawSpec::Kind::AdjacencyGeneral:
            if (!spec.measure) {
                throw std::invalid_argument("adjacency-general law needs a weight measure");
            }
            return make_adjacency_general_law(*spec.measure);
    }
    throw std::invalid_argument("unknown law kind");
}

namespace {

WeightMeasure model_measure(const EnsembleConfig& config) {
    long terms = 0, side = 0;
    if (config.model == Model::GeneralL || config.model == Model::GeneralA) {
        terms = config.m;
        side = config.n;
    } else {
        terms = config.r * (config.r - 1) / 2;
        side = config.r * config.d;
    }
    return measure_from_xi(config.xi, terms, side);
}

double bernoulli_c(const EnsembleConfig& config) {
    double p = 0.0;
    if (config.xi.kind == XiSpec::Kind::Bernoulli) {
        p = config.xi.p;
    } else if (config.xi.kind == XiSpec::Kind::Const && config.xi.b == 1.0) {
        p = 1.0;  // deterministic edge: Bernoulli with p = 1
    } else {
        throw std::invalid_argument(
            "auto law for this block model expects Bernoulli (0/1) xi");
    }
    return static_cast<double>(config.r) * p / static_cast<double>(config.d);
}

}  // namespace

std::unique_ptr<LimitLaw> resolve_law(const LawSpec& spec,
                                      const EnsembleConfig& config) {
    if (spec.kind != LawSpec::Kind::Auto) {
        LawSpec concrete = spec;
        if ((spec.kind == LawSpec::Kind::FixedPoint ||
             spec.kind == LawSpec::Kind::AdjacencyGeneral) &&
            !spec.measure) {
            concrete.measure = model_measure(config);
        }
        return make_law(concrete);
    }
    switch (config.model) {
        case Model::GeneralL:
            return make_fixed_point_law(measure_from_xi(config.xi, config.m, config.n),
                                        1.0);
        case Model::BlockL:
            return make_block_laplacian_law(bernoulli_c(config));
        case Model::BlockA: {
            if (config.xi.kind == XiSpec::Kind::Rademacher) {
                const double expected =
                    std::sqrt(static_cast<double>(config.d) / static_cast<double>(config.r));
                if (std::abs(config.xi.s - expected) > 1e-9 * expected) {
                    throw std::invalid_argument(
                        "auto semicircle law expects rademacher s = sqrt(d/r)");
                }
                return make_shifted_semicircle_law(0.0, 1.0);
            }
            return make_effective_medium_law(bernoulli_c(config));
        }
        case Model::GeneralA:
            throw std::invalid_argument(
                "auto law is not defined for general-a; pass an explicit law");
    }
    throw std::invalid_argument("unknown model");
}

int env_thread_count() {
    if (const char* text = std::getenv("ESL_THREADS")) {
        const int value = std::atoi(text);
        if (value >= 1) return value;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

namespace {

// LAPACK calls are serialized: one dense eigensolve already saturates
// memory bandwidth, and trial-level concurrency stays useful for assembly.
std::mutex eigensolve_mutex;

std::uint64_t trial_seed(std::uint64_t seed, int trial) {
    Stream stream(seed, /*tag=*/0x7472696cULL, static_cast<std::uint64_t>(trial));
    return stream.next_u64();
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
    config.ensemble.validate();
    if (config.trials < 1) throw std::invalid_argument("trials must be >= 1");
    if (config.bins < 1) throw std::invalid_argument("bins must be >= 1");
    std::filesystem::create_directories(config.out_dir);

    auto law = resolve_law(config.law, config.ensemble);

    const int workers =
        std::clamp(std::min(env_thread_count(), config.trials), 1, 64);
    std::counting_semaphore<64> slots(workers);
    std::vector<std::future<EigList>> futures;
    futures.reserve(static_cast<std::size_t>(config.trials));
    for (int trial = 0; trial < config.trials; ++trial) {
        futures.push_back(std::async(std::launch::async, [&, trial] {
            slots.acquire();
            EnsembleConfig per_trial = config.ensemble;
            per_trial.seed = trial_seed(config.ensemble.seed, trial);
            const SymmetricMatrixSample sample = build(per_trial);
            EigList eigs;
            {
                std::lock_guard<std::mutex> lock(eigensolve_mutex);
                eigs = eigenvalues_symmetric(sample);
            }
            slots.release();
            return eigs;
        }));
    }

    ExperimentResult result;
    for (int trial = 0; trial < config.trials; ++trial) {
        const EigList eigs = futures[static_cast<std::size_t>(trial)].get();
        std::ofstream out(config.out_dir /
                          ("eigs_trial" + std::to_string(trial) + ".txt"));
        write_provenance(out, config.ensemble);
        write_eigenvalues(eigs, out);
        result.pooled.lambda.insert(result.pooled.lambda.end(), eigs.lambda.begin(),
                                    eigs.lambda.end());
    }
    std::sort(result.pooled.lambda.begin(), result.pooled.lambda.end());

    const auto edges = default_bin_edges(result.pooled, config.bins);
    const EsdHistogram hist = esd_histogram(result.pooled, edges);
    {
        std::ofstream out(config.out_dir / "esd.csv");
        write_provenance(out, config.ensemble);
        write_csv(hist, out);
    }

    // Theory density over the histogram range; solver failures are recorded
    // per grid point and flip the certification flag.
    {
        std::ofstream out(config.out_dir / "theory_density.csv");
        write_provenance(out, config.ensemble);
        if (!law->caveat().empty()) out << "# caveat=" << law->caveat() << '\n';
        out << "lambda,density\n";
        out.precision(17);
        const int points = 512;
        for (int i = 0; i <= points; ++i) {
            const double lambda =
                edges.front() + (edges.back() - edges.front()) * i / points;
            try {
                out << lambda << ',' << law->density(lambda) << '\n';
            } catch (const std::exception& err) {
                out << lambda << ",nan # " << err.what() << '\n';
                result.solver_ok = false;
            }
        }
    }

    // Residual certification sweep of the law solver across the window.
    for (double eta : {1e-2, 1.0, 1e2}) {
        for (int i = 0; i <= 8; ++i) {
            const double lambda =
                edges.front() + (edges.back() - edges.front()) * i / 8;
            const SolveReport report = law->stieltjes(Complex(lambda, eta));
            if (!report.ok) result.solver_ok = false;
        }
    }

    result.report =
        compare(result.pooled, *law, config.trials, config.ensemble.seed);
    result.law_descriptor = law->descriptor();

    nlohmann::ordered_json doc =
        nlohmann::ordered_json::parse(result.report.to_json());
    doc["config_digest"] = hex_digest(config.ensemble.digest());
    doc["version"] = kVersion;
    doc["solver_ok"] = result.solver_ok;
    if (!law->caveat().empty()) doc["caveat"] = law->caveat();
    {
        std::ofstream out(config.out_dir / "report.json");
        out << doc.dump(2) << '\n';
    }
    return result;
}

}  // namespace esl
