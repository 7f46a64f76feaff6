#include "esl/metrics.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace esl {

double ks_distance(const EigList& eigs, const LimitLaw& law) {
    // Finite-precision eigensolves return exact spectral atoms (e.g. the
    // kernel of a rank-deficient matrix) as values of size ~1e-15.  Snap
    // eigenvalues onto an atom location when they are within eigensolver
    // noise of it, so the staircase jumps where the law's CDF jumps.
    EigList snapped = eigs;
    for (const auto& atom : law.atoms()) {
        const double tol = 1e-8 * std::max(1.0, std::abs(atom.location));
        for (double& lambda : snapped.lambda) {
            if (std::abs(lambda - atom.location) <= tol) lambda = atom.location;
        }
    }
    std::sort(snapped.lambda.begin(), snapped.lambda.end());
    const EigList& data = snapped;

    std::vector<double> points = data.lambda;
    for (const auto& atom : law.atoms()) points.push_back(atom.location);
    for (const auto& interval : law.support()) {
        points.push_back(interval.lo);
        points.push_back(interval.hi);
    }
    double sup = 0.0;
    for (double t : points) {
        sup = std::max(sup, std::abs(empirical_cdf(data, t) - law.cdf(t)));
        sup = std::max(sup, std::abs(empirical_cdf_left(data, t) - law.cdf_left(t)));
    }
    return sup;
}

std::vector<double> esd_moments(const EigList& eigs, int j_max) {
    if (j_max < 1) throw std::invalid_argument("j_max must be >= 1");
    std::vector<double> out(static_cast<std::size_t>(j_max), 0.0);
    for (double lambda : eigs.lambda) {
        double power = lambda;
        for (int j = 1; j <= j_max; ++j) {
            out[static_cast<std::size_t>(j - 1)] += power;
            power *= lambda;
        }
    }
    for (double& value : out) value /= static_cast<double>(eigs.count());
    return out;
}

std::vector<double> law_moments(const LimitLaw& law, int j_max) {
    if (j_max < 1) throw std::invalid_argument("j_max must be >= 1");
    std::vector<double> out(static_cast<std::size_t>(j_max), 0.0);
    for (const auto& atom : law.atoms()) {
        double power = atom.location;
        for (int j = 1; j <= j_max; ++j) {
            out[static_cast<std::size_t>(j - 1)] += atom.weight * power;
            power *= atom.location;
        }
    }
    // Same edge-absorbing substitution as the CDF tables.
    constexpr std::size_t kNodes = 8193;
    constexpr double kPi = std::numbers::pi;
    for (const auto& interval : law.support()) {
        const double width = interval.hi - interval.lo;
        if (!(width > 0.0)) continue;
        const double dt = 1.0 / static_cast<double>(kNodes - 1);
        std::vector<double> previous(static_cast<std::size_t>(j_max), 0.0);
        for (std::size_t i = 1; i < kNodes; ++i) {
            const double t = static_cast<double>(i) * dt;
            const double s = std::sin(0.5 * kPi * t);
            const double lambda = interval.lo + width * s * s;
            const double jacobian = width * 0.5 * kPi * std::sin(kPi * t);
            const double base = law.density(lambda) * jacobian;
            double power = lambda;
            for (int j = 1; j <= j_max; ++j) {
                const double value = base * power;
                out[static_cast<std::size_t>(j - 1)] +=
                    0.5 * dt * (previous[static_cast<std::size_t>(j - 1)] + value);
                previous[static_cast<std::size_t>(j - 1)] = value;
                power *= lambda;
            }
        }
    }
    return out;
}

ComparisonReport compare(const EigList& eigs, const LimitLaw& law, int trials,
                         std::uint64_t seed, int j_max) {
    ComparisonReport report;
    report.ks = ks_distance(eigs, law);
    const auto emp = esd_moments(eigs, j_max);
    const auto theory = law_moments(law, j_max);
    for (int j = 1; j <= j_max; ++j) {
        const std::size_t k = static_cast<std::size_t>(j - 1);
        report.moment_diffs.push_back(
            {j, emp[k], theory[k], std::abs(emp[k] - theory[k])});
    }
    report.n = eigs.count();
    report.trials = trials;
    report.seed = seed;
    report.law = law.descriptor();
    return report;
}

std::string ComparisonReport::to_json(int indent) const {
    nlohmann::ordered_json doc;
    doc["ks"] = ks;
    doc["moments"] = nlohmann::ordered_json::array();
    for (const auto& diff : moment_diffs) {
        doc["moments"].push_back({{"j", diff.j},
                                  {"emp", diff.empirical},
                                  {"theory", diff.theoretical},
                                  {"diff", diff.abs_diff}});
    }
    doc["n"] = n;
    doc["trials"] = trials;
    doc["seed"] = seed;
    doc["law"] = law;
    return doc.dump(indent);
}

}  // namespace esl
