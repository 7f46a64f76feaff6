#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "esl/limits.hpp"
#include "esl/spectra.hpp"

namespace esl {

struct MomentDiff {
    int j = 0;
    double empirical = 0.0;
    double theoretical = 0.0;
    double abs_diff = 0.0;
};

struct ComparisonReport {
    double ks = 0.0;
    std::vector<MomentDiff> moment_diffs;
    long n = 0;
    int trials = 0;
    std::uint64_t seed = 0;
    std::string law;

    std::string to_json(int indent = 2) const;
};

// Sup over eigenvalues, law atoms, and support edges of the CDF gap,
// evaluated at both t and t-.
double ks_distance(const EigList& eigs, const LimitLaw& law);

// (1/n) sum lambda_i^j, j = 1..j_max.
std::vector<double> esd_moments(const EigList& eigs, int j_max);

// Law moments: atoms plus edge-substituted quadrature of the density.
std::vector<double> law_moments(const LimitLaw& law, int j_max);

ComparisonReport compare(const EigList& eigs, const LimitLaw& law, int trials,
                         std::uint64_t seed, int j_max = 4);

}  // namespace esl
