#pragma once

#include <complex>
#include <iosfwd>
#include <span>
#include <vector>

#include "esl/ensembles.hpp"

namespace esl {

// Sorted (ascending) eigenvalues of one sample.
struct EigList {
    std::vector<double> lambda;

    long count() const { return static_cast<long>(lambda.size()); }
};

struct EsdHistogram {
    std::vector<double> edges;  // strictly increasing, size B+1
    std::vector<long> counts;   // size B
    long n = 0;
    long out_of_range = 0;
};

// Full symmetric eigendecomposition (LAPACK dsyevd, eigenvalues only).
EigList eigenvalues_symmetric(const SymmetricMatrixSample& sample);

// 100 equal-width bins over [min - 0.05*range, max + 0.05*range].
std::vector<double> default_bin_edges(const EigList& eigs, int bins = 100);

// Half-open bins [e_i, e_{i+1}); the last bin is closed.
EsdHistogram esd_histogram(const EigList& eigs, std::span<const double> edges);

// (1/n) sum_i 1/(lambda_i - z); rejects real z.
std::complex<double> empirical_stieltjes(const EigList& eigs, std::complex<double> z);

// #{lambda_i <= t} / n (right-continuous) and #{lambda_i < t} / n.
double empirical_cdf(const EigList& eigs, double t);
double empirical_cdf_left(const EigList& eigs, double t);

// CSV "bin_left,bin_right,count,density", density = count / (n * width).
void write_csv(const EsdHistogram& hist, std::ostream& out);
// One eigenvalue per line, 17 significant digits.
void write_eigenvalues(const EigList& eigs, std::ostream& out);
EigList read_eigenvalues(std::istream& in);

}  // namespace esl
