#include "esl/spectra.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace esl {

EigList eigenvalues_symmetric(const SymmetricMatrixSample& sample) {
    const long n = sample.side();
    for (double value : sample.lower_triangle()) {
        if (!std::isfinite(value)) {
            throw std::invalid_argument("matrix has non-finite entries");
        }
    }
    // Column-major full storage, lower triangle referenced.
    std::vector<double> full(static_cast<std::size_t>(n) * n, 0.0);
    for (long j = 0; j < n; ++j) {
        for (long i = j; i < n; ++i) {
            full[static_cast<std::size_t>(j) * n + i] = sample(i, j);
        }
    }
    EigList eigs;
    eigs.lambda.resize(static_cast<std::size_t>(n));
    const lapack_int info = LAPACKE_dsyevd(
        LAPACK_COL_MAJOR, 'N', 'L', static_cast<lapack_int>(n), full.data(),
        static_cast<lapack_int>(n), eigs.lambda.data());
    if (info != 0) {
        throw std::runtime_error("dsyevd failed with info = " + std::to_string(info));
    }
    std::sort(eigs.lambda.begin(), eigs.lambda.end());
    return eigs;
}

std::vector<double> default_bin_edges(const EigList& eigs, int bins) {
    if (eigs.lambda.empty()) throw std::invalid_argument("empty eigenvalue list");
    const double lo = eigs.lambda.front();
    const double hi = eigs.lambda.back();
    double range = hi - lo;
    if (range == 0.0) range = std::max(1.0, std::abs(lo));
    const double left = lo - 0.05 * range;
    const double right = hi + 0.05 * range;
    std::vector<double> edges(static_cast<std::size_t>(bins) + 1);
    for (int i = 0; i <= bins; ++i) {
        edges[static_cast<std::size_t>(i)] =
            left + (right - left) * static_cast<double>(i) / bins;
    }
    return edges;
}

EsdHistogram esd_histogram(const EigList& eigs, std::span<const double> edges) {
    if (edges.size() < 2) throw std::invalid_argument("need at least 2 bin edges");
    for (std::size_t i = 1; i < edges.size(); ++i) {
        if (!(edges[i] > edges[i - 1])) {
            throw std::invalid_argument("bin edges must be strictly increasing");
        }
    }
    EsdHistogram hist;
    hist.edges.assign(edges.begin(), edges.end());
    hist.counts.assign(edges.size() - 1, 0);
    hist.n = eigs.count();
    for (double lambda : eigs.lambda) {
        if (lambda < edges.front() || lambda > edges.back()) {
            ++hist.out_of_range;
            continue;
        }
        auto it = std::upper_bound(hist.edges.begin(), hist.edges.end(), lambda);
        std::size_t bin = static_cast<std::size_t>(it - hist.edges.begin());
        bin = (bin == 0) ? 0 : bin - 1;
        if (bin >= hist.counts.size()) bin = hist.counts.size() - 1;  // last bin closed
        ++hist.counts[bin];
    }
    return hist;
}

std::complex<double> empirical_stieltjes(const EigList& eigs, std::complex<double> z) {
    if (z.imag() == 0.0) throw std::invalid_argument("z must be non-real");
    if (eigs.lambda.empty()) throw std::invalid_argument("empty eigenvalue list");
    std::complex<double> sum = 0.0;
    for (double lambda : eigs.lambda) sum += 1.0 / (lambda - z);
    return sum / static_cast<double>(eigs.count());
}

double empirical_cdf(const EigList& eigs, double t) {
    const auto it = std::upper_bound(eigs.lambda.begin(), eigs.lambda.end(), t);
    return static_cast<double>(it - eigs.lambda.begin()) /
           static_cast<double>(eigs.count());
}

double empirical_cdf_left(const EigList& eigs, double t) {
    const auto it = std::lower_bound(eigs.lambda.begin(), eigs.lambda.end(), t);
    return static_cast<double>(it - eigs.lambda.begin()) /
           static_cast<double>(eigs.count());
}

void write_csv(const EsdHistogram& hist, std::ostream& out) {
    out << "bin_left,bin_right,count,density\n";
    out.precision(17);
    for (std::size_t i = 0; i < hist.counts.size(); ++i) {
        const double width = hist.edges[i + 1] - hist.edges[i];
        const double density =
            static_cast<double>(hist.counts[i]) / (static_cast<double>(hist.n) * width);
        out << hist.edges[i] << ',' << hist.edges[i + 1] << ',' << hist.counts[i]
            << ',' << density << '\n';
    }
}

void write_eigenvalues(const EigList& eigs, std::ostream& out) {
    out.precision(17);
    for (double lambda : eigs.lambda) out << lambda << '\n';
}

EigList read_eigenvalues(std::istream& in) {
    EigList eigs;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        eigs.lambda.push_back(std::stod(line));
    }
    std::sort(eigs.lambda.begin(), eigs.lambda.end());
    return eigs;
}

}  // namespace esl
