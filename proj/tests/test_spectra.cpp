#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>

#include "esl/ensembles.hpp"
#include "esl/spectra.hpp"

using namespace esl;

namespace {

SymmetricMatrixSample blank(long n) {
    return SymmetricMatrixSample(n, 0, std::array<std::uint8_t, 32>{});
}

}  // namespace

TEST_CASE("eigenvalues of explicit small matrices") {
    SymmetricMatrixSample d = blank(3);
    d.at(0, 0) = 1.0;
    EigList eigs = eigenvalues_symmetric(d);
    CHECK(eigs.lambda[0] == doctest::Approx(0.0));
    CHECK(eigs.lambda[1] == doctest::Approx(0.0));
    CHECK(eigs.lambda[2] == doctest::Approx(1.0));

    SymmetricMatrixSample offdiag = blank(2);
    offdiag.at(1, 0) = 1.0;
    EigList pm = eigenvalues_symmetric(offdiag);
    CHECK(pm.lambda[0] == doctest::Approx(-1.0));
    CHECK(pm.lambda[1] == doctest::Approx(1.0));
}

TEST_CASE("single-spring block Laplacian spectrum") {
    EnsembleConfig config;
    config.model = Model::BlockL;
    config.r = 2;
    config.d = 3;
    config.xi = XiSpec::constant(1.0);
    config.seed = 7;
    EigList eigs = eigenvalues_symmetric(build_block_l(config));
    REQUIRE(eigs.count() == 6);
    for (int i = 0; i < 5; ++i)
        CHECK(eigs.lambda[size_t(i)] == doctest::Approx(0.0));
    CHECK(eigs.lambda[5] == doctest::Approx(2.0));
}

TEST_CASE("non-finite entries are rejected") {
    SymmetricMatrixSample bad = blank(2);
    bad.at(0, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS(eigenvalues_symmetric(bad));
}

TEST_CASE("eigenvalue sums match trace and HS norm") {
    EnsembleConfig config;
    config.model = Model::GeneralL;
    config.n = 300;
    config.m = 450;
    config.xi = XiSpec::rademacher(0.8);
    config.cov = CovFamilySpec::isotropic();
    config.seed = 97;
    SymmetricMatrixSample sample = build(config);
    EigList eigs = eigenvalues_symmetric(sample);
    double sum = 0.0, sum2 = 0.0;
    for (double l : eigs.lambda) {
        sum += l;
        sum2 += l * l;
    }
    CHECK(sum == doctest::Approx(sample.trace())
                     .epsilon(1e-8));
    CHECK(sum2 == doctest::Approx(sample.hs_norm_squared()).epsilon(1e-8));
}

TEST_CASE("histogram bins are half-open with a closed last bin") {
    EigList eigs{{1.0, 2.0, 3.0}};
    const std::array<double, 3> edges = {0.0, 2.0, 4.0};
    EsdHistogram hist = esd_histogram(eigs, edges);
    CHECK(hist.counts[0] == 1);
    CHECK(hist.counts[1] == 2);
    CHECK(hist.out_of_range == 0);
    CHECK(hist.n == 3);

    // Value exactly on the last edge lands in the final (closed) bin.
    EigList edge_case{{4.0}};
    EsdHistogram closed = esd_histogram(edge_case, edges);
    CHECK(closed.counts[1] == 1);
    CHECK(closed.out_of_range == 0);

    EigList outside{{-1.0, 5.0}};
    EsdHistogram oor = esd_histogram(outside, edges);
    CHECK(oor.out_of_range == 2);

    EigList gap{{0.5, 3.5}};
    EsdHistogram sparse = esd_histogram(gap, {std::array<double, 4>{
                                                 0.0, 1.0, 3.0, 4.0}});
    CHECK(sparse.counts[1] == 0);

    CHECK_THROWS(esd_histogram(eigs, std::array<double, 1>{0.0}));
    CHECK_THROWS(esd_histogram(eigs, std::array<double, 3>{0.0, 0.0, 1.0}));
}

TEST_CASE("histogram counts are permutation invariant") {
    EigList a{{3.0, 1.0, 2.0, 2.5}};
    EigList b{{2.5, 2.0, 1.0, 3.0}};
    const std::array<double, 4> edges = {0.0, 1.5, 2.6, 4.0};
    CHECK(esd_histogram(a, edges).counts == esd_histogram(b, edges).counts);
}

TEST_CASE("empirical Stieltjes transform values and bounds") {
    using namespace std::complex_literals;
    EigList zero{{0.0}};
    CHECK(std::abs(empirical_stieltjes(zero, 1i) - 1i) <= 1e-15);

    EigList one{{1.0}};
    const std::complex<double> expected = (1.0 + 2i) / 5.0;
    CHECK(std::abs(empirical_stieltjes(one, 2i) - expected) <= 1e-15);

    EigList several{{-2.0, 0.5, 3.0, 7.0}};
    const double eta = 1e6;
    const std::complex<double> s = empirical_stieltjes(several, eta * 1i);
    CHECK(std::abs(1i * eta * s + 1.0) <= 2.0 * 7.0 / eta);

    for (auto z : {0.3 + 2.0i, -1.0 - 0.5i}) {
        const std::complex<double> v = empirical_stieltjes(several, z);
        CHECK(v.imag() * z.imag() > 0.0);
        CHECK(std::abs(v) <= 1.0 / std::abs(z.imag()));
    }

    CHECK_THROWS(empirical_stieltjes(several, std::complex<double>(1.0, 0.0)));
}

TEST_CASE("empirical CDF staircase") {
    EigList eigs{{1.0, 2.0, 3.0}};
    CHECK(empirical_cdf(eigs, 2.0) == doctest::Approx(2.0 / 3.0));
    CHECK(empirical_cdf(eigs, 0.0) == 0.0);
    CHECK(empirical_cdf(eigs, 10.0) == 1.0);
    CHECK(empirical_cdf_left(eigs, 2.0) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("default bin edges pad the range by 5 percent") {
    EigList eigs{{0.0, 10.0}};
    auto edges = default_bin_edges(eigs, 100);
    REQUIRE(edges.size() == 101);
    CHECK(edges.front() == doctest::Approx(-0.5));
    CHECK(edges.back() == doctest::Approx(10.5));
    EsdHistogram hist = esd_histogram(eigs, edges);
    CHECK(hist.out_of_range == 0);
}

TEST_CASE("eigenvalue text round-trip keeps full precision") {
    EigList eigs{{-1.2345678901234567, 0.0, 3.3333333333333335e-7, 42.0}};
    std::stringstream buffer;
    write_eigenvalues(eigs, buffer);
    EigList back = read_eigenvalues(buffer);
    REQUIRE(back.count() == eigs.count());
    for (size_t i = 0; i < eigs.lambda.size(); ++i)
        CHECK(back.lambda[i] == eigs.lambda[i]);
}

TEST_CASE("histogram CSV serialization") {
    EigList eigs{{1.0, 2.0, 3.0}};
    const std::array<double, 3> edges = {0.0, 2.0, 4.0};
    std::stringstream out;
    write_csv(esd_histogram(eigs, edges), out);
    std::string header;
    std::getline(out, header);
    CHECK(header == "bin_left,bin_right,count,density");
    std::string row;
    std::getline(out, row);
    CHECK(row.find("0,2,1,") == 0);
}
