#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "esl/measure.hpp"
#include "esl/rng.hpp"

namespace esl {

enum class CovFamily { Isotropic, DiagPaired, SphereUniform };

struct CovFamilySpec {
    CovFamily kind = CovFamily::Isotropic;
    double amp = 0.0;  // DiagPaired perturbation amplitude, in (0,1)

    static CovFamilySpec isotropic();
    static CovFamilySpec diag_paired(double amp);
    static CovFamilySpec sphere_uniform();

    // CLI grammar: isotropic | diag-paired:<amp> | sphere
    static CovFamilySpec parse(std::string_view text);
    std::string to_string() const;
};

enum class Model { GeneralL, GeneralA, BlockL, BlockA };

std::string model_name(Model model);
Model parse_model(std::string_view text);

struct EnsembleConfig {
    Model model = Model::GeneralL;
    long n = 0;  // General*: matrix side
    long m = 0;  // General*: number of rank-one terms
    long r = 0;  // Block*: number of node blocks
    long d = 0;  // Block*: block dimension (side = r*d)
    XiSpec xi;
    CovFamilySpec cov;  // General* vector family
    std::uint64_t seed = 0;

    long side() const;
    void validate() const;  // throws std::invalid_argument listing all problems

    // Canonical text form hashed into the 32-byte config digest.
    std::string canonical() const;
    std::array<std::uint8_t, 32> digest() const;
};

// One realized symmetric matrix; only the lower triangle is stored, so
// symmetry is exact by construction.
class SymmetricMatrixSample {
public:
    SymmetricMatrixSample(long n, std::uint64_t seed,
                          const std::array<std::uint8_t, 32>& digest);

    long side() const { return n_; }
    std::uint64_t seed() const { return seed_; }
    const std::array<std::uint8_t, 32>& config_digest() const { return digest_; }

    // Symmetric element access; (i, j) and (j, i) read the same slot.
    double operator()(long i, long j) const {
        return tri_[slot(i, j)];
    }
    double& at(long i, long j) { return tri_[slot(i, j)]; }

    double trace() const;
    double hs_norm_squared() const;  // ||M||_HS^2 = sum of all entry squares

    const std::vector<double>& lower_triangle() const { return tri_; }

    // Binary container: magic "ESL1", side (u64 LE), seed (u64 LE),
    // 32-byte config digest, lower triangle row-major as f64 LE.
    void save(std::ostream& out) const;
    static SymmetricMatrixSample load(std::istream& in);

private:
    std::size_t slot(long i, long j) const {
        if (i < j) std::swap(i, j);
        return static_cast<std::size_t>(i) * (i + 1) / 2 + j;
    }

    long n_;
    std::uint64_t seed_;
    std::array<std::uint8_t, 32> digest_;
    std::vector<double> tri_;  // row-major lower triangle
};

struct EnsembleDiagnostics {
    double sup_op = 0.0;         // max_alpha n * ||Q_alpha||_op
    double sup_trace_dev = 0.0;  // max_alpha |Tr Q_alpha - 1|
    double avg_hs_dev = 0.0;     // sqrt(n) * ||Qbar - I/n||_HS
};

double sample_xi(const XiSpec& xi, Stream& stream);

// One vector y_alpha of the General* families. DiagPaired perturbations are
// paired both within the vector (entries 2t, 2t+1 carry +/-u) and across
// alpha (alpha, alpha+1 flip sign), so Tr Q_alpha = 1 and the family average
// is exactly I/n.
std::vector<double> sample_vector(const CovFamilySpec& cov, long alpha, long n,
                                  long m, std::uint64_t seed,
                                  std::uint64_t tag = stream_tag::y_vector);

SymmetricMatrixSample build_general_l(const EnsembleConfig& config);
SymmetricMatrixSample build_general_a(const EnsembleConfig& config);
SymmetricMatrixSample build_block_l(const EnsembleConfig& config);
SymmetricMatrixSample build_block_a(const EnsembleConfig& config);
SymmetricMatrixSample build(const EnsembleConfig& config);

// Active pairs (k, l), k < l, of a Block* realization (xi != 0); re-derives
// the same per-pair substreams as the builders.
std::vector<std::pair<long, long>> block_active_edges(const EnsembleConfig& config);

EnsembleDiagnostics validate_ensemble(const EnsembleConfig& config);

}  // namespace esl
