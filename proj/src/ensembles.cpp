#include "esl/ensembles.hpp"

#include <Eigen/Dense>
#include <openssl/evp.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

static_assert(std::endian::native == std::endian::little,
              "binary container assumes a little-endian host");

namespace esl {

namespace {

double parse_real(std::string_view text, const char* what) {
    try {
        std::size_t pos = 0;
        double value = std::stod(std::string(text), &pos);
        if (pos != text.size()) throw std::invalid_argument("trailing junk");
        return value;
    } catch (const std::exception&) {
        throw std::invalid_argument(std::string("cannot parse ") + what + " from '" +
                                    std::string(text) + "'");
    }
}

}  // namespace

CovFamilySpec CovFamilySpec::isotropic() { return {CovFamily::Isotropic, 0.0}; }

CovFamilySpec CovFamilySpec::diag_paired(double amp) {
    if (!(amp > 0.0 && amp < 1.0)) {
        throw std::invalid_argument("diag-paired amp must be in (0,1)");
    }
    return {CovFamily::DiagPaired, amp};
}

CovFamilySpec CovFamilySpec::sphere_uniform() {
    return {CovFamily::SphereUniform, 0.0};
}

CovFamilySpec CovFamilySpec::parse(std::string_view text) {
    if (text == "isotropic") return isotropic();
    if (text == "sphere") return sphere_uniform();
    constexpr std::string_view prefix = "diag-paired:";
    if (text.starts_with(prefix)) {
        return diag_paired(parse_real(text.substr(prefix.size()), "diag-paired amp"));
    }
    throw std::invalid_argument("unknown covariance family '" + std::string(text) + "'");
}

std::string CovFamilySpec::to_string() const {
    switch (kind) {
        case CovFamily::Isotropic:
            return "isotropic";
        case CovFamily::DiagPaired: {
            std::ostringstream out;
            out.precision(17);
            out << "diag-paired:" << amp;
            return out.str();
        }
        case CovFamily::SphereUniform:
            return "sphere";
    }
    return {};
}

std::string model_name(Model model) {
    switch (model) {
        case Model::GeneralL:
            return "general-l";
        case Model::GeneralA:
            return "general-a";
        case Model::BlockL:
            return "block-l";
        case Model::BlockA:
            return "block-a";
    }
    return {};
}

Model parse_model(std::string_view text) {
    if (text == "general-l") return Model::GeneralL;
    if (text == "general-a") return Model::GeneralA;
    if (text == "block-l") return Model::BlockL;
    if (text == "block-a") return Model::BlockA;
    throw std::invalid_argument("unknown model '" + std::string(text) + "'");
}

long EnsembleConfig::side() const {
    switch (model) {
        case Model::GeneralL:
        case Model::GeneralA:
            return n;
        case Model::BlockL:
        case Model::BlockA:
            return r * d;
    }
    return 0;
}

void EnsembleConfig::validate() const {
    std::vector<std::string> problems;
    const bool general = model == Model::GeneralL || model == Model::GeneralA;
    if (general) {
        if (n < 1) problems.push_back("n must be >= 1");
        if (m < 1) problems.push_back("m must be >= 1");
        if (model == Model::GeneralA && cov.kind != CovFamily::Isotropic) {
            problems.push_back(
                "general-a requires isotropic covariances (the averaged "
                "product-trace identity holds only for Q = I/n)");
        }
    } else {
        if (r < 2) problems.push_back("r must be >= 2");
        if (d < 1) problems.push_back("d must be >= 1");
    }
    if (!problems.empty()) {
        std::string joined;
        for (std::size_t i = 0; i < problems.size(); ++i) {
            if (i) joined += "; ";
            joined += problems[i];
        }
        throw std::invalid_argument(joined);
    }
}

std::string EnsembleConfig::canonical() const {
    std::ostringstream out;
    out.precision(17);
    out << "model=" << model_name(model);
    if (model == Model::GeneralL || model == Model::GeneralA) {
        out << ";n=" << n << ";m=" << m << ";cov=" << cov.to_string();
    } else {
        out << ";r=" << r << ";d=" << d;
    }
    out << ";xi=" << xi.to_string() << ";seed=" << seed;
    return out.str();
}

std::array<std::uint8_t, 32> EnsembleConfig::digest() const {
    const std::string text = canonical();
    std::array<std::uint8_t, 32> out{};
    unsigned int len = 0;
    EVP_Digest(text.data(), text.size(), out.data(), &len, EVP_sha256(), nullptr);
    return out;
}

SymmetricMatrixSample::SymmetricMatrixSample(long n, std::uint64_t seed,
                                             const std::array<std::uint8_t, 32>& digest)
    : n_(n),
      seed_(seed),
      digest_(digest),
      tri_(static_cast<std::size_t>(n) * (n + 1) / 2, 0.0) {
    if (n < 1) throw std::invalid_argument("matrix side must be >= 1");
}

double SymmetricMatrixSample::trace() const {
    double sum = 0.0;
    for (long i = 0; i < n_; ++i) sum += (*this)(i, i);
    return sum;
}

double SymmetricMatrixSample::hs_norm_squared() const {
    double sum = 0.0;
    for (long i = 0; i < n_; ++i) {
        for (long j = 0; j < i; ++j) {
            const double x = (*this)(i, j);
            sum += 2.0 * x * x;
        }
        const double diag = (*this)(i, i);
        sum += diag * diag;
    }
    return sum;
}

void SymmetricMatrixSample::save(std::ostream& out) const {
    out.write("ESL1", 4);
    const std::uint64_t side64 = static_cast<std::uint64_t>(n_);
    out.write(reinterpret_cast<const char*>(&side64), 8);
    out.write(reinterpret_cast<const char*>(&seed_), 8);
    out.write(reinterpret_cast<const char*>(digest_.data()), 32);
    out.write(reinterpret_cast<const char*>(tri_.data()),
              static_cast<std::streamsize>(tri_.size() * sizeof(double)));
    if (!out) throw std::runtime_error("matrix write failed");
}

SymmetricMatrixSample SymmetricMatrixSample::load(std::istream& in) {
    char magic[4] = {};
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "ESL1", 4) != 0) {
        throw std::runtime_error("bad matrix container magic");
    }
    std::uint64_t side64 = 0, seed = 0;
    std::array<std::uint8_t, 32> digest{};
    in.read(reinterpret_cast<char*>(&side64), 8);
    in.read(reinterpret_cast<char*>(&seed), 8);
    in.read(reinterpret_cast<char*>(digest.data()), 32);
    SymmetricMatrixSample sample(static_cast<long>(side64), seed, digest);
    in.read(reinterpret_cast<char*>(sample.tri_.data()),
            static_cast<std::streamsize>(sample.tri_.size() * sizeof(double)));
    if (!in) throw std::runtime_error("matrix read failed");
    return sample;
}

double sample_xi(const XiSpec& xi, Stream& stream) {
    switch (xi.kind) {
        case XiSpec::Kind::Const:
            return xi.b;
        case XiSpec::Kind::Bernoulli:
            return stream.uniform() < xi.p ? 1.0 : 0.0;
        case XiSpec::Kind::Rademacher:
            return stream.uniform() < 0.5 ? xi.s : -xi.s;
        case XiSpec::Kind::Atoms: {
            const double u = stream.uniform();
            double acc = 0.0;
            for (const auto& [value, prob] : xi.atoms) {
                acc += prob;
                if (u < acc) return value;
            }
            return xi.atoms.back().first;
        }
    }
    return 0.0;
}

namespace {

// DiagPaired perturbation vector for substream alpha. Entries are paired
// (+u, -u) within the vector, and alpha is paired with its neighbour
// carrying the opposite sign, so Tr Q_alpha = 1 and sum_alpha delta = 0
// hold exactly (pairwise cancellation is exact in floating point).
std::vector<double> diag_paired_delta(double amp, long alpha, long n, long m,
                                      std::uint64_t seed) {
    std::vector<double> delta(static_cast<std::size_t>(n), 0.0);
    if (m % 2 == 1 && alpha == m - 1) return delta;  // unpaired trailing alpha
    const long base = alpha - (alpha % 2);
    const double sign = (alpha % 2 == 0) ? 1.0 : -1.0;
    Stream stream(seed, stream_tag::cov_perturbation, static_cast<std::uint64_t>(base));
    for (long t = 0; t + 1 < n; t += 2) {
        const double u = sign * stream.uniform(-amp, amp);
        delta[static_cast<std::size_t>(t)] = u;
        delta[static_cast<std::size_t>(t + 1)] = -u;
    }
    return delta;
}

}  // namespace

std::vector<double> sample_vector(const CovFamilySpec& cov, long alpha, long n,
                                  long m, std::uint64_t seed, std::uint64_t tag) {
    Stream stream(seed, tag, static_cast<std::uint64_t>(alpha));
    std::vector<double> y(static_cast<std::size_t>(n));
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    switch (cov.kind) {
        case CovFamily::Isotropic:
            for (auto& value : y) value = scale * stream.gaussian();
            break;
        case CovFamily::DiagPaired: {
            const auto delta = diag_paired_delta(cov.amp, alpha, n, m, seed);
            for (long i = 0; i < n; ++i) {
                y[static_cast<std::size_t>(i)] =
                    std::sqrt((1.0 + delta[static_cast<std::size_t>(i)]) /
                              static_cast<double>(n)) *
                    stream.gaussian();
            }
            break;
        }
        case CovFamily::SphereUniform: {
            double norm_sq = 0.0;
            for (auto& value : y) {
                value = stream.gaussian();
                norm_sq += value * value;
            }
            const double inv = 1.0 / std::sqrt(norm_sq);
            for (auto& value : y) value *= inv;
            break;
        }
    }
    return y;
}

namespace {

SymmetricMatrixSample from_dense_lower(const Eigen::MatrixXd& dense,
                                       const EnsembleConfig& config) {
    SymmetricMatrixSample sample(dense.rows(), config.seed, config.digest());
    for (long i = 0; i < dense.rows(); ++i) {
        for (long j = 0; j <= i; ++j) sample.at(i, j) = dense(i, j);
    }
    return sample;
}

// Gathers the per-alpha draws of a General* model into column matrices.
Eigen::MatrixXd gather_vectors(const EnsembleConfig& config, std::uint64_t tag) {
    Eigen::MatrixXd vectors(config.n, config.m);
    for (long alpha = 0; alpha < config.m; ++alpha) {
        const auto y = sample_vector(config.cov, alpha, config.n, config.m,
                                     config.seed, tag);
        for (long i = 0; i < config.n; ++i) vectors(i, alpha) = y[static_cast<std::size_t>(i)];
    }
    return vectors;
}

Eigen::VectorXd gather_xi(const EnsembleConfig& config, long count) {
    Eigen::VectorXd xs(count);
    for (long alpha = 0; alpha < count; ++alpha) {
        Stream stream(config.seed, stream_tag::xi, static_cast<std::uint64_t>(alpha));
        xs(alpha) = sample_xi(config.xi, stream);
    }
    return xs;
}

long pair_index(long k, long l, long r) {
    // Index of (k, l), k < l, in lexicographic pair order.
    return k * r - k * (k + 1) / 2 + (l - k - 1);
}

}  // namespace

SymmetricMatrixSample build_general_l(const EnsembleConfig& config) {
    if (config.model != Model::GeneralL) throw std::invalid_argument("model != general-l");
    config.validate();
    const Eigen::MatrixXd y = gather_vectors(config, stream_tag::y_vector);
    const Eigen::VectorXd xs = gather_xi(config, config.m);
    Eigen::MatrixXd dense(config.n, config.n);
    dense.noalias() = y * xs.asDiagonal() * y.transpose();
    return from_dense_lower(dense, config);
}

SymmetricMatrixSample build_general_a(const EnsembleConfig& config) {
    if (config.model != Model::GeneralA) throw std::invalid_argument("model != general-a");
    config.validate();
    const Eigen::MatrixXd y = gather_vectors(config, stream_tag::y_vector);
    const Eigen::MatrixXd x = gather_vectors(config, stream_tag::x_vector);
    const Eigen::VectorXd xs = gather_xi(config, config.m);
    Eigen::MatrixXd cross(config.n, config.n);
    cross.noalias() = y * xs.asDiagonal() * x.transpose();
    Eigen::MatrixXd dense = cross + cross.transpose();
    return from_dense_lower(dense, config);
}

SymmetricMatrixSample build_block_l(const EnsembleConfig& config) {
    if (config.model != Model::BlockL) throw std::invalid_argument("model != block-l");
    config.validate();
    const long r = config.r, d = config.d;
    SymmetricMatrixSample sample(r * d, config.seed, config.digest());
    const CovFamilySpec sphere = CovFamilySpec::sphere_uniform();
    for (long k = 0; k < r; ++k) {
        for (long l = k + 1; l < r; ++l) {
            const long q = pair_index(k, l, r);
            Stream xi_stream(config.seed, stream_tag::xi, static_cast<std::uint64_t>(q));
            const double xi = sample_xi(config.xi, xi_stream);
            if (xi == 0.0) continue;
            const auto v = sample_vector(sphere, q, d, 0, config.seed);
            // Only blocks (k,k), (l,l), (l,k) of the lower triangle change.
            for (long i = 0; i < d; ++i) {
                for (long j = 0; j <= i; ++j) {
                    const double w = xi * v[static_cast<std::size_t>(i)] *
                                     v[static_cast<std::size_t>(j)];
                    sample.at(k * d + i, k * d + j) += w;
                    sample.at(l * d + i, l * d + j) += w;
                }
                for (long j = 0; j < d; ++j) {
                    sample.at(l * d + i, k * d + j) -=
                        xi * v[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(j)];
                }
            }
        }
    }
    return sample;
}

SymmetricMatrixSample build_block_a(const EnsembleConfig& config) {
    if (config.model != Model::BlockA) throw std::invalid_argument("model != block-a");
    config.validate();
    const long r = config.r, d = config.d;
    SymmetricMatrixSample sample(r * d, config.seed, config.digest());
    const CovFamilySpec sphere = CovFamilySpec::sphere_uniform();
    for (long k = 0; k < r; ++k) {
        for (long l = k + 1; l < r; ++l) {
            const long q = pair_index(k, l, r);
            Stream xi_stream(config.seed, stream_tag::xi, static_cast<std::uint64_t>(q));
            const double xi = sample_xi(config.xi, xi_stream);
            if (xi == 0.0) continue;
            const auto v = sample_vector(sphere, q, d, 0, config.seed);
            // Off-diagonal block (l, k) = xi * v v^T; diagonal blocks stay zero.
            for (long i = 0; i < d; ++i) {
                for (long j = 0; j < d; ++j) {
                    sample.at(l * d + i, k * d + j) +=
                        xi * v[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(j)];
                }
            }
        }
    }
    return sample;
}

SymmetricMatrixSample build(const EnsembleConfig& config) {
    switch (config.model) {
        case Model::GeneralL:
            return build_general_l(config);
        case Model::GeneralA:
            return build_general_a(config);
        case Model::BlockL:
            return build_block_l(config);
        case Model::BlockA:
            return build_block_a(config);
    }
    throw std::invalid_argument("unknown model");
}

std::vector<std::pair<long, long>> block_active_edges(const EnsembleConfig& config) {
    if (config.model != Model::BlockL && config.model != Model::BlockA) {
        throw std::invalid_argument("active edges are defined for block models only");
    }
    std::vector<std::pair<long, long>> edges;
    for (long k = 0; k < config.r; ++k) {
        for (long l = k + 1; l < config.r; ++l) {
            const long q = pair_index(k, l, config.r);
            Stream xi_stream(config.seed, stream_tag::xi, static_cast<std::uint64_t>(q));
            if (sample_xi(config.xi, xi_stream) != 0.0) edges.emplace_back(k, l);
        }
    }
    return edges;
}

EnsembleDiagnostics validate_ensemble(const EnsembleConfig& config) {
    if (config.model != Model::GeneralL && config.model != Model::GeneralA) {
        throw std::invalid_argument("diagnostics are defined for general models only");
    }
    config.validate();
    EnsembleDiagnostics diag;
    switch (config.cov.kind) {
        case CovFamily::Isotropic:
        case CovFamily::SphereUniform:
            diag.sup_op = 1.0;  // Q_alpha = I/n exactly (sphere: E vv^T = I/n)
            break;
        case CovFamily::DiagPaired: {
            const long n = config.n, m = config.m;
            std::vector<double> delta_sum(static_cast<std::size_t>(n), 0.0);
            double sup_op = 0.0, sup_trace_dev = 0.0;
            for (long alpha = 0; alpha < m; ++alpha) {
                const auto delta = diag_paired_delta(config.cov.amp, alpha, n, m,
                                                     config.seed);
                double max_abs = 0.0, trace_dev = 0.0;
                for (long i = 0; i < n; ++i) {
                    const double value = delta[static_cast<std::size_t>(i)];
                    max_abs = std::max(max_abs, std::abs(value));
                    trace_dev += value / static_cast<double>(n);
                    delta_sum[static_cast<std::size_t>(i)] += value;
                }
                sup_op = std::max(sup_op, 1.0 + max_abs);
                sup_trace_dev = std::max(sup_trace_dev, std::abs(trace_dev));
            }
            double hs_sq = 0.0;
            for (double value : delta_sum) {
                const double entry = value / static_cast<double>(m) / static_cast<double>(n);
                hs_sq += entry * entry;
            }
            diag.sup_op = sup_op;
            diag.sup_trace_dev = sup_trace_dev;
            diag.avg_hs_dev = std::sqrt(static_cast<double>(n)) * std::sqrt(hs_sq);
            break;
        }
    }
    return diag;
}

}  // namespace esl
