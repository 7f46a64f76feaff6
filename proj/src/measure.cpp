#include "esl/measure.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <sstream>
#include <stdexcept>

namespace esl {

namespace {

double parse_real(std::string_view text, const char* what) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw std::invalid_argument(std::string("cannot parse ") + what + " from '" +
                                    std::string(text) + "'");
    }
    return value;
}

std::string format_real(double x) {
    std::ostringstream out;
    out.precision(17);
    out << x;
    return out.str();
}

void check_atom_probabilities(const std::vector<std::pair<double, double>>& atoms) {
    if (atoms.empty()) throw std::invalid_argument("atoms list is empty");
    double sum = 0.0;
    for (const auto& [value, prob] : atoms) {
        if (!(prob > 0.0)) throw std::invalid_argument("atom probabilities must be positive");
        sum += prob;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
        throw std::invalid_argument("atom probabilities must sum to 1 (got " +
                                    format_real(sum) + ")");
    }
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        for (std::size_t j = i + 1; j < atoms.size(); ++j) {
            if (atoms[i].first == atoms[j].first) {
                throw std::invalid_argument("duplicate atom value " +
                                            format_real(atoms[i].first));
            }
        }
    }
}

}  // namespace

XiSpec XiSpec::constant(double value) {
    XiSpec spec;
    spec.kind = Kind::Const;
    spec.b = value;
    return spec;
}

XiSpec XiSpec::bernoulli(double p) {
    if (!(p > 0.0 && p <= 1.0)) {
        throw std::invalid_argument("bernoulli p must be in (0,1]");
    }
    XiSpec spec;
    spec.kind = Kind::Bernoulli;
    spec.p = p;
    return spec;
}

XiSpec XiSpec::rademacher(double s) {
    if (!(s > 0.0)) throw std::invalid_argument("rademacher s must be > 0");
    XiSpec spec;
    spec.kind = Kind::Rademacher;
    spec.s = s;
    return spec;
}

XiSpec XiSpec::from_atoms(std::vector<std::pair<double, double>> atoms) {
    check_atom_probabilities(atoms);
    XiSpec spec;
    spec.kind = Kind::Atoms;
    spec.atoms = std::move(atoms);
    return spec;
}

XiSpec XiSpec::parse(std::string_view text) {
    auto colon = text.find(':');
    std::string_view head = text.substr(0, colon);
    std::string_view tail = colon == std::string_view::npos
                                ? std::string_view{}
                                : text.substr(colon + 1);
    if (head == "const") return constant(parse_real(tail, "const value"));
    if (head == "bernoulli") return bernoulli(parse_real(tail, "bernoulli p"));
    if (head == "rademacher") return rademacher(parse_real(tail, "rademacher s"));
    if (head == "atoms") {
        std::vector<std::pair<double, double>> atoms;
        std::string_view rest = tail;
        while (!rest.empty()) {
            auto comma = rest.find(',');
            std::string_view item = rest.substr(0, comma);
            rest = comma == std::string_view::npos ? std::string_view{}
                                                   : rest.substr(comma + 1);
            auto at = item.find('@');
            if (at == std::string_view::npos) {
                throw std::invalid_argument("atom item '" + std::string(item) +
                                            "' lacks '@'");
            }
            atoms.emplace_back(parse_real(item.substr(0, at), "atom value"),
                               parse_real(item.substr(at + 1), "atom probability"));
        }
        return from_atoms(std::move(atoms));
    }
    throw std::invalid_argument("unknown xi spec '" + std::string(text) + "'");
}

std::string XiSpec::to_string() const {
    switch (kind) {
        case Kind::Const:
            return "const:" + format_real(b);
        case Kind::Bernoulli:
            return "bernoulli:" + format_real(p);
        case Kind::Rademacher:
            return "rademacher:" + format_real(s);
        case Kind::Atoms: {
            std::string out = "atoms:";
            for (std::size_t i = 0; i < atoms.size(); ++i) {
                if (i) out += ',';
                out += format_real(atoms[i].first) + "@" + format_real(atoms[i].second);
            }
            return out;
        }
    }
    return {};
}

std::vector<std::pair<double, double>> XiSpec::support() const {
    switch (kind) {
        case Kind::Const:
            return {{b, 1.0}};
        case Kind::Bernoulli:
            if (p == 1.0) return {{1.0, 1.0}};
            return {{1.0, p}, {0.0, 1.0 - p}};
        case Kind::Rademacher:
            return {{s, 0.5}, {-s, 0.5}};
        case Kind::Atoms:
            return atoms;
    }
    return {};
}

double XiSpec::mean() const {
    double mu = 0.0;
    for (const auto& [value, prob] : support()) mu += value * prob;
    return mu;
}

WeightMeasure WeightMeasure::from_atoms(std::vector<Atom> atoms) {
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        for (std::size_t j = i + 1; j < atoms.size(); ++j) {
            if (atoms[i].xi == atoms[j].xi) {
                throw std::invalid_argument("duplicate measure atom at xi = " +
                                            format_real(atoms[i].xi));
            }
        }
    }
    WeightMeasure measure;
    measure.atoms = std::move(atoms);
    for (const auto& atom : measure.atoms) measure.total_mass += atom.weight;
    return measure;
}

WeightMeasure measure_from_xi(const XiSpec& xi, long m, long n) {
    if (m < 1 || n < 1) throw std::invalid_argument("m and n must be >= 1");
    const double ratio = static_cast<double>(m) / static_cast<double>(n);
    std::vector<WeightMeasure::Atom> atoms;
    for (const auto& [value, prob] : xi.support()) {
        const double weight = ratio * value * prob;
        if (weight == 0.0) continue;  // xi = 0 carries no mass by construction
        atoms.push_back({value, weight});
    }
    return WeightMeasure::from_atoms(std::move(atoms));
}

MomentVector moments(const WeightMeasure& measure, int j_max) {
    if (j_max < 1) throw std::invalid_argument("j_max must be >= 1");
    MomentVector result;
    result.c.resize(static_cast<std::size_t>(j_max), 0.0);
    for (const auto& atom : measure.atoms) {
        double power = 1.0;  // xi^(j-1), starting at j = 1
        for (int j = 1; j <= j_max; ++j) {
            result.c[static_cast<std::size_t>(j - 1)] += atom.weight * power;
            power *= atom.xi;
        }
    }
    return result;
}

}  // namespace esl
