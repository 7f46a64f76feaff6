#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace esl {

// Distribution of the scalar coupling xi: finitely many atoms.
struct XiSpec {
    enum class Kind { Const, Bernoulli, Rademacher, Atoms };

    Kind kind = Kind::Const;
    double b = 0.0;  // Const value
    double p = 0.0;  // Bernoulli success probability, in (0,1]
    double s = 0.0;  // Rademacher magnitude, > 0
    std::vector<std::pair<double, double>> atoms;  // (value, probability)

    static XiSpec constant(double value);
    static XiSpec bernoulli(double p);
    static XiSpec rademacher(double s);
    static XiSpec from_atoms(std::vector<std::pair<double, double>> atoms);

    // Compact CLI grammar: const:<b> | bernoulli:<p> | rademacher:<s> |
    // atoms:<v1>@<p1>,<v2>@<p2>,...
    static XiSpec parse(std::string_view text);
    std::string to_string() const;

    // Support as (value, probability) pairs; probabilities sum to 1.
    std::vector<std::pair<double, double>> support() const;
    double mean() const;
};

// Discrete signed measure: atoms (xi, weight), weights may be negative.
struct WeightMeasure {
    struct Atom {
        double xi;
        double weight;
    };

    std::vector<Atom> atoms;
    double total_mass = 0.0;  // c_1 = sum of weights

    // Validates distinct atom positions and the total-mass invariant.
    static WeightMeasure from_atoms(std::vector<Atom> atoms);
};

// c[j-1] = c_j = sum_k weight_k * xi_k^(j-1), j = 1..j_max.
struct MomentVector {
    std::vector<double> c;

    double at(int j) const { return c.at(static_cast<std::size_t>(j - 1)); }
};

// Finite-n weight measure (m/n) * xi * dsigma(xi); zero-weight atoms dropped.
WeightMeasure measure_from_xi(const XiSpec& xi, long m, long n);

MomentVector moments(const WeightMeasure& measure, int j_max);

}  // namespace esl
