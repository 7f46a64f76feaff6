#pragma once

#include <complex>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "esl/measure.hpp"

namespace esl {

using Complex = std::complex<double>;

// One certified Stieltjes-transform evaluation: residual is the defining
// equation re-evaluated at f, never assumed.
struct SolveReport {
    Complex f{};
    double residual = 0.0;
    int iterations = 0;
    std::string branch_note;
    bool ok = false;
};

inline constexpr double kPolynomialTol = 1e-12;
inline constexpr double kFixedPointTol = 1e-10;

// Quadratic b*z*f^2 + (z + b - c1)*f + 1 = 0; the Im f > 0 root.
// b = 0 degenerates to the point mass at c1: f = 1/(c1 - z).
SolveReport mp_stieltjes(double b, double c1, Complex z,
                         double tol = kPolynomialTol);

struct DensityEval {
    double value = 0.0;        // continuous density at lambda
    bool atomic = false;       // law degenerates to a point mass
    double atom_location = 0;  // meaningful when atomic
};

// Continuous part of the two-parameter Marchenko-Pastur family,
// 1/(2 pi b lambda) * sqrt(((c+ - lambda)(lambda - c-))_+), c+- = (sqrt b +- sqrt c1)^2.
// b = 0 is flagged atomic at c1.
DensityEval mp_density_eval(double b, double c1, double lambda);
double mp_density(double b, double c1, double lambda);

// Block Laplacian density, identical to mp_density(2, c, lambda).
double block_laplacian_density(double c, double lambda);

// (1/(2 pi c2)) * sqrt((4 c2 - (lambda - c1)^2)_+).
double shifted_semicircle_density(double c1, double c2, double lambda);

// Cubic z f^3 + (1 - c) f^2 - z f - 1 = 0; root picked by the Stieltjes
// constraints (Im f > 0, |f| <= 1/Im z), homotopy from 10i when ambiguous.
SolveReport effective_medium_stieltjes(double c, Complex z,
                                       double tol = kPolynomialTol);

// Master equation z f = -1 + a f Integral (1 + a xi f)^{-1} dnu(xi),
// damped fixed-point iteration with continuation in Im z plus Newton polish.
SolveReport fixed_point_stieltjes(const WeightMeasure& measure, double a,
                                  Complex z, double tol = kFixedPointTol);

// z f = -1 - 2 f^2 Integral xi dnu(xi) / (1 - xi^2 f^2). The equation is
// conjectural for general xi; every report carries a "conjectural" note.
SolveReport adjacency_general_stieltjes(const WeightMeasure& measure, Complex z,
                                        double tol = kFixedPointTol);

// ---------------------------------------------------------------------------
// Limit laws: a common evaluator surface over atoms + continuous density.

struct LawAtom {
    double location = 0.0;
    double weight = 0.0;
};

struct SupportInterval {
    double lo = 0.0;
    double hi = 0.0;
};

class LimitLaw {
public:
    virtual ~LimitLaw() = default;

    virtual std::string descriptor() const = 0;
    virtual std::vector<LawAtom> atoms() const = 0;
    // Continuous-part support; empty for purely atomic laws.
    virtual std::vector<SupportInterval> support() const = 0;
    virtual double density(double lambda) const = 0;
    virtual SolveReport stieltjes(Complex z) const = 0;
    // Notes appended to reports/CSV (e.g. the conjectural flag).
    virtual std::string caveat() const { return {}; }

    double atom_weight_at(double t) const;
    // Right-continuous CDF (continuous part integrated by cached
    // edge-substituted quadrature) and its left limit.
    double cdf(double t) const;
    double cdf_left(double t) const;
    double continuous_mass() const;
    double total_mass() const;

private:
    struct CdfTable;
    const CdfTable& table() const;
    mutable std::shared_ptr<CdfTable> table_;
};

std::unique_ptr<LimitLaw> make_mp_law(double b, double c1);
std::unique_ptr<LimitLaw> make_shifted_semicircle_law(double c1, double c2);
std::unique_ptr<LimitLaw> make_block_laplacian_law(double c);
std::unique_ptr<LimitLaw> make_effective_medium_law(double c);
std::unique_ptr<LimitLaw> make_fixed_point_law(WeightMeasure measure, double a);
std::unique_ptr<LimitLaw> make_adjacency_general_law(WeightMeasure measure);

// Default inversion schedule (1e-2, 1e-3, 1e-4).
std::vector<double> default_eta_schedule();

// Stieltjes-Perron inversion: polynomial extrapolation of (1/pi) Im f(lambda
// + i eta) to eta = 0 along the schedule, clamped at 0.
double density_from_stieltjes(const LimitLaw& law, double lambda,
                              std::span<const double> eta_schedule);

}  // namespace esl
