#pragma once

#include "onehom/curve.hpp"
#include "onehom/energy.hpp"

#include <functional>
#include <string>
#include <vector>

namespace onehom {

struct Annulus {
    double r_inner = 1.0;
    double r_outer = 2.0;
    int radial_nodes = 32;  // Gauss-Legendre in ln R
    void validate() const;
};

// rho(R) = exp(1 - 1/(1 - x^2)) for |x| < 1, x = affine image of ln R on [ln lo, ln hi].
struct RadialProfile {
    double lo = 1.0;
    double hi = 2.0;
    double value(double R) const;
    double derivative(double R) const;
    static RadialProfile spanning(const Annulus& a, double margin = 0.05);
};

struct AngularProfile {
    std::string name;
    std::function<double(double)> phi;
    std::function<double(double)> dphi;
};

// Smooth bump of half-width `width` centered at `center` with unit integral.
AngularProfile angular_bump(double center, double width);
AngularProfile angular_mode(int m, bool sine);

enum class Direction { e1, e2, eR, eTheta };
const char* direction_name(Direction d);

struct SeparableTerm {
    double coef = 1.0;
    RadialProfile rho;
    AngularProfile phi;
    Direction dir = Direction::e1;
};

// Phi = sum coef * rho(R) phi(theta) e.
struct TestField {
    std::vector<SeparableTerm> terms;
    static TestField single(RadialProfile rho, AngularProfile phi, Direction dir, double coef = 1.0);
    TestField operator+(const TestField& o) const;
    TestField scaled(double a) const;
};

struct FieldValue {
    Vec2 phi = Vec2::Zero();
    Vec2 phi_R = Vec2::Zero();
    Vec2 phi_theta = Vec2::Zero();
};
FieldValue evaluate_field(const TestField& field, double R, double theta);

enum class Measure { r_dr_dtheta, dr_dtheta };

// Tensor-product quadrature of {(M e_R + 2 W e_R).Phi + M e_theta.Phi_theta} / R^2 dR dtheta.
double equilibrium_residual(const DerivedCurve& curve, const EnergyModel& model, const Annulus& annulus,
                            const TestField& field, const QuadratureConfig& cfg = {});

// The separable reduction: sum over terms of (int rho/R^2 dR) times the angular integral.
double equilibrium_residual_factored(const DerivedCurve& curve, const EnergyModel& model,
                                     const Annulus& annulus, const TestField& field,
                                     const QuadratureConfig& cfg = {});

// int int R^-2 (DW e_R . Phi_R + R^-1 DW e_theta . Phi_theta) dx. The angular sum skips the
// pinned window (the integrand is not integrable at a zero of g).
double euler_lagrange_residual(const DerivedCurve& curve, const EnergyModel& model, const Annulus& annulus,
                               const TestField& field, Measure measure = Measure::r_dr_dtheta,
                               const QuadratureConfig& cfg = {});

}  // namespace onehom
