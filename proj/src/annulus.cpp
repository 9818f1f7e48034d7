#include "onehom/annulus.hpp"

#include "onehom/quadrature.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace onehom {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double wrap_centered(double t) {
    const double two_pi = 2.0 * std::numbers::pi;
    t = std::fmod(t, two_pi);
    if (t > std::numbers::pi) t -= two_pi;
    if (t <= -std::numbers::pi) t += two_pi;
    return t;
}

double bump_mass() {
    static const double mass = [] {
        const GaussRule& gl = gauss_legendre(128);
        double s = 0.0;
        for (size_t i = 0; i < gl.x.size(); ++i) s += gl.w[i] * std::exp(-1.0 / (1.0 - gl.x[i] * gl.x[i]));
        return s;
    }();
    return mass;
}

Vec2 direction_vector(Direction d, double theta) {
    switch (d) {
        case Direction::e1: return {1.0, 0.0};
        case Direction::e2: return {0.0, 1.0};
        case Direction::eR: return e_R(theta);
        case Direction::eTheta: return e_theta(theta);
    }
    return Vec2::Zero();
}

Vec2 direction_derivative(Direction d, double theta) {
    switch (d) {
        case Direction::e1:
        case Direction::e2: return Vec2::Zero();
        case Direction::eR: return e_theta(theta);
        case Direction::eTheta: return -e_R(theta);
    }
    return Vec2::Zero();
}

// (M e_R + 2 W e_R, M e_theta) at a point, from the local scalars only.
std::pair<Vec2, Vec2> momentum_from_scalars(const PointState& p) {
    const Vec2 er = e_R(p.theta), et = e_theta(p.theta);
    return {(p.dr + 2.0 * p.g2 + 2.0 * p.h) * er + p.gg * et, p.dr * et + p.gg * er};
}

template <class F>
double radial_sum(const Annulus& a, F&& f) {
    const GaussRule& gl = gauss_legendre(a.radial_nodes);
    const double u0 = std::log(a.r_inner), u1 = std::log(a.r_outer);
    const double half = 0.5 * (u1 - u0), mid = 0.5 * (u1 + u0);
    std::vector<double> parts;
    for (size_t k = 0; k < gl.x.size(); ++k) {
        const double R = std::exp(mid + half * gl.x[k]);
        parts.push_back(half * gl.w[k] * R * f(R));
    }
    return pairwise_sum(parts);
}

}  // namespace

void Annulus::validate() const {
    if (!(r_inner > 0.0 && r_outer > r_inner)) throw InvalidArgument("annulus: need 0 < R0 < R1");
    if (radial_nodes < 16) throw InvalidArgument("annulus: at least 16 radial nodes");
}

double RadialProfile::value(double R) const {
    const double L = std::log(hi / lo);
    const double x = (2.0 * std::log(R) - std::log(lo) - std::log(hi)) / L;
    if (std::abs(x) >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - x * x));
}

double RadialProfile::derivative(double R) const {
    const double L = std::log(hi / lo);
    const double x = (2.0 * std::log(R) - std::log(lo) - std::log(hi)) / L;
    if (std::abs(x) >= 1.0) return 0.0;
    const double q = 1.0 - x * x;
    return std::exp(1.0 - 1.0 / q) * (-2.0 * x / (q * q)) * (2.0 / (R * L));
}

RadialProfile RadialProfile::spanning(const Annulus& a, double margin) {
    const double L = std::log(a.r_outer / a.r_inner);
    return {a.r_inner * std::exp(margin * L), a.r_outer * std::exp(-margin * L)};
}

AngularProfile angular_bump(double center, double width) {
    const double z = width * bump_mass();
    AngularProfile p;
    p.name = "bump(" + std::to_string(center) + "," + std::to_string(width) + ")";
    p.phi = [=](double t) {
        const double x = wrap_centered(t - center) / width;
        return std::abs(x) < 1.0 ? std::exp(-1.0 / (1.0 - x * x)) / z : 0.0;
    };
    p.dphi = [=](double t) {
        const double x = wrap_centered(t - center) / width;
        if (std::abs(x) >= 1.0) return 0.0;
        const double q = 1.0 - x * x;
        return std::exp(-1.0 / q) * (-2.0 * x / (q * q)) / (width * z);
    };
    return p;
}

AngularProfile angular_mode(int m, bool sine) {
    const double k = m;
    AngularProfile p;
    if (m == 0) {
        p.name = "1";
        p.phi = [](double) { return 1.0; };
        p.dphi = [](double) { return 0.0; };
    } else if (sine) {
        p.name = "sin" + std::to_string(m);
        p.phi = [k](double t) { return std::sin(k * t); };
        p.dphi = [k](double t) { return k * std::cos(k * t); };
    } else {
        p.name = "cos" + std::to_string(m);
        p.phi = [k](double t) { return std::cos(k * t); };
        p.dphi = [k](double t) { return -k * std::sin(k * t); };
    }
    return p;
}

const char* direction_name(Direction d) {
    switch (d) {
        case Direction::e1: return "e1";
        case Direction::e2: return "e2";
        case Direction::eR: return "eR";
        case Direction::eTheta: return "etheta";
    }
    return "?";
}

TestField TestField::single(RadialProfile rho, AngularProfile phi, Direction dir, double coef) {
    TestField f;
    f.terms.push_back({coef, rho, std::move(phi), dir});
    return f;
}

TestField TestField::operator+(const TestField& o) const {
    TestField f = *this;
    f.terms.insert(f.terms.end(), o.terms.begin(), o.terms.end());
    return f;
}

TestField TestField::scaled(double a) const {
    TestField f = *this;
    for (auto& t : f.terms) t.coef *= a;
    return f;
}

FieldValue evaluate_field(const TestField& field, double R, double theta) {
    FieldValue v;
    for (const auto& t : field.terms) {
        const double rho = t.rho.value(R), drho = t.rho.derivative(R);
        if (rho == 0.0 && drho == 0.0) continue;
        const double phi = t.phi.phi(theta), dphi = t.phi.dphi(theta);
        if (phi == 0.0 && dphi == 0.0) continue;
        const Vec2 e = direction_vector(t.dir, theta), de = direction_derivative(t.dir, theta);
        v.phi += t.coef * rho * phi * e;
        v.phi_R += t.coef * drho * phi * e;
        v.phi_theta += t.coef * rho * (dphi * e + phi * de);
    }
    return v;
}

double equilibrium_residual(const DerivedCurve& curve, const EnergyModel& model, const Annulus& annulus,
                            const TestField& field, const QuadratureConfig& cfg) {
    annulus.validate();
    if (field.terms.empty()) return 0.0;
    const AngularRule rule(curve, model, cfg);
    return radial_sum(annulus, [&](double R) {
        const double ang = rule.integrate([&](const PointState& p) {
            const FieldValue fv = evaluate_field(field, R, p.theta);
            if (fv.phi.isZero(0.0) && fv.phi_theta.isZero(0.0)) return 0.0;
            Vec2 A, B;
            if (p.has_vectors) {
                if (!(p.d > 0.0)) return kNaN;
                const MomentumContractions m = momentum_closed_form(p.g, p.dg, p.theta, model);
                const double W = 0.5 * (p.g2 + p.dg.squaredNorm()) + p.h;
                A = m.m_er + 2.0 * W * e_R(p.theta);
                B = m.m_etheta;
            } else {
                std::tie(A, B) = momentum_from_scalars(p);
            }
            return A.dot(fv.phi) + B.dot(fv.phi_theta);
        });
        return ang / (R * R);
    });
}

double equilibrium_residual_factored(const DerivedCurve& curve, const EnergyModel& model,
                                     const Annulus& annulus, const TestField& field,
                                     const QuadratureConfig& cfg) {
    annulus.validate();
    const AngularRule rule(curve, model, cfg);
    double total = 0.0;
    for (const auto& t : field.terms) {
        const double radial = radial_sum(annulus, [&](double R) { return t.rho.value(R) / (R * R); });
        const double angular = rule.integrate([&](const PointState& p) {
            const auto [A, B] = momentum_from_scalars(p);
            const Vec2 e = direction_vector(t.dir, p.theta), de = direction_derivative(t.dir, p.theta);
            const double phi = t.phi.phi(p.theta), dphi = t.phi.dphi(p.theta);
            return phi * A.dot(e) + B.dot(dphi * e + phi * de);
        });
        total += t.coef * radial * angular;
    }
    return total;
}

double euler_lagrange_residual(const DerivedCurve& curve, const EnergyModel& model, const Annulus& annulus,
                               const TestField& field, Measure measure, const QuadratureConfig& cfg) {
    annulus.validate();
    if (field.terms.empty()) return 0.0;
    const AngularRule rule(curve, model, cfg);
    return radial_sum(annulus, [&](double R) {
        const double ang = rule.integrate_nodes([&](const PointState& p) {
            const FieldValue fv = evaluate_field(field, R, p.theta);
            if (fv.phi_R.isZero(0.0) && fv.phi_theta.isZero(0.0)) return 0.0;
            if (!(p.d > 0.0)) return kNaN;
            const Mat2 D = dw(p.g, p.dg, p.theta, model);
            return ((D * e_R(p.theta)).dot(fv.phi_R) + (D * e_theta(p.theta)).dot(fv.phi_theta) / R) / (R * R);
        });
        return measure == Measure::r_dr_dtheta ? R * ang : ang;
    });
}

}  // namespace onehom
