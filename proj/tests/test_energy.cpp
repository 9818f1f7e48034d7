#include "catch_amalgamated.hpp"

#include "onehom/energy.hpp"
#include "onehom/quadrature.hpp"
#include "onehom/variational.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace onehom;
using Catch::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

// Random matrices with positive determinant, reproducible from seed 0.
std::vector<Mat2> feasible_matrices(int count) {
    std::mt19937 rng(0);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::vector<Mat2> out;
    while (static_cast<int>(out.size()) < count) {
        Mat2 F;
        F << u(rng), u(rng), u(rng), u(rng);
        if (F.determinant() > 0.2) out.push_back(F);
    }
    return out;
}

Mat2 rotation(double a) {
    Mat2 Q;
    Q << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    return Q;
}

Curve circle_of_radius(int n, double a) {
    return Curve::sample_exact(AngularGrid(n), [a](double t) { return CurveJet{a * e_R(t), a * e_theta(t)}; });
}

}  // namespace

TEST_CASE("h family values") {
    const EnergyModel m(0.5);
    const HValues v = h_family(4.0, m);
    CHECK(v.h == Approx(0.5));
    CHECK(v.dh == Approx(-0.5 * std::pow(4.0, -1.5)));
    CHECK(v.f == Approx(-1.5 * 0.5));
    CHECK(v.feasible);
    const HValues bad = h_family(0.0, m);
    CHECK_FALSE(bad.feasible);
    CHECK(std::isinf(bad.h));
    CHECK_THROWS_AS(EnergyModel(0.0), InvalidArgument);
}

TEST_CASE("stored energy: identity, barrier and infeasibility") {
    for (double s : {0.5, 1.0, 2.0}) CHECK(stored_energy(Mat2::Identity(), EnergyModel(s)) == Approx(2.0));
    const EnergyModel m(1.0);
    double prev = 0.0;
    for (double t : {1e-1, 1e-2, 1e-3, 1e-4}) {
        Mat2 F = Mat2::Identity();
        F(1, 1) = t;
        const double w = stored_energy(F, m);
        CHECK(w > prev);
        CHECK(w >= 1.0 / t);
        prev = w;
    }
    Mat2 flip = Mat2::Identity();
    flip(1, 1) = -1.0;
    CHECK(std::isinf(stored_energy(flip, m)));
}

TEST_CASE("DW matches central differences of W") {
    const EnergyModel m(0.5);
    for (const Mat2& F : feasible_matrices(20)) {
        const Mat2 D = dw_matrix(F, m);
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) {
                const double h = 1e-6;
                Mat2 Fp = F, Fm = F;
                Fp(a, b) += h;
                Fm(a, b) -= h;
                const double fd = (stored_energy(Fp, m) - stored_energy(Fm, m)) / (2 * h);
                CHECK(fd == Approx(D(a, b)).epsilon(1e-6).margin(1e-8));
            }
    }
}

TEST_CASE("tensor and matrix forms of DW and M agree") {
    const EnergyModel m(0.7);
    const double t = 1.1;
    const Vec2 g(0.8, 0.9), dg(-1.2, 0.4);
    REQUIRE(jacobian(g, dg) > 0.0);
    const Mat2 F = one_homogeneous_gradient(g, dg, t);
    CHECK((dw(g, dg, t, m) - dw_matrix(F, m)).norm() < 1e-13);
    const Mat2 M = energy_momentum(g, dg, t, m);
    const Mat2 M_direct = F.transpose() * dw_matrix(F, m) - stored_energy(F, m) * Mat2::Identity();
    CHECK((M - M_direct).norm() < 1e-13);
    const MomentumContractions c = momentum_closed_form(g, dg, t, m);
    CHECK((c.m_er - M * e_R(t)).norm() < 1e-13);
    CHECK((c.m_etheta - M * e_theta(t)).norm() < 1e-13);

    // Scalar rewrite: M e_R + 2 W e_R = (dr + 2|g|^2 + 2h) e_R + (g.g') e_theta, M e_theta = dr e_theta + (g.g') e_R.
    const PointState p = point_state(g, dg, t, m);
    const double W = stored_energy(F, m);
    CHECK(((c.m_er + 2 * W * e_R(t)) - ((p.dr + 2 * p.g2 + 2 * p.h) * e_R(t) + p.gg * e_theta(t))).norm() < 1e-13);
    CHECK((c.m_etheta - (p.dr * e_theta(t) + p.gg * e_R(t))).norm() < 1e-13);
    CHECK_THROWS_AS(dw(g, -dg, t, m), NonpositiveJacobian);
}

TEST_CASE("frame indifference and isotropy") {
    const EnergyModel m(0.5);
    for (const Mat2& F : feasible_matrices(10)) {
        const double w = stored_energy(F, m);
        for (double a : {0.3, 1.7, -2.4}) {
            CHECK(stored_energy(rotation(a) * F, m) == Approx(w).epsilon(1e-13));
            CHECK(stored_energy(F * rotation(a), m) == Approx(w).epsilon(1e-13));
        }
        CHECK((F * cofactor(F).transpose() - F.determinant() * Mat2::Identity()).norm() < 1e-13);
    }
}

TEST_CASE("identity map: I = 4 pi, DW = (1 - s) Id, M = -(1 + s) Id") {
    for (double s : {0.5, 1.0, 2.0}) {
        const EnergyModel m(s);
        const Curve c = circle_of_radius(128, 1.0);
        const EnergyBreakdown e = energy_I(differentiate_exact(c), m);
        CHECK(e.total == Approx(4 * kPi).epsilon(1e-13));
        CHECK(e.singular == Approx(2 * kPi).epsilon(1e-13));
        for (double t : {0.0, 1.0, 3.0}) {
            CHECK((dw(e_R(t), e_theta(t), t, m) - (1 - s) * Mat2::Identity()).norm() < 1e-14);
            CHECK((energy_momentum(e_R(t), e_theta(t), t, m) + (1 + s) * Mat2::Identity()).norm() < 1e-14);
        }
    }
}

TEST_CASE("scaled identity: I(a e_R) = 2 pi (a^2 + a^-2s)") {
    for (double a : {0.5, 2.0}) {
        for (double s : {0.5, 1.0}) {
            const EnergyBreakdown e = energy_I(differentiate_exact(circle_of_radius(64, a)), EnergyModel(s));
            CHECK(e.total == Approx(2 * kPi * (a * a + std::pow(a, -2 * s))).epsilon(1e-13));
        }
    }
}

TEST_CASE("reversed orientation has infinite energy") {
    const Curve c = Curve::sample(AngularGrid(64), [](double t) { return e_R(-t); });
    const EnergyBreakdown e = energy_I(differentiate(c), EnergyModel(1.0));
    CHECK(std::isinf(e.total));
    CHECK_FALSE(e.finite());
}

TEST_CASE("energy quadrature converges at least to second order on smooth curves") {
    auto g = [](double t) { return Vec2((1.0 + 0.3 * std::cos(t)) * e_R(t + 0.2 * std::sin(t))); };
    auto jet = [&](double t) {
        const double r = 1.0 + 0.3 * std::cos(t), dr = -0.3 * std::sin(t);
        const double a = t + 0.2 * std::sin(t), da = 1.0 + 0.2 * std::cos(t);
        return CurveJet{r * e_R(a), dr * e_R(a) + r * da * e_theta(a)};
    };
    const EnergyModel m(0.5);
    const double ref = energy_I(differentiate_exact(Curve::sample_exact(AngularGrid(4096), jet)), m).total;
    std::vector<double> err;
    for (int n : {32, 64, 128}) err.push_back(std::abs(energy_I(differentiate(Curve::sample(AngularGrid(n), g)), m).total - ref));
    CHECK(std::log2(err[0] / err[1]) >= 2.0);
    CHECK(std::log2(err[1] / err[2]) >= 2.0);
}

TEST_CASE("angular rule integrates constants exactly across a pinned window") {
    const AngularGrid grid(256);
    const Curve c = Curve::sample(grid, [](double t) { return Vec2(std::abs(std::sin(0.5 * t)) * e_R(t)); }, 0);
    const DerivedCurve dc = differentiate(c);
    const AngularRule rule(dc, EnergyModel(0.5));
    CHECK(rule.pinned());
    CHECK_FALSE(rule.exact_window());
    CHECK(rule.excluded_half_width() == 3);
    CHECK(rule.window_half_width() == Approx(3.5 * grid.spacing()));
    CHECK(rule.integrate([](const PointState&) { return 1.0; }) == Approx(2 * kPi).epsilon(1e-12));
    CHECK(rule.integrate_nodes([](const PointState&) { return 1.0; }) ==
          Approx((256 - 7) * grid.spacing()).epsilon(1e-12));
}

TEST_CASE("graded rule handles integrable power singularities") {
    const GradedResult a = graded_integral([](double t) { return std::pow(t, -1.0 / 3.0); }, 1.0);
    CHECK(a.value == Approx(1.5).epsilon(1e-10));
    CHECK(a.tail_exponent == Approx(1.0 / 3.0).epsilon(1e-8));
    const GradedResult b = graded_integral([](double t) { return 1.0 / std::sqrt(t); }, 0.25);
    CHECK(b.value == Approx(1.0).epsilon(1e-10));
    const GradedResult c = graded_integral([](double t) { return 1.0 / t; }, 1.0);
    CHECK(c.tail_divergent);
    CHECK(std::isinf(c.value));
}

TEST_CASE("Gauss-Legendre exactness and pairwise summation") {
    for (int n : {2, 4, 8, 16}) {
        const GaussRule& r = gauss_legendre(n);
        for (int k = 0; k <= 2 * n - 1; ++k) {
            double q = 0.0;
            for (int i = 0; i < n; ++i) q += r.w[i] * std::pow(r.x[i], k);
            const double exact = (k % 2 == 1) ? 0.0 : 2.0 / (k + 1);
            CHECK(q == Approx(exact).epsilon(0).margin(1e-14));
        }
    }
    std::vector<double> v(1 << 16, 0.1);
    CHECK(pairwise_sum(v) == Approx(6553.6).epsilon(1e-14));
}

TEST_CASE("graded rule resolves narrow features when panels are capped") {
    // Smooth bump of half-width 0.01 centered at 0.03 inside a graded window of width 0.05.
    auto bump = [](double t) {
        const double x = (t - 0.03) / 0.01;
        return std::abs(x) < 1.0 ? std::exp(-1.0 / (1.0 - x * x)) : 0.0;
    };
    double ref = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) ref += bump(0.02 + 0.02 * (i + 0.5) / n) * 0.02 / n;
    CHECK(graded_integral(bump, 0.05, 20, 4, 1e-3).value == Approx(ref).epsilon(1e-6));
    CHECK(std::abs(graded_integral(bump, 0.05, 20, 4).value / ref - 1.0) > 1e-3);
}

TEST_CASE("exact-path seed energy converges at second order") {
    // Reference: substitute t = u^8 on each side of the pin and apply composite Gauss-Legendre.
    const SeedParams p;
    const EnergyModel m(p.s);
    const GaussRule& gl = gauss_legendre(16);
    const double U = std::pow(kPi, 1.0 / 8.0);
    double ref = 0.0;
    const int panels = 2000;
    for (int side : {-1, 1})
        for (int k = 0; k < panels; ++k) {
            const double a = U * k / panels, b = U * (k + 1) / panels;
            for (int q = 0; q < 16; ++q) {
                const double u = 0.5 * (a + b) + 0.5 * (b - a) * gl.x[q];
                const double t = std::pow(u, 8), dt = 8 * std::pow(u, 7);
                const CurveJet J = seed_jet(p, side * t);
                const double d = jacobian(J.g, J.dg);
                ref += 0.5 * (b - a) * gl.w[q] * dt * (0.5 * (J.g.squaredNorm() + J.dg.squaredNorm()) + std::pow(d, -p.s));
            }
        }
    std::vector<double> err;
    for (int n : {512, 1024, 2048}) err.push_back(std::abs(energy_I(differentiate_exact(seed_curve(p, AngularGrid(n))), m).total - ref));
    CHECK(err[2] < 1e-4);
    CHECK(std::log2(err[0] / err[1]) > 1.8);
    CHECK(std::log2(err[1] / err[2]) > 1.8);
}
