#include "catch_amalgamated.hpp"

#include "onehom/curve.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

using namespace onehom;
using Catch::Approx;

namespace {

Vec2 smooth_g(double t) { return {std::cos(t) + 0.3 * std::cos(2 * t), std::sin(t) + 0.2 * std::sin(3 * t)}; }
Vec2 smooth_dg(double t) { return {-std::sin(t) - 0.6 * std::sin(2 * t), std::cos(t) + 0.6 * std::cos(3 * t)}; }

double derivative_error(int n) {
    const Curve c = Curve::sample(AngularGrid(n), smooth_g);
    const DerivedCurve dc = differentiate(c);
    double e = 0.0;
    for (int i = 0; i < n; ++i) e = std::max(e, (dc.dg[i] - smooth_dg(c.grid().node(i))).norm());
    return e;
}

}  // namespace

TEST_CASE("angular grid geometry") {
    CHECK_THROWS_AS(AngularGrid(8), InvalidArgument);
    const AngularGrid g(64);
    CHECK(g.spacing() == Approx(2 * std::numbers::pi / 64));
    CHECK(g.wrap(-1) == 63);
    CHECK(g.wrap(64) == 0);
    for (int i = 0; i < 64; ++i) {
        CHECK(g.centered(i) > -std::numbers::pi);
        CHECK(g.centered(i) <= std::numbers::pi);
    }
    CHECK(g.centered(32) == Approx(std::numbers::pi));
}

TEST_CASE("periodic differentiation is fourth order") {
    const double e1 = derivative_error(64), e2 = derivative_error(128), e3 = derivative_error(256);
    const double p1 = std::log2(e1 / e2), p2 = std::log2(e2 / e3);
    CHECK(p1 == Approx(4.0).margin(0.2));
    CHECK(p2 == Approx(4.0).margin(0.2));
}

TEST_CASE("differentiation is linear") {
    const AngularGrid grid(96);
    const Curve a = Curve::sample(grid, smooth_g);
    const Curve b = Curve::sample(grid, [](double t) { return Vec2(std::sin(2 * t), std::cos(5 * t)); });
    std::vector<Vec2> mix;
    for (int i = 0; i < 96; ++i) mix.push_back(2.5 * a[i] - 1.5 * b[i]);
    const DerivedCurve da = differentiate(a), db = differentiate(b), dm = differentiate(Curve(grid, mix));
    for (int i = 0; i < 96; ++i) CHECK((dm.dg[i] - (2.5 * da.dg[i] - 1.5 * db.dg[i])).norm() < 1e-12);
}

TEST_CASE("exact differentiation needs an evaluator and zeroes the pinned derivative") {
    const AngularGrid grid(32);
    CHECK_THROWS_AS(differentiate_exact(Curve::sample(grid, smooth_g)), InvalidArgument);
    const Curve pinned = Curve::sample_exact(
        grid, [](double t) { return CurveJet{std::sin(t) * e_R(t), std::cos(t) * e_R(t) + std::sin(t) * e_theta(t)}; },
        0);
    const DerivedCurve dc = differentiate_exact(pinned);
    CHECK(pinned[0].norm() == 0.0);
    CHECK(dc.dg[0].norm() == 0.0);
    CHECK((dc.dg[5] - (std::cos(grid.node(5)) * e_R(grid.node(5)) + std::sin(grid.node(5)) * e_theta(grid.node(5))))
              .norm() < 1e-15);
}

TEST_CASE("one-homogeneous gradient and its determinant") {
    const double t = 0.7;
    const Mat2 F = one_homogeneous_gradient(e_R(t), e_theta(t), t);
    CHECK((F - Mat2::Identity()).norm() < 1e-15);

    const Vec2 g = smooth_g(t), dg = smooth_dg(t);
    const Mat2 G = one_homogeneous_gradient(g, dg, t);
    CHECK((G * e_R(t) - g).norm() < 1e-15);
    CHECK((G * e_theta(t) - dg).norm() < 1e-15);
    CHECK(G.determinant() == Approx(jacobian(g, dg)).epsilon(1e-14));
}

TEST_CASE("polar decomposition recovers radius and angular speed") {
    auto r = [](double t) { return 1.0 + 0.2 * std::cos(t); };
    auto gam = [](double t) { return t + 0.1 * std::sin(t); };
    const Curve c = Curve::sample(AngularGrid(1024), [&](double t) { return Vec2(r(t) * e_R(gam(t))); });
    const PolarProfile p = polar_decompose(differentiate(c), 0.5, 2.5);
    REQUIRE(p.theta.size() > 100);
    for (size_t i = 0; i < p.theta.size(); ++i) {
        const double t = p.theta[i];
        CHECK(p.r[i] == Approx(r(t)).epsilon(1e-12));
        CHECK(p.j[i] == Approx(1.0 + 0.1 * std::cos(t)).epsilon(1e-5));
        CHECK(p.gamma[i] - p.gamma[0] == Approx(gam(t) - gam(p.theta[0])).epsilon(0).margin(1e-12));
    }
}

TEST_CASE("polar decomposition failures") {
    const AngularGrid grid(64);
    const double t10 = grid.node(10);
    const Curve pinned =
        Curve::sample(grid, [t10](double t) { return Vec2(std::sin(0.5 * (t - t10)) * e_R(t)); }, 10);
    CHECK_THROWS_AS(polar_decompose(differentiate(pinned), 0.5, 1.5), ZeroRadius);
    const Curve fast = Curve::sample(AngularGrid(32), [](double t) { return e_R(20 * t); });
    CHECK_THROWS_AS(polar_decompose(differentiate(fast), 0.1, 3.0), GridTooCoarse);
}

TEST_CASE("curve CSV round trip detects the pinned node") {
    const Curve c = Curve::sample(AngularGrid(40), smooth_g, 7);
    std::stringstream ss;
    write_curve_csv(ss, c);
    CHECK(ss.str().rfind("theta,gx,gy\n", 0) == 0);
    const Curve back = read_curve_csv(ss);
    REQUIRE(back.size() == 40);
    REQUIRE(back.pinned_index().has_value());
    CHECK(*back.pinned_index() == 7);
    for (int i = 0; i < 40; ++i) CHECK(back[i] == c[i]);
}

TEST_CASE("rotated curves shift the node order") {
    const Curve c = Curve::sample(AngularGrid(32), smooth_g, 0);
    const Curve r = c.rotated(5);
    for (int i = 0; i < 32; ++i) CHECK(r[i] == c[i + 5]);
    REQUIRE(r.pinned_index().has_value());
    CHECK(*r.pinned_index() == 27);
}
