#include "onehom/quadrature.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>

namespace onehom {

namespace {

GaussRule build_gauss(int n) {
    GaussRule r;
    r.x.resize(static_cast<size_t>(n));
    r.w.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        r.x[static_cast<size_t>(i)] = x;
        r.w[static_cast<size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return r;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
    static std::mutex mu;
    static std::map<int, GaussRule> cache;
    std::lock_guard lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, build_gauss(n)).first;
    return it->second;
}

double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const size_t half = v.size() / 2;
    return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

GradedResult graded_integral(const std::function<double(double)>& f, double a, int levels,
                             int points, double max_panel) {
    GradedResult res;
    if (!(a > 0.0)) return res;
    const GaussRule& gl = gauss_legendre(points);
    std::vector<double> parts;
    parts.reserve(static_cast<size_t>(levels * points));
    double hi = a;
    for (int lev = 0; lev < levels; ++lev) {
        const double lo = hi / 2.0;
        const int pieces = max_panel > 0.0 ? std::max(1, static_cast<int>(std::ceil((hi - lo) / max_panel))) : 1;
        const double du = std::log(2.0) / pieces;
        for (int p = 0; p < pieces; ++p) {
            const double u0 = std::log(lo) + p * du;
            const double half = 0.5 * du, mid = u0 + half;
            for (int k = 0; k < points; ++k) {
                const double t = std::exp(mid + half * gl.x[static_cast<size_t>(k)]);
                parts.push_back(half * gl.w[static_cast<size_t>(k)] * t * f(t));
            }
        }
        hi = lo;
    }
    res.value = pairwise_sum(parts);

    const double eps = hi;
    const double f1 = f(eps), f2 = f(eps / 2.0);
    if (f1 == 0.0) return res;
    double q = 0.0;
    if (f2 / f1 > 0.0 && std::isfinite(f2 / f1)) q = std::log2(f2 / f1);
    res.tail_exponent = q;
    if (q >= 1.0) {
        res.tail_divergent = true;
        res.tail = std::copysign(std::numeric_limits<double>::infinity(), f1);
    } else {
        res.tail = f1 * eps / (1.0 - q);
    }
    res.value += res.tail;
    return res;
}

}  // namespace onehom
