#include "onehom/curve.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

namespace onehom {

AngularGrid::AngularGrid(int n_nodes) : n_(n_nodes), h_(0.0) {
    if (n_nodes < 16) throw InvalidArgument("angular grid needs at least 16 nodes");
    h_ = 2.0 * std::numbers::pi / n_nodes;
}

double AngularGrid::node(int i) const { return 2.0 * std::numbers::pi * wrap(i) / n_; }

double AngularGrid::centered(int i) const {
    const int k = wrap(i);
    return 2 * k > n_ ? 2.0 * std::numbers::pi * (k - n_) / n_ : 2.0 * std::numbers::pi * k / n_;
}

Curve::Curve(AngularGrid grid, std::vector<Vec2> samples, std::optional<int> pinned_index,
             CurveEvaluator exact)
    : grid_(grid), samples_(std::move(samples)), pinned_(pinned_index), exact_(std::move(exact)) {
    if (static_cast<int>(samples_.size()) != grid_.size())
        throw InvalidArgument("sample count does not match grid");
    for (const auto& v : samples_)
        if (!v.allFinite()) throw InvalidArgument("curve samples must be finite");
    if (pinned_) {
        pinned_ = grid_.wrap(*pinned_);
        samples_[static_cast<size_t>(*pinned_)] = Vec2::Zero();
    }
}

Curve Curve::sample(const AngularGrid& grid, const std::function<Vec2(double)>& g,
                    std::optional<int> pinned_index) {
    std::vector<Vec2> v(static_cast<size_t>(grid.size()));
    for (int i = 0; i < grid.size(); ++i) v[static_cast<size_t>(i)] = g(grid.node(i));
    return Curve(grid, std::move(v), pinned_index);
}

Curve Curve::sample_exact(const AngularGrid& grid, CurveEvaluator exact,
                          std::optional<int> pinned_index) {
    std::vector<Vec2> v(static_cast<size_t>(grid.size()));
    for (int i = 0; i < grid.size(); ++i) v[static_cast<size_t>(i)] = exact(grid.node(i)).g;
    return Curve(grid, std::move(v), pinned_index, std::move(exact));
}

Curve Curve::rotated(int shift) const {
    std::vector<Vec2> v(samples_.size());
    for (int i = 0; i < size(); ++i) v[static_cast<size_t>(i)] = (*this)[i + shift];
    std::optional<int> pin;
    if (pinned_) pin = grid_.wrap(*pinned_ - shift);
    CurveEvaluator ex;
    if (exact_) {
        const double a = shift * grid_.spacing();
        ex = [f = exact_, a](double t) { return f(t + a); };
    }
    return Curve(grid_, std::move(v), pin, std::move(ex));
}

DerivedCurve differentiate(const Curve& curve) {
    const int n = curve.size();
    const double h = curve.grid().spacing();
    DerivedCurve out{curve, std::vector<Vec2>(static_cast<size_t>(n)),
                     std::vector<double>(static_cast<size_t>(n))};
    for (int i = 0; i < n; ++i) {
        const Vec2 dg = (8.0 * (curve[i + 1] - curve[i - 1]) - (curve[i + 2] - curve[i - 2])) / (12.0 * h);
        out.dg[static_cast<size_t>(i)] = dg;
        out.jac[static_cast<size_t>(i)] = jacobian(curve[i], dg);
    }
    return out;
}

DerivedCurve differentiate_exact(const Curve& curve) {
    if (!curve.has_exact()) throw InvalidArgument("curve has no exact evaluator");
    const int n = curve.size();
    DerivedCurve out{curve, std::vector<Vec2>(static_cast<size_t>(n)),
                     std::vector<double>(static_cast<size_t>(n))};
    for (int i = 0; i < n; ++i) {
        Vec2 dg = curve.exact()(curve.grid().node(i)).dg;
        if (curve.pinned_index() && *curve.pinned_index() == i) dg = Vec2::Zero();
        out.dg[static_cast<size_t>(i)] = dg;
        out.jac[static_cast<size_t>(i)] = jacobian(curve[i], dg);
    }
    return out;
}

Mat2 one_homogeneous_gradient(const Vec2& g, const Vec2& dg, double theta) {
    return g * e_R(theta).transpose() + dg * e_theta(theta).transpose();
}

PolarProfile polar_decompose(const DerivedCurve& curve, double theta_lo, double theta_hi,
                             const PolarOptions& opts) {
    const double two_pi = 2.0 * std::numbers::pi;
    if (!(theta_lo > 0.0 && theta_lo < theta_hi && theta_hi < two_pi))
        throw InvalidArgument("polar interval must satisfy 0 < lo < hi < 2pi");
    const auto& grid = curve.curve.grid();
    PolarProfile p;
    p.theta_lo = theta_lo;
    p.theta_hi = theta_hi;
    for (int i = 0; i < grid.size(); ++i) {
        const double t = grid.node(i);
        if (t < theta_lo || t > theta_hi) continue;
        const Vec2& g = curve.g(i);
        const double r = g.norm();
        if (!(r > opts.r_min)) {
            std::ostringstream msg;
            msg << "|g| = " << r << " at theta = " << t << " inside polar interval";
            throw ZeroRadius(msg.str());
        }
        double gam = std::atan2(g.y(), g.x());
        if (!p.gamma.empty()) {
            double jump = gam - p.gamma.back();
            jump -= two_pi * std::round(jump / two_pi);
            if (std::abs(jump) > std::numbers::pi / 2) {
                std::ostringstream msg;
                msg << "angle increment " << jump << " between adjacent nodes near theta = " << t;
                throw GridTooCoarse(msg.str());
            }
            gam = p.gamma.back() + jump;
        }
        p.index.push_back(i);
        p.theta.push_back(t);
        p.r.push_back(r);
        p.gamma.push_back(gam);
    }
    const int m = static_cast<int>(p.gamma.size());
    if (m < 2) throw InvalidArgument("polar interval contains fewer than two nodes");
    const double h = grid.spacing();
    p.j.resize(static_cast<size_t>(m));
    const auto& y = p.gamma;
    for (int k = 0; k < m; ++k) {
        const auto u = static_cast<size_t>(k);
        if (k >= 2 && k + 2 < m) {
            p.j[u] = (8.0 * (y[u + 1] - y[u - 1]) - (y[u + 2] - y[u - 2])) / (12.0 * h);
        } else if (k >= 1 && k + 1 < m) {
            p.j[u] = (y[u + 1] - y[u - 1]) / (2.0 * h);
        } else if (m == 2) {
            p.j[u] = (y[1] - y[0]) / h;
        } else if (k == 0) {
            p.j[u] = (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * h);
        } else {
            p.j[u] = (3.0 * y[u] - 4.0 * y[u - 1] + y[u - 2]) / (2.0 * h);
        }
    }
    return p;
}

void write_curve_csv(std::ostream& os, const Curve& curve) {
    os << "theta,gx,gy\n" << std::setprecision(17);
    for (int i = 0; i < curve.size(); ++i)
        os << curve.grid().node(i) << ',' << curve[i].x() << ',' << curve[i].y() << '\n';
}

Curve read_curve_csv(std::istream& is, std::optional<int> pinned_index) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("theta,gx,gy", 0) != 0)
        throw InvalidArgument("curve CSV must start with header theta,gx,gy");
    std::vector<Vec2> v;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        double t = 0, x = 0, y = 0;
        char c1 = 0, c2 = 0;
        if (!(ls >> t >> c1 >> x >> c2 >> y) || c1 != ',' || c2 != ',')
            throw InvalidArgument("malformed curve CSV row: " + line);
        v.emplace_back(x, y);
    }
    AngularGrid grid(static_cast<int>(v.size()));
    if (!pinned_index) {
        for (int i = 0; i < grid.size(); ++i)
            if (v[static_cast<size_t>(i)].isZero(0.0)) {
                pinned_index = i;
                break;
            }
    }
    return Curve(grid, std::move(v), pinned_index);
}

}  // namespace onehom
