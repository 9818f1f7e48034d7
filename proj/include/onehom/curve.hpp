#pragma once

#include <Eigen/Dense>

#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace onehom {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InvalidArgument : Error {
    using Error::Error;
};
struct ZeroRadius : Error {
    using Error::Error;
};
struct GridTooCoarse : Error {
    using Error::Error;
};

inline Vec2 e_R(double theta) { return {std::cos(theta), std::sin(theta)}; }
inline Vec2 e_theta(double theta) { return {-std::sin(theta), std::cos(theta)}; }

// Quarter turn J = [[0,-1],[1,0]].
inline Vec2 quarter_turn(const Vec2& v) { return {-v.y(), v.x()}; }

class AngularGrid {
public:
    explicit AngularGrid(int n_nodes);

    int size() const { return n_; }
    double spacing() const { return h_; }
    double node(int i) const;
    // Node angle mapped into (-pi, pi].
    double centered(int i) const;
    int wrap(int i) const { return ((i % n_) + n_) % n_; }

private:
    int n_;
    double h_;
};

// Exact value and derivative of a curve at an arbitrary angle.
struct CurveJet {
    Vec2 g;
    Vec2 dg;
};
using CurveEvaluator = std::function<CurveJet(double theta)>;

class Curve {
public:
    Curve(AngularGrid grid, std::vector<Vec2> samples, std::optional<int> pinned_index = {},
          CurveEvaluator exact = {});

    static Curve sample(const AngularGrid& grid, const std::function<Vec2(double)>& g,
                        std::optional<int> pinned_index = {});
    static Curve sample_exact(const AngularGrid& grid, CurveEvaluator exact,
                              std::optional<int> pinned_index = {});

    const AngularGrid& grid() const { return grid_; }
    const std::vector<Vec2>& samples() const { return samples_; }
    const Vec2& operator[](int i) const { return samples_[static_cast<size_t>(grid_.wrap(i))]; }
    int size() const { return grid_.size(); }
    std::optional<int> pinned_index() const { return pinned_; }
    bool has_exact() const { return static_cast<bool>(exact_); }
    const CurveEvaluator& exact() const { return exact_; }

    // Same curve with the node order shifted by `shift` (g(theta + shift*spacing)).
    Curve rotated(int shift) const;

private:
    AngularGrid grid_;
    std::vector<Vec2> samples_;
    std::optional<int> pinned_;
    CurveEvaluator exact_;
};

struct DerivedCurve {
    Curve curve;
    std::vector<Vec2> dg;
    std::vector<double> jac;

    int size() const { return curve.size(); }
    const Vec2& g(int i) const { return curve[i]; }
};

// Fourth-order periodic central differences.
DerivedCurve differentiate(const Curve& curve);
// Derivatives from the curve's exact evaluator (throws InvalidArgument without one).
DerivedCurve differentiate_exact(const Curve& curve);

Mat2 one_homogeneous_gradient(const Vec2& g, const Vec2& dg, double theta);
inline double jacobian(const Vec2& g, const Vec2& dg) { return quarter_turn(g).dot(dg); }

struct PolarProfile {
    double theta_lo = 0.0;
    double theta_hi = 0.0;
    std::vector<int> index;
    std::vector<double> theta;
    std::vector<double> r;
    std::vector<double> gamma;
    std::vector<double> j;
};

struct PolarOptions {
    double r_min = 1e-12;
};

// Polar chart of the nodes with theta in [lo, hi] (0 < lo < hi < 2 pi).
PolarProfile polar_decompose(const DerivedCurve& curve, double theta_lo, double theta_hi,
                             const PolarOptions& opts = {});

void write_curve_csv(std::ostream& os, const Curve& curve);
Curve read_curve_csv(std::istream& is, std::optional<int> pinned_index = {});

}  // namespace onehom
