#include "onehom/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace onehom::cli {

namespace {

constexpr double kSize = 800.0;
constexpr double kMargin = 90.0;
const char* kColors[] = {"#1f4e9c", "#c0392b", "#218c3a", "#7d3c98", "#b9770e", "#444444"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", std::abs(v) < 1e-12 ? 0.0 : v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += ch;
        }
    }
    return out;
}

// Tick spacing from {1, 2, 5} x 10^k giving at most ~6 ticks.
double tick_step(double span) {
    const double raw = span / 6.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (m * mag >= raw) return m * mag;
    return 10.0 * mag;
}

struct Box {
    double x0, x1, y0, y1;
};

}  // namespace

PlotKind parse_plot_kind(const std::string& s) {
    if (s == "curve") return PlotKind::curve;
    if (s == "spiral") return PlotKind::spiral;
    if (s == "loglog") return PlotKind::loglog;
    throw InvalidArgument("plot kind must be curve, spiral or loglog, got '" + s + "'");
}

std::string emit_plot(const PlotArtifact& artifact, PlotKind kind) {
    const bool logs = kind == PlotKind::loglog;
    std::vector<PlotSeries> series;
    for (const auto& s : artifact.series) {
        PlotSeries t{s.label, {}, {}, s.dashed};
        for (size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            double x = s.x[i], y = s.y[i];
            if (logs) {
                if (!(x > 0.0 && y > 0.0)) continue;
                x = std::log10(x);
                y = std::log10(y);
            }
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            t.x.push_back(x);
            t.y.push_back(y);
        }
        if (!t.x.empty()) series.push_back(std::move(t));
    }
    if (series.empty()) throw EmptyArtifact("plot: artifact '" + artifact.title + "' has no drawable points");

    Box b{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const auto& s : series) {
        for (double x : s.x) b.x0 = std::min(b.x0, x), b.x1 = std::max(b.x1, x);
        for (double y : s.y) b.y0 = std::min(b.y0, y), b.y1 = std::max(b.y1, y);
    }
    if (kind != PlotKind::loglog) {
        // Planar images keep a 1:1 aspect ratio centered on the data.
        const double half = 0.5 * std::max(b.x1 - b.x0, b.y1 - b.y0);
        const double cx = 0.5 * (b.x0 + b.x1), cy = 0.5 * (b.y0 + b.y1);
        b = {cx - half, cx + half, cy - half, cy + half};
    }
    if (!(b.x1 > b.x0)) b.x0 -= 0.5, b.x1 += 0.5;
    if (!(b.y1 > b.y0)) b.y0 -= 0.5, b.y1 += 0.5;
    const double padx = 0.04 * (b.x1 - b.x0), pady = 0.04 * (b.y1 - b.y0);
    b = {b.x0 - padx, b.x1 + padx, b.y0 - pady, b.y1 + pady};

    const double plot = kSize - 2.0 * kMargin;
    auto px = [&](double x) { return kMargin + (x - b.x0) / (b.x1 - b.x0) * plot; };
    auto py = [&](double y) { return kSize - kMargin - (y - b.y0) / (b.y1 - b.y0) * plot; };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"800\" viewBox=\"0 0 800 800\">\n";
    os << "<rect x=\"0\" y=\"0\" width=\"800\" height=\"800\" fill=\"white\"/>\n";
    os << "<text x=\"400\" y=\"30\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"18\">"
       << escape(artifact.title) << "</text>\n";
    for (size_t i = 0; i < artifact.notes.size(); ++i)
        os << "<text x=\"400\" y=\"" << num(52.0 + 16.0 * static_cast<double>(i))
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#a00\">"
           << escape(artifact.notes[i]) << "</text>\n";
    os << "<rect x=\"" << num(kMargin) << "\" y=\"" << num(kMargin) << "\" width=\"" << num(plot) << "\" height=\""
       << num(plot) << "\" fill=\"none\" stroke=\"black\"/>\n";

    const double xs = tick_step(b.x1 - b.x0), ys = tick_step(b.y1 - b.y0);
    const std::string xprefix = logs ? "1e" : "", yprefix = logs ? "1e" : "";
    for (double t = std::ceil(b.x0 / xs) * xs; t <= b.x1; t += xs) {
        os << "<line x1=\"" << num(px(t)) << "\" y1=\"" << num(kSize - kMargin) << "\" x2=\"" << num(px(t))
           << "\" y2=\"" << num(kSize - kMargin + 8) << "\" stroke=\"black\"/>";
        os << "<text x=\"" << num(px(t)) << "\" y=\"" << num(kSize - kMargin + 24)
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << xprefix << tick_label(t)
           << "</text>\n";
    }
    for (double t = std::ceil(b.y0 / ys) * ys; t <= b.y1; t += ys) {
        os << "<line x1=\"" << num(kMargin - 8) << "\" y1=\"" << num(py(t)) << "\" x2=\"" << num(kMargin)
           << "\" y2=\"" << num(py(t)) << "\" stroke=\"black\"/>";
        os << "<text x=\"" << num(kMargin - 12) << "\" y=\"" << num(py(t) + 4)
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">" << yprefix << tick_label(t)
           << "</text>\n";
    }

    for (size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* color = kColors[k % (sizeof kColors / sizeof kColors[0])];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\""
           << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << " points=\"";
        for (size_t i = 0; i < s.x.size(); ++i) os << (i ? " " : "") << num(px(s.x[i])) << "," << num(py(s.y[i]));
        os << "\"/>\n";
        os << "<text x=\"" << num(kMargin + 10) << "\" y=\"" << num(kMargin + 20 + 16.0 * static_cast<double>(k))
           << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" << color << "\">" << escape(s.label)
           << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace onehom::cli
