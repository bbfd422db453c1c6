#include <cmath>
#include <sstream>

#include "wkbsq/pipeline.hpp"

namespace wkbsq {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#e377c2"};
const char* kShades[] = {"#f0f4fa", "#faf0f0", "#f0faf2", "#f7f0fa",
                         "#faf6ec", "#f3eeec", "#ecf8fa", "#faeef6"};

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

} // namespace

std::string graph_to_svg(const StokesGraph& g) {
    double R = g.options.disk_radius;
    double size = 800.0;
    double margin = 20.0;
    double scale = (size - 2 * margin) / (2 * R);
    auto X = [&](double x) { return margin + (x + R) * scale; };
    auto Y = [&](double y) { return margin + (R - y) * scale; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\""
        << size << "\" viewBox=\"0 0 " << size << " " << size << "\">\n";
    svg << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // shaded regions
    for (const StokesRegion& r : g.regions) {
        if (r.boundary.empty()) continue;
        svg << "  <polygon class=\"region\" points=\"";
        for (auto p : r.boundary) svg << fmt(X(p.real())) << "," << fmt(Y(p.imag())) << " ";
        svg << "\" fill=\"" << kShades[r.id % 8] << "\" stroke=\"none\"/>\n";
    }

    // bounding circle
    svg << "  <circle cx=\"" << fmt(X(0)) << "\" cy=\"" << fmt(Y(0)) << "\" r=\""
        << fmt(R * scale) << "\" fill=\"none\" stroke=\"#888\" stroke-width=\"1\"/>\n";

    // one path per curve, colored by its sheet pair (unordered, by the
    // lambda values where the curve starts)
    std::vector<std::pair<double, double>> pair_keys;
    auto pair_color = [&](const StokesCurve& cv) {
        if (cv.lam_i.empty()) return 0;
        std::complex<double> a = cv.lam_i.front(), b = cv.lam_j.front();
        double k1 = std::min(a.real() + a.imag(), b.real() + b.imag());
        double k2 = std::max(a.real() + a.imag(), b.real() + b.imag());
        for (size_t k = 0; k < pair_keys.size(); ++k)
            if (std::abs(pair_keys[k].first - k1) < 1e-6 &&
                std::abs(pair_keys[k].second - k2) < 1e-6)
                return static_cast<int>(k);
        pair_keys.emplace_back(k1, k2);
        return static_cast<int>(pair_keys.size()) - 1;
    };
    for (const StokesCurve& cv : g.curves) {
        int color = pair_color(cv);
        svg << "  <path class=\"curve\" d=\"";
        for (size_t k = 0; k < cv.points.size(); ++k)
            svg << (k == 0 ? "M" : "L") << fmt(X(cv.points[k].real())) << " "
                << fmt(Y(cv.points[k].imag()));
        svg << "\" fill=\"none\" stroke=\"" << kPalette[color % 8]
            << "\" stroke-width=\"" << (cv.generation == 0 ? 1.6 : 1.1) << "\"/>\n";
    }

    // one marker per turning point
    for (auto t : g.turning_points)
        svg << "  <circle class=\"turning-point\" cx=\"" << fmt(X(t.real())) << "\" cy=\""
            << fmt(Y(t.imag())) << "\" r=\"4\" fill=\"#000\"/>\n";

    for (auto p : g.poles)
        svg << "  <circle class=\"pole\" cx=\"" << fmt(X(p.real())) << "\" cy=\""
            << fmt(Y(p.imag())) << "\" r=\"3.5\" fill=\"none\" stroke=\"#000\"/>\n";

    svg << "</svg>\n";
    return svg.str();
}

} // namespace wkbsq
