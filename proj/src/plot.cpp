#include "llab/plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "llab/error.hpp"

namespace llab {

namespace {

// Piecewise-linear dark-blue -> teal -> yellow ramp.
std::array<int, 3> colour(double t) {
    static constexpr double stops[3][3] = {{68, 1, 84}, {33, 145, 140}, {253, 231, 37}};
    t = std::clamp(t, 0.0, 1.0);
    const int seg = t < 0.5 ? 0 : 1;
    const double w = t < 0.5 ? 2.0 * t : 2.0 * t - 1.0;
    std::array<int, 3> c{};
    for (int i = 0; i < 3; ++i)
        c[static_cast<std::size_t>(i)] = static_cast<int>(std::lround(stops[seg][i] + w * (stops[seg + 1][i] - stops[seg][i])));
    return c;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        if (ch == '<') out += "&lt;";
        else if (ch == '>') out += "&gt;";
        else if (ch == '&') out += "&amp;";
        else out += ch;
    }
    return out;
}

}  // namespace

std::string heatmap_svg(const ScalarField& f, std::size_t level, const std::string& title) {
    const auto& g = f.grid();
    if (level >= g.levels()) throw InvalidInput("plot level out of range");
    const auto s = f.slice(level);
    const std::size_t nx = g.space.extents[0];
    const std::size_t ny = g.space.dim == 2 ? g.space.extents[1] : 1;
    const double lo = *std::min_element(s.begin(), s.end());
    const double hi = *std::max_element(s.begin(), s.end());
    const double span = hi > lo ? hi - lo : 1.0;
    const int cell = std::max(2, static_cast<int>(512 / std::max(nx, ny)));
    const int w = cell * static_cast<int>(nx), h = cell * static_cast<int>(ny);

    std::ostringstream out;
    char buf[160];
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h + 40 << "\">\n";
    std::snprintf(buf, sizeof buf, "<text x=\"4\" y=\"16\" font-size=\"13\">%s  t=%.6g</text>\n", escape(title).c_str(),
                  g.time(level));
    out << buf;
    std::snprintf(buf, sizeof buf, "<text x=\"4\" y=\"32\" font-size=\"11\">min %.6g  max %.6g</text>\n", lo, hi);
    out << buf;
    out << "<g transform=\"translate(0,40)\" shape-rendering=\"crispEdges\">\n";
    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            const auto c = colour((s[j * nx + i] - lo) / span);
            // y axis points up
            std::snprintf(buf, sizeof buf, "<rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"%d\" fill=\"#%02x%02x%02x\"/>\n",
                          static_cast<int>(i) * cell, static_cast<int>(ny - 1 - j) * cell, cell, cell, c[0], c[1], c[2]);
            out << buf;
        }
    }
    out << "</g>\n</svg>\n";
    return out.str();
}

}  // namespace llab
