#include "anonsim/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <iterator>
#include <optional>
#include <sstream>

namespace anonsim {

namespace {

std::string fixed(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

bool is_recall_bound(const std::string& name) {
    return name == "recall-lower" || name == "dandelion-recall";
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

}  // namespace

std::string render_region_svg(const std::vector<DetectionPoint>& points,
                              const std::vector<BoundRow>& bounds, const PlotOptions& options) {
    const double left = 70, right = 200, top = 40, bottom = 60;
    const double pw = options.width - left - right;
    const double ph = options.height - top - bottom;
    auto sx = [&](double r) { return left + std::clamp(r, 0.0, 1.0) * pw; };
    auto sy = [&](double d) { return top + (1.0 - std::clamp(d, 0.0, 1.0)) * ph; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << options.width << "\" height=\""
        << options.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << fixed(left) << "\" y=\"24\" font-size=\"15\">" << escape(options.title)
        << "</text>\n";

    // Lower-bound corner.
    std::optional<double> p_recall, p_precision;
    for (const auto& b : bounds) {
        if (b.name == "recall-lower") p_recall = b.value;
        if (b.name == "precision-lower") p_precision = b.value;
    }
    if (p_recall && p_precision) {
        svg << "<rect x=\"" << fixed(sx(*p_recall)) << "\" y=\"" << fixed(sy(1.0)) << "\" width=\""
            << fixed(sx(1.0) - sx(*p_recall)) << "\" height=\""
            << fixed(sy(*p_precision) - sy(1.0))
            << "\" fill=\"#fdd49e\" fill-opacity=\"0.45\" stroke=\"none\"/>\n";
    }

    // Axes and ticks.
    svg << "<rect x=\"" << fixed(left) << "\" y=\"" << fixed(top) << "\" width=\"" << fixed(pw)
        << "\" height=\"" << fixed(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 10; ++i) {
        const double t = i / 10.0;
        svg << "<line x1=\"" << fixed(sx(t)) << "\" y1=\"" << fixed(sy(0)) << "\" x2=\""
            << fixed(sx(t)) << "\" y2=\"" << fixed(sy(0) + 5) << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << fixed(sx(t)) << "\" y=\"" << fixed(sy(0) + 18)
            << "\" text-anchor=\"middle\">" << fixed(t).substr(0, 3) << "</text>\n";
        svg << "<line x1=\"" << fixed(sx(0) - 5) << "\" y1=\"" << fixed(sy(t)) << "\" x2=\""
            << fixed(sx(0)) << "\" y2=\"" << fixed(sy(t)) << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << fixed(sx(0) - 8) << "\" y=\"" << fixed(sy(t) + 4)
            << "\" text-anchor=\"end\">" << fixed(t).substr(0, 3) << "</text>\n";
    }
    svg << "<text x=\"" << fixed(left + pw / 2) << "\" y=\"" << fixed(options.height - 18.0)
        << "\" text-anchor=\"middle\">recall</text>\n";
    svg << "<text x=\"18\" y=\"" << fixed(top + ph / 2) << "\" transform=\"rotate(-90 18 "
        << fixed(top + ph / 2) << ")\" text-anchor=\"middle\">precision</text>\n";

    // Region boundaries D = R and D = R^2.
    svg << "<polyline fill=\"none\" stroke=\"#444\" stroke-width=\"1.5\" points=\"" << fixed(sx(0))
        << ',' << fixed(sy(0)) << ' ' << fixed(sx(1)) << ',' << fixed(sy(1)) << "\"/>\n";
    svg << "<polyline fill=\"none\" stroke=\"#444\" stroke-width=\"1.5\" points=\"";
    for (int i = 0; i <= 100; ++i) {
        const double r = i / 100.0;
        svg << (i ? " " : "") << fixed(sx(r)) << ',' << fixed(sy(r * r));
    }
    svg << "\"/>\n";

    // Bound guides.
    for (const auto& b : bounds) {
        const bool vertical = is_recall_bound(b.name);
        const char* dash = b.direction == "upper" ? "6,3" : (b.direction == "exact" ? "2,2" : "4,4");
        if (vertical) {
            svg << "<line x1=\"" << fixed(sx(b.value)) << "\" y1=\"" << fixed(sy(0)) << "\" x2=\""
                << fixed(sx(b.value)) << "\" y2=\"" << fixed(sy(1)) << "\"";
        } else {
            svg << "<line x1=\"" << fixed(sx(0)) << "\" y1=\"" << fixed(sy(b.value)) << "\" x2=\""
                << fixed(sx(1)) << "\" y2=\"" << fixed(sy(b.value)) << "\"";
        }
        svg << " stroke=\"#888\" stroke-dasharray=\"" << dash << "\"><title>" << escape(b.name)
            << " = " << fixed(b.value) << "</title></line>\n";
        if (!vertical)
            svg << "<text x=\"" << fixed(sx(1) + 4) << "\" y=\"" << fixed(sy(b.value) + 4)
                << "\" fill=\"#666\" font-size=\"10\">" << escape(b.name) << "</text>\n";
    }

    // Points with 2-stderr bars and a legend.
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& pt = points[i];
        const char* color = kPalette[i % std::size(kPalette)];
        const double x = sx(pt.recall), y = sy(pt.precision);
        svg << "<g stroke=\"" << color << "\" fill=\"" << color << "\">\n";
        svg << "<line x1=\"" << fixed(sx(pt.recall - 2 * pt.recall_se)) << "\" y1=\"" << fixed(y)
            << "\" x2=\"" << fixed(sx(pt.recall + 2 * pt.recall_se)) << "\" y2=\"" << fixed(y)
            << "\"/>\n";
        svg << "<line x1=\"" << fixed(x) << "\" y1=\"" << fixed(sy(pt.precision - 2 * pt.precision_se))
            << "\" x2=\"" << fixed(x) << "\" y2=\"" << fixed(sy(pt.precision + 2 * pt.precision_se))
            << "\"/>\n";
        svg << "<circle cx=\"" << fixed(x) << "\" cy=\"" << fixed(y) << "\" r=\"4\"/>\n";
        const double ly = top + 10 + 18.0 * static_cast<double>(i);
        svg << "<circle cx=\"" << fixed(left + pw + 90) << "\" cy=\"" << fixed(ly) << "\" r=\"4\"/>\n";
        svg << "</g>\n";
        svg << "<text x=\"" << fixed(left + pw + 98) << "\" y=\"" << fixed(ly + 4)
            << "\" font-size=\"10\">" << escape(pt.protocol + " / " + pt.topology) << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace anonsim
