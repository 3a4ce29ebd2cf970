#include "screject/svg.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "screject/error.hpp"

namespace screject {

namespace {

constexpr double kWidth = 760;
constexpr double kHeight = 480;
constexpr double kMarginLeft = 70;
constexpr double kMarginRight = 160;  // room for the legend
constexpr double kMarginTop = 45;
constexpr double kMarginBottom = 55;

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                          "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string fmt(double x) {
    std::ostringstream ss;
    ss.precision(6);
    ss << x;
    return ss.str();
}

}  // namespace

void LineChart::add_series(std::string name, std::vector<std::pair<double, double>> points) {
    if (points.empty()) {
        throw InvalidInput("series '" + name + "' has no points");
    }
    series_.push_back({std::move(name), std::move(points)});
}

std::string LineChart::render() const {
    if (series_.empty()) {
        throw InvalidInput("chart has no series");
    }
    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    bool first = true;
    for (const auto& s : series_) {
        for (const auto& [x, y] : s.points) {
            if (log_x_ && x <= 0.0) {
                throw InvalidInput("log-x chart needs strictly positive x values");
            }
            if (first) {
                xmin = xmax = x;
                ymin = ymax = y;
                first = false;
            }
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    }
    if (xmax == xmin) {
        xmax = xmin + 1;
    }
    if (ymax == ymin) {
        ymax = ymin + 1;
    }

    auto tx = [&](double x) {
        const double lo = log_x_ ? std::log10(xmin) : xmin;
        const double hi = log_x_ ? std::log10(xmax) : xmax;
        const double v = log_x_ ? std::log10(x) : x;
        return kMarginLeft + (v - lo) / (hi - lo) * (kWidth - kMarginLeft - kMarginRight);
    };
    auto ty = [&](double y) {
        return kHeight - kMarginBottom -
               (y - ymin) / (ymax - ymin) * (kHeight - kMarginTop - kMarginBottom);
    };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
    if (timestamp_) {
        const auto now = std::chrono::system_clock::now().time_since_epoch();
        svg << "<!-- generated "
            << std::chrono::duration_cast<std::chrono::seconds>(now).count() << " -->\n";
    }
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << kWidth / 2 << "\" y=\"25\" text-anchor=\"middle\" font-size=\"16\">"
        << title_ << "</text>\n";

    // Axes.
    svg << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kHeight - kMarginBottom << "\" x2=\""
        << kWidth - kMarginRight << "\" y2=\"" << kHeight - kMarginBottom
        << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kMarginTop << "\" x2=\"" << kMarginLeft
        << "\" y2=\"" << kHeight - kMarginBottom << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double fy = ymin + (ymax - ymin) * i / 5.0;
        svg << "<text x=\"" << kMarginLeft - 8 << "\" y=\"" << ty(fy) + 4
            << "\" text-anchor=\"end\" font-size=\"11\">" << fmt(fy) << "</text>\n";
        double fx;
        if (log_x_) {
            fx = std::pow(10.0, std::log10(xmin) + (std::log10(xmax) - std::log10(xmin)) * i / 5.0);
        } else {
            fx = xmin + (xmax - xmin) * i / 5.0;
        }
        svg << "<text x=\"" << tx(fx) << "\" y=\"" << kHeight - kMarginBottom + 18
            << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt(fx) << "</text>\n";
    }
    svg << "<text x=\"" << (kMarginLeft + kWidth - kMarginRight) / 2 << "\" y=\"" << kHeight - 12
        << "\" text-anchor=\"middle\" font-size=\"13\">" << x_label_ << "</text>\n";
    svg << "<text x=\"18\" y=\"" << kHeight / 2
        << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 " << kHeight / 2
        << ")\">" << y_label_ << "</text>\n";

    // Series polylines and legend.
    for (std::size_t s = 0; s < series_.size(); ++s) {
        const char* color = kPalette[s % (sizeof(kPalette) / sizeof(kPalette[0]))];
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& [x, y] : series_[s].points) {
            svg << fmt(tx(x)) << "," << fmt(ty(y)) << " ";
        }
        svg << "\"/>\n";
        const double ly = kMarginTop + 18.0 * static_cast<double>(s);
        svg << "<line x1=\"" << kWidth - kMarginRight + 10 << "\" y1=\"" << ly << "\" x2=\""
            << kWidth - kMarginRight + 34 << "\" y2=\"" << ly << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << kWidth - kMarginRight + 40 << "\" y=\"" << ly + 4
            << "\" font-size=\"11\">" << series_[s].name << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

void LineChart::write(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    out << render();
}

}  // namespace screject
