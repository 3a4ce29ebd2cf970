#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace screject {

/// Minimal polyline line chart written straight to SVG, no plotting
/// dependency. Coordinates are mapped linearly (or log-x on request)
/// into a fixed viewport with simple axis ticks and a legend.
class LineChart {
public:
    LineChart(std::string title, std::string x_label, std::string y_label)
        : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {}

    void add_series(std::string name, std::vector<std::pair<double, double>> points);
    void set_log_x(bool log_x) { log_x_ = log_x; }
    void set_timestamp(bool stamp) { timestamp_ = stamp; }

    std::string render() const;
    void write(const std::filesystem::path& path) const;

private:
    struct Series {
        std::string name;
        std::vector<std::pair<double, double>> points;
    };

    std::string title_;
    std::string x_label_;
    std::string y_label_;
    std::vector<Series> series_;
    bool log_x_ = false;
    bool timestamp_ = false;
};

}  // namespace screject
