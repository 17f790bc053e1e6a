#ifndef QPS_TRACE_SERIES_HPP
#define QPS_TRACE_SERIES_HPP

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace qps {

// Tagged (x, y[, sigma_y]) series used for spectra, fringes, correlation
// traces and fit inputs/outputs.
struct TraceSeries {
    std::string x_unit;
    std::string y_unit;
    std::string tag;
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> y_sigma;  // empty when no uncertainties

    TraceSeries() = default;
    TraceSeries(std::string x_unit, std::string y_unit, std::string tag)
        : x_unit(std::move(x_unit)), y_unit(std::move(y_unit)), tag(std::move(tag)) {}

    void push(double xv, double yv) {
        x.push_back(xv);
        y.push_back(yv);
    }
    void push(double xv, double yv, double sv) {
        x.push_back(xv);
        y.push_back(yv);
        y_sigma.push_back(sv);
    }
    std::size_t size() const { return x.size(); }
    bool has_sigma() const { return !y_sigma.empty(); }
};

// CSV layout: header "<x_unit>,<y_unit>[,sigma],tag", one row per point,
// tag repeated per row so several series can share a file. Row order is
// the series order followed by point order, so output is deterministic.
void write_csv(std::ostream& out, std::span<const TraceSeries> series);
void write_csv(const std::string& path, std::span<const TraceSeries> series);
void write_csv(const std::string& path, const TraceSeries& series);

// Reads back files produced by write_csv; one series per distinct tag,
// in order of first appearance.
std::vector<TraceSeries> read_csv(std::istream& in);
std::vector<TraceSeries> read_csv_file(const std::string& path);

// Shared numeric formatting (12 significant digits, locale-independent).
std::string format_double(double v);

}  // namespace qps

#endif
