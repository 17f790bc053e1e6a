#include "qps/trace_series.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace qps {

std::string format_double(double v) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os << std::setprecision(12) << v;
    return os.str();
}

void write_csv(std::ostream& out, std::span<const TraceSeries> series) {
    if (series.empty()) throw std::invalid_argument("write_csv: no series");
    const bool sigma = series.front().has_sigma();
    for (const auto& s : series) {
        if (s.x_unit != series.front().x_unit || s.y_unit != series.front().y_unit ||
            s.has_sigma() != sigma) {
            throw std::invalid_argument("write_csv: series in one file must share units");
        }
        if (s.y.size() != s.x.size() ||
            (s.has_sigma() && s.y_sigma.size() != s.x.size())) {
            throw std::invalid_argument("write_csv: ragged series");
        }
    }
    out << series.front().x_unit << ',' << series.front().y_unit;
    if (sigma) out << ",sigma";
    out << ",tag\n";
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.size(); ++i) {
            out << format_double(s.x[i]) << ',' << format_double(s.y[i]);
            if (sigma) out << ',' << format_double(s.y_sigma[i]);
            out << ',' << s.tag << '\n';
        }
    }
}

void write_csv(const std::string& path, std::span<const TraceSeries> series) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    write_csv(out, series);
}

void write_csv(const std::string& path, const TraceSeries& series) {
    write_csv(path, std::span<const TraceSeries>(&series, 1));
}

std::vector<TraceSeries> read_csv(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("read_csv: empty input");
    std::vector<std::string> cols;
    {
        std::stringstream hs(header);
        std::string c;
        while (std::getline(hs, c, ',')) cols.push_back(c);
    }
    if (cols.size() < 3 || cols.back() != "tag") {
        throw std::runtime_error("read_csv: unexpected header");
    }
    const bool sigma = cols.size() == 4;
    std::vector<TraceSeries> series;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ls(line);
        std::string xf, yf, sf, tag;
        std::getline(ls, xf, ',');
        std::getline(ls, yf, ',');
        if (sigma) std::getline(ls, sf, ',');
        std::getline(ls, tag, ',');
        TraceSeries* cur = nullptr;
        for (auto& s : series) {
            if (s.tag == tag) { cur = &s; break; }
        }
        if (!cur) {
            series.emplace_back(cols[0], cols[1], tag);
            cur = &series.back();
        }
        if (sigma) {
            cur->push(std::stod(xf), std::stod(yf), std::stod(sf));
        } else {
            cur->push(std::stod(xf), std::stod(yf));
        }
    }
    return series;
}

std::vector<TraceSeries> read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    return read_csv(in);
}

}  // namespace qps
