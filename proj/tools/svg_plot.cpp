#include "svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

namespace beams {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 440.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 170.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"};

bool usable(double v, bool log_axis) { return std::isfinite(v) && (!log_axis || v > 0.0); }

double axis_value(double v, bool log_axis) { return log_axis ? std::log10(v) : v; }

std::string escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else if (c == '&') out += "&amp;";
        else out += c;
    }
    return out;
}

std::string tick_label(double v, bool log_axis)
{
    std::ostringstream os;
    if (log_axis) os << "1e" << std::lround(v);
    else os << std::setprecision(4) << v;
    return os.str();
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void add(double v)
    {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void pad(bool log_axis)
    {
        if (!(lo <= hi)) {
            lo = 0.0;
            hi = 1.0;
        }
        if (log_axis) {
            lo = std::floor(lo);
            hi = std::ceil(hi);
        }
        if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
            lo -= 0.5 * std::max(1.0, std::abs(lo));
            hi += 0.5 * std::max(1.0, std::abs(hi));
        }
    }
};

}  // namespace

PlotSpec default_plot_spec(const std::string& name, const Series& series)
{
    PlotSpec spec;
    spec.title = name;
    spec.x_label = series.columns.empty() ? "" : series.columns.front();
    const auto decades = [&](std::size_t k) {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (const auto& row : series.rows) {
            if (k >= row.size() || !std::isfinite(row[k])) continue;
            if (row[k] <= 0.0) return 0.0;
            lo = std::min(lo, row[k]);
            hi = std::max(hi, row[k]);
        }
        return hi > 0.0 ? std::log10(hi / lo) : 0.0;
    };
    spec.log_x = decades(0) > 2.0;
    for (std::size_t k = 1; k < series.columns.size(); ++k) spec.log_y = spec.log_y || decades(k) > 2.0;
    return spec;
}

std::string svg_line_plot(const Series& series, const PlotSpec& spec)
{
    Range xr, yr;
    for (const auto& row : series.rows) {
        if (row.empty() || !usable(row[0], spec.log_x)) continue;
        xr.add(axis_value(row[0], spec.log_x));
        for (std::size_t k = 1; k < row.size(); ++k)
            if (usable(row[k], spec.log_y)) yr.add(axis_value(row[k], spec.log_y));
    }
    xr.pad(spec.log_x);
    yr.pad(spec.log_y);
    const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
    const auto X = [&](double v) { return kLeft + (axis_value(v, spec.log_x) - xr.lo) / (xr.hi - xr.lo) * pw; };
    const auto Y = [&](double v) { return kTop + ph - (axis_value(v, spec.log_y) - yr.lo) / (yr.hi - yr.lo) * ph; };

    std::ostringstream os;
    os << std::setprecision(6);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << kLeft << "\" y=\"24\" font-size=\"15\">" << escape(spec.title) << "</text>\n";
    os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"black\"/>\n";
    constexpr int kTicks = 5;
    for (int i = 0; i <= kTicks; ++i) {
        const double xv = xr.lo + (xr.hi - xr.lo) * i / kTicks;
        const double yv = yr.lo + (yr.hi - yr.lo) * i / kTicks;
        const double px = kLeft + pw * i / kTicks, py = kTop + ph - ph * i / kTicks;
        os << "<line x1=\"" << px << "\" y1=\"" << kTop + ph << "\" x2=\"" << px << "\" y2=\"" << kTop + ph + 5 << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << px << "\" y=\"" << kTop + ph + 20 << "\" text-anchor=\"middle\">" << tick_label(xv, spec.log_x) << "</text>\n";
        os << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << py << "\" x2=\"" << kLeft << "\" y2=\"" << py << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << kLeft - 8 << "\" y=\"" << py + 4 << "\" text-anchor=\"end\">" << tick_label(yv, spec.log_y) << "</text>\n";
    }
    os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 15 << "\" text-anchor=\"middle\">" << escape(spec.x_label) << "</text>\n";
    for (std::size_t k = 1; k < series.columns.size(); ++k) {
        const char* color = kColors[(k - 1) % (sizeof(kColors) / sizeof(kColors[0]))];
        std::ostringstream pts;
        pts << std::setprecision(6);
        std::size_t count = 0;
        for (const auto& row : series.rows) {
            if (k >= row.size() || !usable(row[0], spec.log_x) || !usable(row[k], spec.log_y)) continue;
            pts << X(row[0]) << ',' << Y(row[k]) << ' ';
            ++count;
        }
        if (count > 0)
            os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"" << pts.str() << "\"/>\n";
        const double ly = kTop + 14.0 * k;
        os << "<line x1=\"" << kWidth - kRight + 12 << "\" y1=\"" << ly << "\" x2=\"" << kWidth - kRight + 32 << "\" y2=\"" << ly
           << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << kWidth - kRight + 38 << "\" y=\"" << ly + 4 << "\">" << escape(series.columns[k]) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace beams
