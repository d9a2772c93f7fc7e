#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pmelab/grid.hpp"

namespace pmelab::report {

inline constexpr std::string_view kCsvSchema = "pmelab-csv v1";

/// Shortest-roundtrip-safe text for a double.
inline std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// FNV-1a 64-bit, hex encoded. Used for output stamps.
inline std::string fnv1a_hex(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("failed writing " + path.string());
}

/// CSV with a versioned schema comment as the first line.
class CsvTable {
   public:
    CsvTable(std::string kind, std::vector<std::string> columns) : kind_(std::move(kind)), columns_(std::move(columns)) {}

    void add_row(const std::vector<double>& row) {
        if (row.size() != columns_.size()) throw Error("csv row width does not match header");
        rows_.push_back(row);
    }

    std::size_t rows() const noexcept { return rows_.size(); }

    std::string str() const {
        std::string s = "# " + std::string(kCsvSchema) + " " + kind_ + "\n";
        for (std::size_t i = 0; i < columns_.size(); ++i) s += (i ? "," : "") + columns_[i];
        s += "\n";
        for (const auto& r : rows_) {
            for (std::size_t i = 0; i < r.size(); ++i) s += (i ? "," : "") + num(r[i]);
            s += "\n";
        }
        return s;
    }

   private:
    std::string kind_;
    std::vector<std::string> columns_;
    std::vector<std::vector<double>> rows_;
};

/// Cell centres and values of a snapshot: columns x[,y],u.
inline CsvTable state_table(const State& s, const std::string& kind = "snapshot") {
    std::vector<std::string> cols{"x"};
    if (s.grid.dimension() == 2) cols.push_back("y");
    cols.push_back("u");
    CsvTable t(kind + " t=" + num(s.time), cols);
    for (std::size_t i = 0; i < s.values.size(); ++i) {
        const Point x = s.grid.center(i);
        if (s.grid.dimension() == 2)
            t.add_row({x[0], x[1], s.values[i]});
        else
            t.add_row({x[0], s.values[i]});
    }
    return t;
}

// ---------------------------------------------------------------- SVG

enum class CurveStyle { solid, dashed, markers };

struct Curve {
    std::string label;
    std::vector<std::pair<double, double>> points;
    CurveStyle style = CurveStyle::solid;
};

struct PlotOptions {
    std::string title;
    std::string x_label = "x";
    std::string y_label = "u";
    bool log_x = false;
    bool log_y = false;
    int width = 640;
    int height = 420;
    std::vector<std::string> annotations;
};

namespace detail {

inline std::string fmt(double v, const char* spec = "%.2f") {
    char buf[48];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

inline std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace detail

/// Standalone SVG: frame, ticks, one polyline per solid/dashed curve, one
/// <g class="points"> per marker curve, and one <text class="annotation">
/// per annotation. Output depends only on the inputs.
inline std::string render_svg(const std::vector<Curve>& curves, const PlotOptions& opt) {
    if (curves.empty()) throw PlotError("nothing to plot");
    auto tx = [&](double v) { return opt.log_x ? std::log10(v) : v; };
    auto ty = [&](double v) { return opt.log_y ? std::log10(v) : v; };
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& c : curves) {
        if (c.points.empty()) throw PlotError("curve '" + c.label + "' has no data");
        for (const auto& [x, y] : c.points) {
            if ((opt.log_x && !(x > 0)) || (opt.log_y && !(y > 0))) {
                throw PlotError("non-positive value on a log axis in '" + c.label + "'");
            }
            x0 = std::min(x0, tx(x));
            x1 = std::max(x1, tx(x));
            y0 = std::min(y0, ty(y));
            y1 = std::max(y1, ty(y));
        }
    }
    if (x1 == x0) {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if (y1 == y0) {
        y0 -= 0.5;
        y1 += 0.5;
    }
    const double pad_y = 0.05 * (y1 - y0);
    y0 -= pad_y;
    y1 += pad_y;

    const double left = 70, right = 20, top = 40, bottom = 50;
    const double pw = opt.width - left - right, ph = opt.height - top - bottom;
    auto px = [&](double x) { return left + (tx(x) - x0) / (x1 - x0) * pw; };
    auto py = [&](double y) { return top + (1.0 - (ty(y) - y0) / (y1 - y0)) * ph; };
    using detail::fmt;

    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(opt.width) + "\" height=\"" +
         std::to_string(opt.height) + "\" viewBox=\"0 0 " + std::to_string(opt.width) + " " +
         std::to_string(opt.height) + "\">\n";
    s += "<rect class=\"background\" x=\"0\" y=\"0\" width=\"" + std::to_string(opt.width) + "\" height=\"" +
         std::to_string(opt.height) + "\" fill=\"white\"/>\n";
    s += "<rect class=\"frame\" x=\"" + fmt(left) + "\" y=\"" + fmt(top) + "\" width=\"" + fmt(pw) +
         "\" height=\"" + fmt(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";
    if (!opt.title.empty()) {
        s += "<text class=\"title\" x=\"" + fmt(opt.width / 2.0) + "\" y=\"24\" text-anchor=\"middle\" "
             "font-family=\"sans-serif\" font-size=\"14\">" + detail::escape(opt.title) + "</text>\n";
    }
    for (int i = 0; i <= 4; ++i) {
        const double fx = x0 + (x1 - x0) * i / 4.0, fy = y0 + (y1 - y0) * i / 4.0;
        const double gx = left + pw * i / 4.0, gy = top + ph * (1.0 - i / 4.0);
        const double lx = opt.log_x ? std::pow(10.0, fx) : fx, ly = opt.log_y ? std::pow(10.0, fy) : fy;
        s += "<line class=\"tick\" x1=\"" + fmt(gx) + "\" y1=\"" + fmt(top + ph) + "\" x2=\"" + fmt(gx) + "\" y2=\"" +
             fmt(top + ph + 5) + "\" stroke=\"black\"/>\n";
        s += "<text class=\"tick-label\" x=\"" + fmt(gx) + "\" y=\"" + fmt(top + ph + 18) +
             "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" + fmt(lx, "%.3g") + "</text>\n";
        s += "<line class=\"tick\" x1=\"" + fmt(left - 5) + "\" y1=\"" + fmt(gy) + "\" x2=\"" + fmt(left) + "\" y2=\"" +
             fmt(gy) + "\" stroke=\"black\"/>\n";
        s += "<text class=\"tick-label\" x=\"" + fmt(left - 8) + "\" y=\"" + fmt(gy + 3) +
             "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" + fmt(ly, "%.3g") + "</text>\n";
    }
    s += "<text class=\"axis-label\" x=\"" + fmt(left + pw / 2) + "\" y=\"" + fmt(opt.height - 10.0) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" + detail::escape(opt.x_label) +
         "</text>\n";
    s += "<text class=\"axis-label\" x=\"16\" y=\"" + fmt(top + ph / 2) + "\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 " + fmt(top + ph / 2) + ")\">" +
         detail::escape(opt.y_label) + "</text>\n";

    for (const auto& c : curves) {
        if (c.style == CurveStyle::markers) {
            s += "<g class=\"points\" data-label=\"" + detail::escape(c.label) + "\" fill=\"black\">\n";
            for (const auto& [x, y] : c.points)
                s += "<circle cx=\"" + fmt(px(x)) + "\" cy=\"" + fmt(py(y)) + "\" r=\"2.5\"/>\n";
            s += "</g>\n";
            continue;
        }
        s += "<polyline data-label=\"" + detail::escape(c.label) + "\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"";
        if (c.style == CurveStyle::dashed) s += " stroke-dasharray=\"6,4\"";
        s += " points=\"";
        for (std::size_t i = 0; i < c.points.size(); ++i)
            s += (i ? " " : "") + fmt(px(c.points[i].first)) + "," + fmt(py(c.points[i].second));
        s += "\"/>\n";
    }
    double ay = top + 16;
    for (const auto& a : opt.annotations) {
        s += "<text class=\"annotation\" x=\"" + fmt(left + pw - 8) + "\" y=\"" + fmt(ay) +
             "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + detail::escape(a) + "</text>\n";
        ay += 14;
    }
    s += "</svg>\n";
    return s;
}

inline std::vector<std::pair<double, double>> profile_points(const State& s) {
    if (s.grid.dimension() != 1) throw PlotError("profile plots need a 1-D state");
    std::vector<std::pair<double, double>> v;
    for (std::size_t i = 0; i < s.values.size(); ++i) v.emplace_back(s.grid.center(i)[0], s.values[i]);
    return v;
}

/// Dashed initial profile and solid final profile.
inline std::string initial_final_svg(const State& initial, const State& final, const std::string& title) {
    PlotOptions o;
    o.title = title;
    return render_svg({{"u0", profile_points(initial), CurveStyle::dashed},
                       {"u(t=" + detail::fmt(final.time, "%g") + ")", profile_points(final), CurveStyle::solid}},
                      o);
}

}  // namespace pmelab::report
