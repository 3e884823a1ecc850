#include "output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <system_error>

namespace klayer_cli {

namespace fs = std::filesystem;

void prepare_output_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw IoError("cannot create output directory " + dir.string() + (ec ? ": " + ec.message() : ""));
    }
    const fs::path probe = dir / ".klayer-write-probe";
    {
        std::ofstream out(probe);
        if (!out || !(out << "probe") || (out.close(), out.fail())) {
            throw IoError("output directory " + dir.string() + " is not writable");
        }
    }
    fs::remove(probe, ec);
}

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

CsvWriter::CsvWriter(const fs::path& path, const std::vector<std::string>& header) : path_(path) {
    text_row(header);
}

void CsvWriter::line(const std::string& s) {
    buffer_ += s;
    buffer_ += '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
    std::string s;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) s += ',';
        s += format_number(values[i]);
    }
    line(s);
}

void CsvWriter::row(const std::string& first, const std::vector<double>& values) {
    std::string s = first;
    for (double v : values) s += ',' + format_number(v);
    line(s);
}

void CsvWriter::text_row(const std::vector<std::string>& cells) {
    std::string s;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) s += ',';
        s += cells[i];
    }
    line(s);
}

void CsvWriter::close() {
    std::ofstream out(path_, std::ios::binary);
    out << buffer_;
    out.close();
    if (!out) throw IoError("failed to write " + path_.string());
}

namespace {

const char* kColours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string fmt(double x, const char* spec = "%.4g") {
    char buf[40];
    std::snprintf(buf, sizeof buf, spec, x);
    return buf;
}

}  // namespace

void write_svg_plot(const fs::path& path, const std::string& title, const std::string& xlabel,
                    const std::string& ylabel, const std::vector<Series>& series, bool log_y) {
    constexpr double W = 720, H = 480, L = 80, Rm = 20, T = 40, B = 60;
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    auto ty = [&](double y) { return log_y ? std::log10(y) : y; };
    for (const Series& s : series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (log_y && !(s.y[i] > 0.0)) continue;
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, ty(s.y[i]));
            y1 = std::max(y1, ty(s.y[i]));
        }
    }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) y1 = y0 + 1;
    auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - Rm); };
    auto py = [&](double y) { return H - B - (ty(y) - y0) / (y1 - y0) * (H - T - B); };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"480\" font-family=\"sans-serif\" "
           "font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"360\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" + escape(title) + "</text>\n";
    svg += "<rect x=\"80\" y=\"40\" width=\"620\" height=\"380\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double xv = x0 + (x1 - x0) * k / 4.0, yv = y0 + (y1 - y0) * k / 4.0;
        const double gx = L + (W - L - Rm) * k / 4.0, gy = H - B - (H - T - B) * k / 4.0;
        svg += "<text x=\"" + fmt(gx, "%.1f") + "\" y=\"438\" text-anchor=\"middle\">" + fmt(xv) + "</text>\n";
        svg += "<text x=\"74\" y=\"" + fmt(gy + 4, "%.1f") + "\" text-anchor=\"end\">" +
               (log_y ? "1e" + fmt(yv, "%.2g") : fmt(yv)) + "</text>\n";
    }
    svg += "<text x=\"390\" y=\"465\" text-anchor=\"middle\">" + escape(xlabel) + "</text>\n";
    svg += "<text x=\"18\" y=\"230\" text-anchor=\"middle\" transform=\"rotate(-90 18 230)\">" + escape(ylabel) +
           "</text>\n";
    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* colour = kColours[s % 5];
        svg += "<polyline fill=\"none\" stroke=\"" + std::string(colour) + "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < series[s].x.size(); ++i) {
            if (log_y && !(series[s].y[i] > 0.0)) continue;
            svg += fmt(px(series[s].x[i]), "%.2f") + "," + fmt(py(series[s].y[i]), "%.2f") + " ";
        }
        svg += "\"/>\n";
        const std::string ly = fmt(56 + 16.0 * s, "%.0f");
        svg += "<line x1=\"560\" x2=\"585\" y1=\"" + ly + "\" y2=\"" + ly + "\" stroke=\"" + colour +
               "\" stroke-width=\"2\"/><text x=\"590\" y=\"" + fmt(60 + 16.0 * s, "%.0f") + "\">" +
               escape(series[s].name) + "</text>\n";
    }
    svg += "</svg>\n";
    std::ofstream out(path, std::ios::binary);
    out << svg;
    out.close();
    if (!out) throw IoError("failed to write " + path.string());
}

void write_pgm(const fs::path& path, int nx, int ny, const std::vector<double>& values,
               const std::vector<unsigned char>& mask) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (!mask[k]) continue;
        lo = std::min(lo, values[k]);
        hi = std::max(hi, values[k]);
    }
    const double span = hi > lo ? hi - lo : 1.0;
    std::string data = "P5\n" + std::to_string(nx) + " " + std::to_string(ny) + "\n255\n";
    for (int j = ny - 1; j >= 0; --j) {
        for (int i = 0; i < nx; ++i) {
            const std::size_t k = static_cast<std::size_t>(j) * nx + i;
            const double t = mask[k] ? (values[k] - lo) / span : 0.0;
            data += static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * std::clamp(t, 0.0, 1.0))));
        }
    }
    std::ofstream out(path, std::ios::binary);
    out << data;
    out.close();
    if (!out) throw IoError("failed to write " + path.string());
}

}  // namespace klayer_cli
