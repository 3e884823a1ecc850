#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace klayer_cli {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Creates the directory and checks that a file can be written into it.
void prepare_output_dir(const std::filesystem::path& dir);

/// Fixed header, one row per entry, numbers with 17 significant digits.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
    void row(const std::vector<double>& values);
    void row(const std::string& first, const std::vector<double>& values);
    void text_row(const std::vector<std::string>& cells);
    void close();

private:
    void line(const std::string& s);

    std::filesystem::path path_;
    std::string buffer_;
};

std::string format_number(double x);

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

/// Standalone SVG line plot. log_y plots log10 of positive values.
void write_svg_plot(const std::filesystem::path& path, const std::string& title, const std::string& xlabel,
                    const std::string& ylabel, const std::vector<Series>& series, bool log_y = false);

/// Binary greyscale PGM of a row-major nx * ny field, row j = 0 at the bottom.
/// Entries with mask == 0 are drawn black.
void write_pgm(const std::filesystem::path& path, int nx, int ny, const std::vector<double>& values,
               const std::vector<unsigned char>& mask);

}  // namespace klayer_cli
