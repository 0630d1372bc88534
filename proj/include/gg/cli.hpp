#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gg::cli {

enum ExitCode { kOk = 0, kConfigError = 1, kSolverError = 2, kPreconditionFailure = 3 };

// ggctl <scenario> --config <file> [--out <dir>] [--seed <n>] [--force]
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);

struct PlotSpec {
    std::string csv;
    std::string x;
    std::vector<std::string> ys;
    std::string svg;
    std::string title;
};

// Renders each CSV as an SVG line plot. The raw CSV cells of the plotted
// columns are embedded in the SVG metadata. Returns the files written.
std::vector<std::string> emit_plots(const std::vector<PlotSpec>& plots, std::ostream& warn);

// Raw cells of one plotted series, read back from an emitted SVG.
std::vector<std::string> read_plot_series(const std::string& svg_path, const std::string& column);

}  // namespace gg::cli
