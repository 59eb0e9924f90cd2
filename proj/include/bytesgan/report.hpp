#pragma once

#include <string>
#include <vector>

#include "bytesgan/training.hpp"

namespace bytesgan {

/// Minimal CSV table: a header row and string cells.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::string str() const;
};

/// Fixed-precision decimal used in every emitted table.
std::string format_number(double v, int digits = 6);

struct PlotSeries {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

/// Static line chart as a self-contained SVG document.
std::string line_plot_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                          const std::vector<PlotSeries>& series);

/// Per-step losses of a run: step, loss, branch losses, generator loss.
std::string loss_curve_csv(const TrainLog& log);

/// Discriminator and generator loss against step.
std::string loss_curve_svg(const TrainLog& log, const std::string& title);

} // namespace bytesgan
