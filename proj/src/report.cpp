#include "bytesgan/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace bytesgan {

namespace {

std::string csv_cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string opt_cell(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

} // namespace

std::string CsvTable::str() const {
    std::ostringstream os;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) os << ',';
            os << csv_cell(cells[i]);
        }
        os << '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return os.str();
}

std::string format_number(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string line_plot_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                          const std::vector<PlotSeries>& series) {
    const double width = 720, height = 420, left = 70, right = 150, top = 40, bottom = 50;
    const double pw = width - left - right, ph = height - top - bottom;

    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, s.y[i]);
            y1 = std::max(y1, s.y[i]);
        }
    }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) y1 = y0 + 1;
    auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
    auto py = [&](double y) { return top + ph - (y - y0) / (y1 - y0) * ph; };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << xml_escape(title)
       << "</text>\n";
    os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"#333\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double fx = x0 + (x1 - x0) * t / 4.0, fy = y0 + (y1 - y0) * t / 4.0;
        os << "<text x=\"" << px(fx) << "\" y=\"" << top + ph + 16 << "\" text-anchor=\"middle\">"
           << format_number(fx, 0) << "</text>\n";
        os << "<text x=\"" << left - 6 << "\" y=\"" << py(fy) + 4 << "\" text-anchor=\"end\">"
           << format_number(fy, 3) << "</text>\n";
        os << "<line x1=\"" << left << "\" x2=\"" << left + pw << "\" y1=\"" << py(fy) << "\" y2=\"" << py(fy)
           << "\" stroke=\"#ddd\"/>\n";
    }
    os << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 12 << "\" text-anchor=\"middle\">"
       << xml_escape(x_label) << "</text>\n";
    os << "<text transform=\"translate(16," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
       << xml_escape(y_label) << "</text>\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* color = kPalette[k % std::size(kPalette)];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\"";
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.y[i])) continue;
            os << format_number(px(s.x[i]), 2) << ',' << format_number(py(s.y[i]), 2) << ' ';
        }
        os << "\"/>\n";
        const double ly = top + 14 + 18.0 * k;
        os << "<line x1=\"" << left + pw + 10 << "\" x2=\"" << left + pw + 30 << "\" y1=\"" << ly << "\" y2=\"" << ly
           << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << left + pw + 35 << "\" y=\"" << ly + 4 << "\">" << xml_escape(s.name) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

std::string loss_curve_csv(const TrainLog& log) {
    CsvTable t;
    t.header = {"step", "epoch", "loss", "labeled_loss", "unlabeled_real", "unlabeled_fake", "gen_loss"};
    for (const auto& s : log.steps) {
        t.rows.push_back({std::to_string(s.step), std::to_string(s.epoch), format_number(s.loss),
                          opt_cell(s.labeled_loss), opt_cell(s.unlabeled_real), opt_cell(s.unlabeled_fake),
                          opt_cell(s.gen_loss)});
    }
    return t.str();
}

std::string loss_curve_svg(const TrainLog& log, const std::string& title) {
    PlotSeries d{"discriminator", {}, {}}, g{"generator", {}, {}};
    for (const auto& s : log.steps) {
        d.x.push_back(static_cast<double>(s.step));
        d.y.push_back(s.loss);
        if (s.gen_loss) {
            g.x.push_back(static_cast<double>(s.step));
            g.y.push_back(*s.gen_loss);
        }
    }
    if (g.x.empty()) return line_plot_svg(title, "step", "loss", {d});
    // One panel per network.
    std::string top = line_plot_svg(title + " (discriminator)", "step", "loss", {d});
    std::string bottom = line_plot_svg(title + " (generator)", "step", "feature matching loss", {g});
    bottom.insert(bottom.find("<svg ") + 5, "y=\"420\" ");
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"840\">\n" + top + bottom + "</svg>\n";
}

} // namespace bytesgan
