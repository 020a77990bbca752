#include "morley/run_io.hpp"

#include "morley/number_format.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

namespace morley {

namespace {

std::string optional_cell(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

void write_row(std::ostream& out, const IterationRecord& r)
{
    out << r.iteration << ',' << r.dofs << ',' << format_number(r.eta_h);
    for (double e : r.eta) {
        out << ',' << format_number(e);
    }
    out << ',' << optional_cell(r.energy_error) << ',' << optional_cell(r.l2_error) << ','
        << optional_cell(r.efficiency_index) << ',' << format_number(r.mu) << ',' << format_number(r.lambda_summary)
        << ',' << optional_cell(r.wall_ms) << '\n';
}

nlohmann::json optional_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

std::optional<double> optional_from(const nlohmann::json& j, const char* key)
{
    if (!j.contains(key) || j.at(key).is_null()) {
        return std::nullopt;
    }
    return j.at(key).get<double>();
}

std::string escape_xml(const std::string& s)
{
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

std::string fixed(double v, int digits = 2)
{
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(digits);
    s << v;
    return s.str();
}

}  // namespace

void write_convergence_csv(std::ostream& out, const std::vector<IterationRecord>& records)
{
    out << convergence_header << '\n';
    for (const auto& r : records) {
        write_row(out, r);
    }
}

nlohmann::json to_json(const RunConfig& c)
{
    return {
        {"problem", c.problem},
        {"seed", c.seed},
        {"theta", c.adapt.theta},
        {"max_dofs", c.adapt.max_dofs},
        {"max_iterations", c.adapt.max_iterations},
        {"uniform", c.adapt.uniform},
        {"initial_subdivisions", c.adapt.initial_subdivisions},
        {"timing", c.adapt.timing},
        {"linear_tolerance", c.solver.linear_tolerance},
        {"pdas_max_iterations", c.solver.pdas_max_iterations},
        {"pdas_c", c.solver.pdas_c},
        {"complementarity_tolerance", c.solver.complementarity_tolerance},
        {"schur_row_limit", c.solver.schur_row_limit},
    };
}

nlohmann::json to_json(const IterationRecord& r)
{
    return {
        {"iter", r.iteration},
        {"dofs", r.dofs},
        {"elements", r.elements},
        {"eta_h", r.eta_h},
        {"eta", r.eta},
        {"oscillation", r.oscillation},
        {"energy_error", optional_json(r.energy_error)},
        {"l2_error", optional_json(r.l2_error)},
        {"h2_error", optional_json(r.h2_error)},
        {"eff_index", optional_json(r.efficiency_index)},
        {"mu_h", r.mu},
        {"lambda_summary", r.lambda_summary},
        {"active_state", r.active_state},
        {"active_control", r.active_control},
        {"lower_active", r.lower_active},
        {"upper_active", r.upper_active},
        {"solver_iterations", r.solver_iterations},
        {"kkt",
         {{"stationarity", r.kkt.stationarity},
          {"feasibility", r.kkt.feasibility},
          {"complementarity", r.kkt.complementarity},
          {"sign_violation", r.kkt.sign_violation}}},
        {"wall_ms", optional_json(r.wall_ms)},
    };
}

nlohmann::json run_to_json(const RunConfig& config, const std::vector<IterationRecord>& records)
{
    nlohmann::json j;
    j["format"] = "morley-ocp-run";
    j["version"] = 1;
    j["config"] = to_json(config);
    j["records"] = nlohmann::json::array();
    for (const auto& r : records) {
        j["records"].push_back(to_json(r));
    }
    return j;
}

std::vector<IterationRecord> records_from_json(const nlohmann::json& run)
{
    try {
        if (run.at("format").get<std::string>() != "morley-ocp-run" || run.at("version").get<int>() != 1) {
            throw RunFormatError("not a version-1 run file");
        }
        std::vector<IterationRecord> out;
        for (const auto& j : run.at("records")) {
            IterationRecord r;
            r.iteration = j.at("iter").get<int>();
            r.dofs = j.at("dofs").get<Index>();
            r.elements = j.at("elements").get<Index>();
            r.eta_h = j.at("eta_h").get<double>();
            r.eta = j.at("eta").get<std::array<double, 5>>();
            r.oscillation = j.at("oscillation").get<double>();
            r.energy_error = optional_from(j, "energy_error");
            r.l2_error = optional_from(j, "l2_error");
            r.h2_error = optional_from(j, "h2_error");
            r.efficiency_index = optional_from(j, "eff_index");
            r.mu = j.at("mu_h").get<double>();
            r.lambda_summary = j.at("lambda_summary").get<double>();
            r.active_state = j.at("active_state").get<bool>();
            r.active_control = j.at("active_control").get<bool>();
            r.lower_active = j.at("lower_active").get<Index>();
            r.upper_active = j.at("upper_active").get<Index>();
            r.solver_iterations = j.at("solver_iterations").get<int>();
            const auto& k = j.at("kkt");
            r.kkt.stationarity = k.at("stationarity").get<double>();
            r.kkt.feasibility = k.at("feasibility").get<double>();
            r.kkt.complementarity = k.at("complementarity").get<double>();
            r.kkt.sign_violation = k.at("sign_violation").get<double>();
            r.wall_ms = optional_from(j, "wall_ms");
            out.push_back(r);
        }
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw RunFormatError(std::string("schema mismatch: ") + e.what());
    }
}

std::vector<PlotSeries> convergence_series(const std::vector<IterationRecord>& records, const std::string& prefix)
{
    PlotSeries eta{prefix + "eta_h", {}, {}};
    PlotSeries err{prefix + "energy error", {}, {}};
    for (const auto& r : records) {
        eta.x.push_back(static_cast<double>(r.dofs));
        eta.y.push_back(r.eta_h);
        if (r.energy_error) {
            err.x.push_back(static_cast<double>(r.dofs));
            err.y.push_back(*r.energy_error);
        }
    }
    std::vector<PlotSeries> out{eta};
    if (!err.x.empty()) {
        out.push_back(err);
    }
    return out;
}

std::vector<PlotSeries> efficiency_series(const std::vector<IterationRecord>& records, const std::string& prefix)
{
    PlotSeries s{prefix + "efficiency index", {}, {}};
    for (const auto& r : records) {
        if (r.efficiency_index) {
            s.x.push_back(static_cast<double>(r.dofs));
            s.y.push_back(*r.efficiency_index);
        }
    }
    if (s.x.empty()) {
        return {};
    }
    return {s};
}

void write_svg_plot(std::ostream& out, const std::string& title, const std::string& x_label,
                    const std::string& y_label, const std::vector<PlotSeries>& series, bool log_y)
{
    constexpr double width = 640.0;
    constexpr double height = 440.0;
    constexpr double left = 80.0;
    constexpr double right = 170.0;
    constexpr double top = 40.0;
    constexpr double bottom = 60.0;
    static const char* colours[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

    auto tx = [](double v) { return std::log10(v); };
    auto ty = [log_y](double v) { return log_y ? std::log10(v) : v; };

    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (s.x[i] > 0.0 && (!log_y || s.y[i] > 0.0)) {
                x0 = std::min(x0, tx(s.x[i]));
                x1 = std::max(x1, tx(s.x[i]));
                y0 = std::min(y0, ty(s.y[i]));
                y1 = std::max(y1, ty(s.y[i]));
            }
        }
    }
    if (!std::isfinite(x0)) {
        x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
    }
    if (log_y) {
        x0 = std::floor(x0), x1 = std::max(std::ceil(x1), x0 + 1.0);
        y0 = std::floor(y0), y1 = std::max(std::ceil(y1), y0 + 1.0);
    } else {
        x0 = std::floor(x0), x1 = std::max(std::ceil(x1), x0 + 1.0);
        const double pad = 0.1 * std::max(y1 - y0, 1e-3);
        y0 = std::min(0.0, y0 - pad), y1 += pad;
    }
    const double pw = width - left - right;
    const double ph = height - top - bottom;
    auto px = [&](double v) { return left + (tx(v) - x0) / (x1 - x0) * pw; };
    auto py = [&](double v) { return top + (y1 - ty(v)) / (y1 - y0) * ph; };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << left + pw / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
        << escape_xml(title) << "</text>\n";
    out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"black\"/>\n";

    for (int k = static_cast<int>(x0); k <= static_cast<int>(x1); ++k) {
        const double x = left + (k - x0) / (x1 - x0) * pw;
        out << "<line x1=\"" << fixed(x) << "\" y1=\"" << top << "\" x2=\"" << fixed(x) << "\" y2=\"" << top + ph
            << "\" stroke=\"#ddd\"/>\n";
        out << "<text x=\"" << fixed(x) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">1e" << k
            << "</text>\n";
    }
    const int y_ticks = log_y ? static_cast<int>(y1 - y0) : 5;
    for (int k = 0; k <= y_ticks; ++k) {
        const double v = y0 + (y1 - y0) * k / y_ticks;
        const double y = top + ph - ph * k / y_ticks;
        out << "<line x1=\"" << left << "\" y1=\"" << fixed(y) << "\" x2=\"" << left + pw << "\" y2=\"" << fixed(y)
            << "\" stroke=\"#ddd\"/>\n";
        out << "<text x=\"" << left - 6 << "\" y=\"" << fixed(y + 4) << "\" text-anchor=\"end\">"
            << (log_y ? "1e" + std::to_string(static_cast<int>(std::lround(v))) : fixed(v)) << "</text>\n";
    }
    out << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 16 << "\" text-anchor=\"middle\">"
        << escape_xml(x_label) << "</text>\n";
    out << "<text transform=\"translate(20," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
        << escape_xml(y_label) << "</text>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* colour = colours[s % std::size(colours)];
        out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < series[s].x.size(); ++i) {
            if (series[s].x[i] > 0.0 && (!log_y || series[s].y[i] > 0.0)) {
                out << fixed(px(series[s].x[i])) << ',' << fixed(py(series[s].y[i])) << ' ';
            }
        }
        out << "\"/>\n";
        const double ly = top + 14 + 18.0 * static_cast<double>(s);
        out << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 32 << "\" y2=\""
            << ly << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << left + pw + 38 << "\" y=\"" << ly + 4 << "\">" << escape_xml(series[s].label)
            << "</text>\n";
    }
    out << "</svg>\n";
}

void write_comparison_csv(std::ostream& out, const std::vector<LabelledRun>& runs)
{
    out << "run," << convergence_header << '\n';
    for (const auto& run : runs) {
        for (const auto& r : run.records) {
            out << run.label << ',';
            write_row(out, r);
        }
    }
}

}  // namespace morley
