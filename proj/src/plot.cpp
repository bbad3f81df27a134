#include "rllf/plot.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "rllf/evaluator.hpp"
#include "rllf/text.hpp"

namespace rllf {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 170, kTop = 40, kBottom = 60;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string num(double x) { return text::format_fixed(x, 2); }

std::string escape(const std::string& s) {
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

struct Frame {
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
    double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

void open_svg(std::ostringstream& out, const std::string& title) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(title)
        << "</text>\n";
}

void draw_axes(std::ostringstream& out, const Frame& f, const std::string& xlabel, const std::string& ylabel) {
    const double bx = f.px(f.x0), by = f.py(f.y0), tx = f.px(f.x1), ty = f.py(f.y1);
    out << "<g class=\"axes\" stroke=\"black\" fill=\"none\">\n";
    out << "<line x1=\"" << num(bx) << "\" y1=\"" << num(by) << "\" x2=\"" << num(tx) << "\" y2=\"" << num(by) << "\"/>\n";
    out << "<line x1=\"" << num(bx) << "\" y1=\"" << num(by) << "\" x2=\"" << num(bx) << "\" y2=\"" << num(ty) << "\"/>\n";
    out << "</g>\n";
    for (int i = 0; i <= 5; ++i) {
        const double x = f.x0 + (f.x1 - f.x0) * i / 5.0, y = f.y0 + (f.y1 - f.y0) * i / 5.0;
        out << "<text x=\"" << num(f.px(x)) << "\" y=\"" << num(by + 18) << "\" text-anchor=\"middle\" font-size=\"11\">"
            << text::format_fixed(x, 1) << "</text>\n";
        out << "<text x=\"" << num(bx - 6) << "\" y=\"" << num(f.py(y) + 4) << "\" text-anchor=\"end\" font-size=\"11\">"
            << text::format_fixed(y, 2) << "</text>\n";
    }
    out << "<text x=\"" << num((bx + tx) / 2) << "\" y=\"" << num(kHeight - 15)
        << "\" text-anchor=\"middle\" font-size=\"12\">" << escape(xlabel) << "</text>\n";
    out << "<text x=\"16\" y=\"" << num((by + ty) / 2) << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
        << num((by + ty) / 2) << ")\">" << escape(ylabel) << "</text>\n";
}

std::string feedback_key(double f) { return text::format_fixed(f, 6); }

}  // namespace

std::vector<PlotPoint> aggregate_for_plot(const std::vector<ResultRow>& rows, const std::string& domain) {
    std::map<std::pair<std::string, std::string>, std::vector<const ResultRow*>> groups;
    for (const auto& r : rows)
        if (r.domain == domain) groups[{r.strategy, feedback_key(r.percentage_feedback)}].push_back(&r);
    std::vector<PlotPoint> out;
    for (const auto& [key, members] : groups) {
        PlotPoint p;
        p.strategy = key.first;
        p.feedback = members.front()->percentage_feedback;
        p.rows = members.size();
        if (members.size() == 1) {
            p.mean = members.front()->ret;
            p.standard_error = members.front()->standard_error.value_or(0.0);
        } else {
            std::vector<double> xs;
            for (const auto* m : members) xs.push_back(m->ret);
            std::tie(p.mean, p.standard_error) = mean_and_stderr(xs);
        }
        out.push_back(p);
    }
    std::sort(out.begin(), out.end(), [](const PlotPoint& a, const PlotPoint& b) {
        return std::tie(a.strategy, a.feedback) < std::tie(b.strategy, b.feedback);
    });
    return out;
}

std::string render_return_svg(const std::string& domain, const std::vector<PlotPoint>& points) {
    Frame f;
    if (!points.empty()) {
        double lo = points.front().mean, hi = lo;
        for (const auto& p : points) {
            lo = std::min(lo, p.mean - p.standard_error);
            hi = std::max(hi, p.mean + p.standard_error);
        }
        const double pad = hi > lo ? 0.05 * (hi - lo) : std::max(1.0, std::abs(hi) * 0.1);
        f.y0 = lo - pad;
        f.y1 = hi + pad;
    }
    std::ostringstream out;
    open_svg(out, domain + ": return vs percentage feedback");
    draw_axes(out, f, "percentage feedback", "return");

    std::vector<std::string> strategies;
    for (const auto& p : points)
        if (std::find(strategies.begin(), strategies.end(), p.strategy) == strategies.end())
            strategies.push_back(p.strategy);
    for (std::size_t k = 0; k < strategies.size(); ++k) {
        const std::string color = kPalette[k % std::size(kPalette)];
        out << "<g class=\"series\" data-strategy=\"" << escape(strategies[k]) << "\">\n";
        std::string poly;
        for (const auto& p : points)
            if (p.strategy == strategies[k]) poly += num(f.px(p.feedback)) + "," + num(f.py(p.mean)) + " ";
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" points=\"" << poly << "\"/>\n";
        for (const auto& p : points) {
            if (p.strategy != strategies[k]) continue;
            const double x = f.px(p.feedback);
            out << "<line class=\"errbar\" stroke=\"" << color << "\" x1=\"" << num(x) << "\" y1=\""
                << num(f.py(p.mean - p.standard_error)) << "\" x2=\"" << num(x) << "\" y2=\""
                << num(f.py(p.mean + p.standard_error)) << "\"/>\n";
            out << "<circle class=\"point\" cx=\"" << num(x) << "\" cy=\"" << num(f.py(p.mean)) << "\" r=\"3.5\" fill=\""
                << color << "\"><title>strategy=" << escape(p.strategy) << " feedback=" << feedback_key(p.feedback)
                << " return=" << text::format_double(p.mean) << " stderr=" << text::format_double(p.standard_error)
                << "</title></circle>\n";
        }
        const double ly = kTop + 18.0 * k + 10;
        out << "<rect x=\"" << num(kWidth - kRight + 15) << "\" y=\"" << num(ly - 8) << "\" width=\"10\" height=\"10\" fill=\""
            << color << "\"/>\n";
        out << "<text x=\"" << num(kWidth - kRight + 30) << "\" y=\"" << num(ly + 1) << "\" font-size=\"11\">"
            << escape(strategies[k]) << "</text>\n";
        out << "</g>\n";
    }
    out << "</svg>\n";
    return out.str();
}

std::string render_heatmap_svg(const std::string& domain, const std::vector<ResultRow>& rows) {
    std::set<std::string> strategies_set, levels_set;
    bool all_gaps = true;
    for (const auto& r : rows) {
        if (r.domain != domain) continue;
        strategies_set.insert(r.strategy);
        levels_set.insert(feedback_key(r.percentage_feedback));
        if (!r.optimality_gap) all_gaps = false;
    }
    const std::vector<std::string> strategies(strategies_set.begin(), strategies_set.end());
    const std::vector<std::string> levels(levels_set.begin(), levels_set.end());
    std::map<std::pair<std::string, std::string>, std::vector<double>> cells;
    for (const auto& r : rows)
        if (r.domain == domain)
            cells[{r.strategy, feedback_key(r.percentage_feedback)}].push_back(all_gaps ? *r.optimality_gap : r.ret);

    const std::string metric = all_gaps ? "gap" : "return";
    std::ostringstream out;
    open_svg(out, domain + ": mean " + (all_gaps ? std::string("optimality gap") : std::string("return")));
    if (strategies.empty()) {
        out << "</svg>\n";
        return out.str();
    }
    double lo = 0, hi = 0;
    bool first = true;
    std::map<std::pair<std::string, std::string>, double> means;
    for (const auto& [key, xs] : cells) {
        const double m = mean_and_stderr(xs).first;
        means[key] = m;
        lo = first ? m : std::min(lo, m);
        hi = first ? m : std::max(hi, m);
        first = false;
    }
    const double cw = (kWidth - kLeft - 40) / static_cast<double>(levels.size());
    const double ch = (kHeight - kTop - kBottom) / static_cast<double>(strategies.size());
    for (std::size_t i = 0; i < strategies.size(); ++i) {
        const double y = kTop + ch * i;
        out << "<text x=\"" << num(kLeft + 40 - 6) << "\" y=\"" << num(y + ch / 2 + 4)
            << "\" text-anchor=\"end\" font-size=\"11\">" << escape(strategies[i]) << "</text>\n";
        for (std::size_t j = 0; j < levels.size(); ++j) {
            const double x = kLeft + 40 + cw * j;
            const auto it = means.find({strategies[i], levels[j]});
            if (it == means.end()) continue;
            // Darker is worse: high gap, or low return.
            double t = hi > lo ? (it->second - lo) / (hi - lo) : 0.0;
            if (!all_gaps) t = 1.0 - t;
            const int shade = static_cast<int>(std::lround(255 - 200 * t));
            out << "<rect class=\"cell\" x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(cw - 1)
                << "\" height=\"" << num(ch - 1) << "\" fill=\"rgb(255," << shade << ',' << shade << ")\"><title>strategy="
                << escape(strategies[i]) << " feedback=" << levels[j] << ' ' << metric << '='
                << text::format_double(it->second) << "</title></rect>\n";
            out << "<text x=\"" << num(x + cw / 2) << "\" y=\"" << num(y + ch / 2 + 4)
                << "\" text-anchor=\"middle\" font-size=\"10\">" << text::format_fixed(it->second, 2) << "</text>\n";
        }
    }
    for (std::size_t j = 0; j < levels.size(); ++j)
        out << "<text x=\"" << num(kLeft + 40 + cw * j + cw / 2) << "\" y=\"" << num(kHeight - kBottom + 18)
            << "\" text-anchor=\"middle\" font-size=\"11\">" << levels[j].substr(0, 4) << "</text>\n";
    out << "<text x=\"" << num(kLeft + 40 + cw * levels.size() / 2) << "\" y=\"" << num(kHeight - 15)
        << "\" text-anchor=\"middle\" font-size=\"12\">percentage feedback</text>\n";
    out << "</svg>\n";
    return out.str();
}

std::string render_empty_svg() {
    std::ostringstream out;
    open_svg(out, "no results");
    draw_axes(out, Frame{}, "percentage feedback", "return");
    out << "</svg>\n";
    return out.str();
}

std::vector<std::string> write_plots(const std::vector<ResultRow>& rows, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    auto emit = [&](const std::string& name, const std::string& svg) {
        const std::string path = (fs::path(out_dir) / name).string();
        std::ofstream out(path, std::ios::trunc);
        out << svg;
        if (!out) throw std::runtime_error("cannot write " + path);
        return path;
    };
    std::vector<std::string> written;
    if (rows.empty()) {
        written.push_back(emit("empty.svg", render_empty_svg()));
        return written;
    }
    std::set<std::string> domains;
    for (const auto& r : rows) domains.insert(r.domain);
    for (const auto& d : domains) {
        written.push_back(emit(d + "_return.svg", render_return_svg(d, aggregate_for_plot(rows, d))));
        written.push_back(emit(d + "_heatmap.svg", render_heatmap_svg(d, rows)));
    }
    return written;
}

}  // namespace rllf
