#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "rllf/experiment.hpp"

namespace rllf {

struct PlotPoint {
    std::string strategy;
    double feedback = 0.0;
    double mean = 0.0;
    double standard_error = 0.0;
    std::size_t rows = 0;
};

// One point per (strategy, feedback) of `domain`. A single row keeps its CSV
// stderr; several rows (seeds) get the stderr of their returns.
std::vector<PlotPoint> aggregate_for_plot(const std::vector<ResultRow>& rows, const std::string& domain);

// Return vs percentage feedback with stderr bars. Every marker carries a
// <title> of the form "strategy=S feedback=F return=R stderr=E".
std::string render_return_svg(const std::string& domain, const std::vector<PlotPoint>& points);
// Strategies x feedback levels, colored by mean optimality gap (mean return
// when no gaps are available).
std::string render_heatmap_svg(const std::string& domain, const std::vector<ResultRow>& rows);
std::string render_empty_svg();

// Writes <domain>_return.svg and <domain>_heatmap.svg per domain, or
// empty.svg when there are no rows. Returns the written paths.
std::vector<std::string> write_plots(const std::vector<ResultRow>& rows, const std::string& out_dir);

}  // namespace rllf
