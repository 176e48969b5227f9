#ifndef DRIFTLOC_REPORT_HPP
#define DRIFTLOC_REPORT_HPP

#include <string>
#include <vector>

#include "driftloc/eval.hpp"

namespace driftloc {

enum class EmitFormat { csv, svg };

/// Writes a result table as CSV (`rep, auc, n_evaluated, n_excluded` rows
/// followed by summary rows keyed mean/median/q25/q75) or as a box-plot SVG.
/// Number formatting is shortest-round-trip, so re-parsing is exact.
void emit_results(const ResultTable& table, const std::string& path, EmitFormat format);

/// Sweep curve CSV: `grid_value, median_auc, q25, q75`, one row per point.
void write_curve_csv(const std::string& path, const std::vector<SweepPoint>& curve);

/// Static SVG line chart of the sweep: median polyline over a q25-q75 band.
void write_curve_svg(const std::string& path, const std::vector<SweepPoint>& curve,
                     const std::string& title, const std::string& x_label);

/// Static SVG box plot comparing methods (quartile box, median line, whiskers
/// to min/max).
void write_box_plot_svg(const std::string& path, const std::vector<std::string>& labels,
                        const std::vector<ResultTable>& tables, const std::string& title);

/// Combined bench summary: `method, mean, median, q25, q75, n_reps`.
void write_bench_summary_csv(const std::string& path,
                             const std::vector<std::string>& labels,
                             const std::vector<ResultTable>& tables);

/// Shortest-round-trip decimal formatting used in every CSV this tool writes.
std::string format_number(double v);

}  // namespace driftloc

#endif
