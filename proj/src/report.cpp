#include "driftloc/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "driftloc/errors.hpp"

namespace driftloc {

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw SchemaError("cannot write '" + path + "'");
  return out;
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

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kMarginLeft = 60.0;
constexpr double kMarginRight = 20.0;
constexpr double kMarginTop = 40.0;
constexpr double kMarginBottom = 50.0;

struct Scale {
  double lo = 0.0, hi = 1.0, pix_lo = 0.0, pix_hi = 1.0;
  double operator()(double v) const {
    const double t = (hi == lo) ? 0.5 : (v - lo) / (hi - lo);
    return pix_lo + t * (pix_hi - pix_lo);
  }
};

void svg_header(std::ostream& out, const std::string& title) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight
      << "\">\n"
      << "<rect width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" fill=\"white\"/>\n"
      << "<text x=\"" << kWidth / 2
      << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"15\">"
      << xml_escape(title) << "</text>\n";
}

void svg_axes(std::ostream& out, const Scale& sy, const std::string& x_label) {
  const double x0 = kMarginLeft, x1 = kWidth - kMarginRight;
  const double y0 = kHeight - kMarginBottom, y1 = kMarginTop;
  out << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x1 << "\" y2=\""
      << y0 << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0 << "\" y2=\"" << y1
      << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double v = sy.lo + (sy.hi - sy.lo) * k / 4.0;
    const double y = sy(v);
    out << "<line x1=\"" << x0 - 4 << "\" y1=\"" << y << "\" x2=\"" << x0 << "\" y2=\""
        << y << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << x0 - 8 << "\" y=\"" << y + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << format_number(std::round(v * 1000.0) / 1000.0) << "</text>\n";
  }
  out << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << kHeight - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
      << xml_escape(x_label) << "</text>\n"
      << "<text x=\"16\" y=\"" << (y0 + y1) / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
         "transform=\"rotate(-90 16 "
      << (y0 + y1) / 2 << ")\">ROC-AUC</text>\n";
}

}  // namespace

void emit_results(const ResultTable& table, const std::string& path, EmitFormat format) {
  if (table.reps.empty()) throw std::invalid_argument("emit_results: empty table");
  if (format == EmitFormat::csv) {
    auto out = open_out(path);
    out << "rep,auc,n_evaluated,n_excluded\n";
    for (std::size_t r = 0; r < table.reps.size(); ++r) {
      const auto& rep = table.reps[r];
      out << r << ',' << format_number(rep.auc) << ',' << rep.n_evaluated << ','
          << rep.n_excluded << "\n";
    }
    out << "mean," << format_number(table.mean) << ",,\n";
    out << "median," << format_number(table.median) << ",,\n";
    out << "q25," << format_number(table.q25) << ",,\n";
    out << "q75," << format_number(table.q75) << ",,\n";
    return;
  }
  write_box_plot_svg(path, {"result"}, {table}, "ROC-AUC distribution");
}

void write_curve_csv(const std::string& path, const std::vector<SweepPoint>& curve) {
  auto out = open_out(path);
  out << "grid_value,median_auc,q25,q75\n";
  for (const auto& p : curve) {
    out << format_number(p.grid_value) << ',' << format_number(p.median_auc) << ','
        << format_number(p.q25) << ',' << format_number(p.q75) << "\n";
  }
}

void write_curve_svg(const std::string& path, const std::vector<SweepPoint>& curve,
                     const std::string& title, const std::string& x_label) {
  if (curve.empty()) throw std::invalid_argument("write_curve_svg: empty curve");
  auto out = open_out(path);

  double x_lo = curve.front().grid_value, x_hi = curve.front().grid_value;
  double y_lo = 1.0, y_hi = 0.0;
  for (const auto& p : curve) {
    x_lo = std::min(x_lo, p.grid_value);
    x_hi = std::max(x_hi, p.grid_value);
    y_lo = std::min({y_lo, p.q25, p.median_auc});
    y_hi = std::max({y_hi, p.q75, p.median_auc});
  }
  const double pad = std::max(0.02, (y_hi - y_lo) * 0.1);
  const Scale sx{x_lo, x_hi, kMarginLeft, kWidth - kMarginRight};
  const Scale sy{std::max(0.0, y_lo - pad), std::min(1.0, y_hi + pad),
                 kHeight - kMarginBottom, kMarginTop};

  svg_header(out, title);
  svg_axes(out, sy, x_label);

  out << "<polygon fill=\"#9ecae1\" fill-opacity=\"0.5\" stroke=\"none\" points=\"";
  for (const auto& p : curve) out << sx(p.grid_value) << ',' << sy(p.q25) << ' ';
  for (auto it = curve.rbegin(); it != curve.rend(); ++it)
    out << sx(it->grid_value) << ',' << sy(it->q75) << ' ';
  out << "\"/>\n";

  out << "<polyline fill=\"none\" stroke=\"#08519c\" stroke-width=\"2\" points=\"";
  for (const auto& p : curve) out << sx(p.grid_value) << ',' << sy(p.median_auc) << ' ';
  out << "\"/>\n";

  for (const auto& p : curve) {
    out << "<circle cx=\"" << sx(p.grid_value) << "\" cy=\"" << sy(p.median_auc)
        << "\" r=\"3\" fill=\"#08519c\"/>\n"
        << "<text x=\"" << sx(p.grid_value) << "\" y=\"" << kHeight - kMarginBottom + 16
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << format_number(p.grid_value) << "</text>\n";
  }
  out << "</svg>\n";
}

void write_box_plot_svg(const std::string& path, const std::vector<std::string>& labels,
                        const std::vector<ResultTable>& tables,
                        const std::string& title) {
  if (tables.empty() || labels.size() != tables.size())
    throw std::invalid_argument("write_box_plot_svg: labels/tables mismatch");
  auto out = open_out(path);

  double y_lo = 1.0, y_hi = 0.0;
  std::vector<double> mins, maxs;
  for (const auto& table : tables) {
    double lo = table.reps.front().auc, hi = lo;
    for (const auto& rep : table.reps) {
      lo = std::min(lo, rep.auc);
      hi = std::max(hi, rep.auc);
    }
    mins.push_back(lo);
    maxs.push_back(hi);
    y_lo = std::min(y_lo, lo);
    y_hi = std::max(y_hi, hi);
  }
  const double pad = std::max(0.02, (y_hi - y_lo) * 0.1);
  const Scale sy{std::max(0.0, y_lo - pad), std::min(1.0, y_hi + pad),
                 kHeight - kMarginBottom, kMarginTop};

  svg_header(out, title);
  svg_axes(out, sy, "method");

  const double span = kWidth - kMarginLeft - kMarginRight;
  const double slot = span / static_cast<double>(tables.size());
  const double box_w = std::min(60.0, slot * 0.5);
  for (std::size_t m = 0; m < tables.size(); ++m) {
    const double cx = kMarginLeft + slot * (static_cast<double>(m) + 0.5);
    const auto& t = tables[m];
    const double top = sy(t.q75), bottom = sy(t.q25), mid = sy(t.median);
    out << "<line x1=\"" << cx << "\" y1=\"" << sy(mins[m]) << "\" x2=\"" << cx
        << "\" y2=\"" << sy(maxs[m]) << "\" stroke=\"black\"/>\n"
        << "<rect x=\"" << cx - box_w / 2 << "\" y=\"" << top << "\" width=\"" << box_w
        << "\" height=\"" << bottom - top
        << "\" fill=\"#9ecae1\" stroke=\"#08519c\"/>\n"
        << "<line x1=\"" << cx - box_w / 2 << "\" y1=\"" << mid << "\" x2=\""
        << cx + box_w / 2 << "\" y2=\"" << mid
        << "\" stroke=\"#08519c\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << cx << "\" y=\"" << kHeight - kMarginBottom + 16
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << xml_escape(labels[m]) << "</text>\n";
  }
  out << "</svg>\n";
}

void write_bench_summary_csv(const std::string& path,
                             const std::vector<std::string>& labels,
                             const std::vector<ResultTable>& tables) {
  if (labels.size() != tables.size())
    throw std::invalid_argument("write_bench_summary_csv: labels/tables mismatch");
  auto out = open_out(path);
  out << "method,mean,median,q25,q75,n_reps\n";
  for (std::size_t m = 0; m < tables.size(); ++m) {
    const auto& t = tables[m];
    out << labels[m] << ',' << format_number(t.mean) << ',' << format_number(t.median)
        << ',' << format_number(t.q25) << ',' << format_number(t.q75) << ','
        << t.reps.size() << "\n";
  }
}

}  // namespace driftloc
