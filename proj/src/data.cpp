#include "driftloc/data.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "driftloc/errors.hpp"
#include "driftloc/random.hpp"

namespace driftloc {

std::pair<LabeledDataset, DriftGroundTruth> generate_class_swap_stream(
    const ClassSwapSpec& spec) {
  if (spec.n_classes < 3)
    throw std::invalid_argument("class swap: need n_classes >= 3");
  if (spec.n_drifting_per_window < 0 ||
      spec.n_drifting_per_window > spec.samples_per_window)
    throw std::invalid_argument("class swap: n_drifting_per_window out of range");
  if (spec.samples_per_window < 1 || spec.dimension < 1)
    throw std::invalid_argument("class swap: invalid sizes");
  if (!(spec.sigma > 0.0) || !(spec.center_high > spec.center_low))
    throw std::invalid_argument("class swap: invalid geometry");

  Rng rng(spec.seed);
  Eigen::MatrixXd centers(spec.n_classes, spec.dimension);
  for (int c = 0; c < spec.n_classes; ++c)
    for (int j = 0; j < spec.dimension; ++j)
      centers(c, j) = rng.uniform(spec.center_low, spec.center_high);

  // Draw the three roles without replacement: non-drifting, drift-before,
  // drift-after.
  std::vector<int> classes(static_cast<std::size_t>(spec.n_classes));
  std::iota(classes.begin(), classes.end(), 0);
  for (int k = 0; k < 3; ++k) {
    const auto j =
        k + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(spec.n_classes - k)));
    std::swap(classes[static_cast<std::size_t>(k)], classes[static_cast<std::size_t>(j)]);
  }
  const int stable_class = classes[0];
  const int before_class = classes[1];
  const int after_class = classes[2];

  const int per_window = spec.samples_per_window;
  const int n_drift = spec.n_drifting_per_window;
  const int n = 2 * per_window;
  Eigen::MatrixXd features(n, spec.dimension);
  std::vector<bool> drifting(static_cast<std::size_t>(n), false);

  const auto draw = [&](int row, int cls) {
    for (int j = 0; j < spec.dimension; ++j)
      features(row, j) = centers(cls, j) + spec.sigma * rng.normal();
  };

  int row = 0;
  for (int w = 0; w < 2; ++w) {
    const int drift_class = (w == 0) ? before_class : after_class;
    for (int i = 0; i < per_window - n_drift; ++i) draw(row++, stable_class);
    for (int i = 0; i < n_drift; ++i) {
      drifting[static_cast<std::size_t>(row)] = true;
      draw(row++, drift_class);
    }
  }

  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  std::fill(labels.begin() + per_window, labels.end(), 1);
  LabeledDataset ds(std::move(features), std::move(labels), 2);
  ds.validate();
  return {std::move(ds), DriftGroundTruth{std::move(drifting)}};
}

std::pair<LabeledDataset, DriftGroundTruth> generate_no_drift_stream(int n, int d,
                                                                     std::uint64_t seed) {
  if (n < 2 || n % 2 != 0)
    throw std::invalid_argument("no-drift stream: n must be even and >= 2");
  if (d < 1) throw std::invalid_argument("no-drift stream: d must be >= 1");
  Rng rng(seed);
  Eigen::MatrixXd features(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) features(i, j) = rng.normal();
  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  std::fill(labels.begin() + n / 2, labels.end(), 1);
  LabeledDataset ds(std::move(features), std::move(labels), 2);
  ds.validate();
  return {std::move(ds), DriftGroundTruth{std::vector<bool>(static_cast<std::size_t>(n), false)}};
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& field, int row, const std::string& column) {
  const std::string text = trim(field);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw SchemaError("row " + std::to_string(row) + ": non-numeric value '" + field +
                      "' in column " + column);
  return value;
}

long parse_int(const std::string& field, int row, const std::string& column) {
  const std::string text = trim(field);
  long value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw SchemaError("row " + std::to_string(row) + ": non-integer value '" + field +
                      "' in column " + column);
  return value;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

std::pair<LabeledDataset, std::optional<DriftGroundTruth>> load_embedding_csv(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw SchemaError("'" + path + "': empty file");
  const std::vector<std::string> header = split_csv_line(line);

  int t_col = -1;
  int drift_col = -1;
  std::vector<int> feature_cols;           // column index per feature, by feature id
  std::vector<int> feature_ids;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string name = trim(header[c]);
    if (name == "t") {
      t_col = static_cast<int>(c);
    } else if (name == "drift") {
      drift_col = static_cast<int>(c);
    } else if (name.size() > 1 && name[0] == 'f') {
      long id = 0;
      const auto [ptr, ec] =
          std::from_chars(name.data() + 1, name.data() + name.size(), id);
      if (ec != std::errc{} || ptr != name.data() + name.size() || id < 0)
        throw SchemaError("unrecognized column '" + name + "'");
      feature_ids.push_back(static_cast<int>(id));
      feature_cols.push_back(static_cast<int>(c));
    } else {
      throw SchemaError("unrecognized column '" + name + "'");
    }
  }
  if (t_col < 0) throw SchemaError("missing required column 't'");
  const int d = static_cast<int>(feature_ids.size());
  if (d == 0) throw SchemaError("no feature columns f0..f{d-1} found");
  {
    std::vector<int> sorted = feature_ids;
    std::sort(sorted.begin(), sorted.end());
    for (int j = 0; j < d; ++j) {
      if (sorted[static_cast<std::size_t>(j)] != j)
        throw SchemaError("feature columns must be exactly f0..f" + std::to_string(d - 1));
    }
  }
  std::vector<int> col_of_feature(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j)
    col_of_feature[static_cast<std::size_t>(feature_ids[static_cast<std::size_t>(j)])] =
        feature_cols[static_cast<std::size_t>(j)];

  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::vector<bool> drift;
  int row_number = 1;  // header is row 1
  int max_label = 0;
  while (std::getline(in, line)) {
    ++row_number;
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw SchemaError("row " + std::to_string(row_number) + ": expected " +
                        std::to_string(header.size()) + " fields, got " +
                        std::to_string(fields.size()));
    const long t = parse_int(fields[static_cast<std::size_t>(t_col)], row_number, "t");
    if (t < 0)
      throw SchemaError("row " + std::to_string(row_number) + ": unknown time label " +
                        std::to_string(t));
    max_label = std::max(max_label, static_cast<int>(t));
    labels.push_back(static_cast<int>(t));
    std::vector<double> values(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) {
      const int c = col_of_feature[static_cast<std::size_t>(j)];
      values[static_cast<std::size_t>(j)] =
          parse_double(fields[static_cast<std::size_t>(c)], row_number, "f" + std::to_string(j));
    }
    rows.push_back(std::move(values));
    if (drift_col >= 0) {
      const long flag = parse_int(fields[static_cast<std::size_t>(drift_col)], row_number, "drift");
      if (flag != 0 && flag != 1)
        throw SchemaError("row " + std::to_string(row_number) + ": drift must be 0 or 1");
      drift.push_back(flag == 1);
    }
  }
  if (rows.empty()) throw SchemaError("'" + path + "': no data rows");

  Eigen::MatrixXd features(static_cast<Eigen::Index>(rows.size()), d);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int j = 0; j < d; ++j) features(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];

  LabeledDataset ds(std::move(features), std::move(labels), max_label + 1);
  try {
    ds.validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError(std::string("'") + path + "': " + e.what());
  }
  std::optional<DriftGroundTruth> truth;
  if (drift_col >= 0) truth = DriftGroundTruth{std::move(drift)};
  return {std::move(ds), std::move(truth)};
}

void save_embedding_csv(const std::string& path, const LabeledDataset& ds,
                        const DriftGroundTruth* truth) {
  if (truth && static_cast<int>(truth->size()) != ds.size())
    throw std::invalid_argument("save_embedding_csv: ground truth length mismatch");
  std::ofstream out(path);
  if (!out) throw SchemaError("cannot write '" + path + "'");
  out << "t";
  if (truth) out << ",drift";
  for (int j = 0; j < ds.dimension(); ++j) out << ",f" << j;
  out << "\n";
  for (int i = 0; i < ds.size(); ++i) {
    out << ds.label(i);
    if (truth) out << ',' << (truth->is_drifting[static_cast<std::size_t>(i)] ? 1 : 0);
    for (int j = 0; j < ds.dimension(); ++j)
      out << ',' << format_double(ds.features()(i, j));
    out << "\n";
  }
  if (!out) throw SchemaError("write failed for '" + path + "'");
}

}  // namespace driftloc
