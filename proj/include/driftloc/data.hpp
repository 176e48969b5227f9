#ifndef DRIFTLOC_DATA_HPP
#define DRIFTLOC_DATA_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <utility>

#include "driftloc/dataset.hpp"

namespace driftloc {

/// Synthetic class-swap stream: three of n_classes Gaussian blobs are drawn
/// as non-drifting (both windows), drift-before (window 0 only), and
/// drift-after (window 1 only). Centers are drawn once uniformly in
/// [center_low, center_high]^d; sigma is the shared isotropic spread.
struct ClassSwapSpec {
  int n_classes = 3;
  int samples_per_window = 60;
  int n_drifting_per_window = 5;
  int dimension = 2;
  double sigma = 1.0;
  double center_low = -10.0;
  double center_high = 10.0;
  std::uint64_t seed = 0;
};

std::pair<LabeledDataset, DriftGroundTruth> generate_class_swap_stream(
    const ClassSwapSpec& spec);

/// Both windows i.i.d. standard Gaussian in d dimensions; ground truth all
/// false. n must be even.
std::pair<LabeledDataset, DriftGroundTruth> generate_no_drift_stream(int n, int d,
                                                                     std::uint64_t seed);

/// CSV schema: header row; column `t` (integer time label), optional column
/// `drift` (0/1 ground truth), remaining columns `f0..f{d-1}`; any column
/// order; UTF-8, LF or CRLF. Row order is sample order. Throws SchemaError
/// with the offending row number on malformed input.
std::pair<LabeledDataset, std::optional<DriftGroundTruth>> load_embedding_csv(
    const std::string& path);

/// Writes the same schema back; feature values use shortest round-trip
/// formatting, so save-then-load is exact.
void save_embedding_csv(const std::string& path, const LabeledDataset& ds,
                        const DriftGroundTruth* truth = nullptr);

}  // namespace driftloc

#endif
