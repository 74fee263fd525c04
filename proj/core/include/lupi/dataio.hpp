#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lupi/synth.hpp"
#include "lupi/tensor.hpp"

namespace lupi {

inline constexpr std::uint32_t kIdxImageMagic = 2051;
inline constexpr std::uint32_t kIdxLabelMagic = 2049;

/// Reads an MNIST-layout IDX image/label pair. Pixels are scaled into [0, 1]
/// (byte / 255); labels stay 0..9. Row order follows the file.
std::pair<Tensor2D, Vector> load_idx(const std::string& images_path,
                                     const std::string& labels_path);

/// Big-endian IDX writers, byte-exact inverses of load_idx.
void write_idx_images(const std::string& path, const std::vector<std::uint8_t>& pixels,
                      std::size_t count, std::size_t rows, std::size_t cols);
void write_idx_labels(const std::string& path, const std::vector<std::uint8_t>& labels);

/// 4x4 average pooling of N x 784 images (28x28) down to N x 49 (7x7).
Tensor2D downscale_4x4(const Tensor2D& images);

struct TabularData {
    LupiDataset dataset;
    std::vector<std::string> groups; // one id per row, file order
};

/// CSV with a header naming `group`, `y`, input columns `x_<k>` and
/// privileged columns `p_<k>`; feature columns are ordered by their numeric
/// suffix. Rejects missing columns, non-numeric cells and non-finite targets.
TabularData load_tabular(const std::string& path);

/// Writes the same schema back out.
void write_tabular(const std::string& path, const LupiDataset& dataset,
                   const std::vector<std::string>& groups);

struct CvFold {
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> test_rows;
};

struct CvSplit {
    std::vector<CvFold> folds;
};

/// Leave-one-group-out folds, one per distinct group in first-appearance
/// order. Needs at least two distinct groups.
CvSplit loocv_splits(const std::vector<std::string>& groups);

/// Seeded uniform subsample of n rows without replacement, in draw order.
LupiDataset subsample(const LupiDataset& dataset, std::size_t n, std::uint64_t seed);

} // namespace lupi
