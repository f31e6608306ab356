#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Dense>

namespace gradvar {

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

/// Images scaled to [0, 1], one row per image (rows * cols pixels, row-major).
struct ImageDataset {
  Eigen::MatrixXd images;
  std::vector<int> labels;
  int rows = 0;
  int cols = 0;

  Eigen::Index size() const { return images.rows(); }
};

/// Reads an IDX3 image file. Throws DataError on a bad magic number or a
/// truncated payload.
Eigen::MatrixXd load_idx_images(const std::filesystem::path& path, int* rows = nullptr, int* cols = nullptr);
std::vector<int> load_idx_labels(const std::filesystem::path& path);

/// Images and labels together; a count mismatch is a DataError. When
/// `subsample` > 0 only the first `subsample` records are kept.
ImageDataset load_mnist(const std::filesystem::path& images, const std::filesystem::path& labels,
                        Eigen::Index subsample = 0);

/// Average-pools each image by `factor` (which must divide both sides) and
/// appends a constant bias feature of 1.
Eigen::MatrixXd pooled_features(const ImageDataset& data, int factor);

/// Binary cache: "GVDS" magic, u32 version, u64 count, u32 rows, u32 cols,
/// then count*rows*cols little-endian float64 pixels and count u8 labels.
void save_dataset(const std::filesystem::path& path, const ImageDataset& data);
ImageDataset load_dataset(const std::filesystem::path& path);

/// Writers for tests and fixtures.
void write_idx_images(const std::filesystem::path& path, const std::vector<std::uint8_t>& pixels, std::uint32_t count,
                      std::uint32_t rows, std::uint32_t cols);
void write_idx_labels(const std::filesystem::path& path, const std::vector<std::uint8_t>& labels);

}  // namespace gradvar
