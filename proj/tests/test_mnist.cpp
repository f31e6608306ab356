#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <unistd.h>

#include "gradvar/errors.hpp"
#include "gradvar/mnist.hpp"

using namespace gradvar;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("gradvar_mnist_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static inline int counter = 0;
};

std::vector<std::uint8_t> ramp(std::size_t n) {
  std::vector<std::uint8_t> v(n);
  for (std::size_t j = 0; j < n; ++j) v[j] = static_cast<std::uint8_t>((j * 37) % 256);
  return v;
}

}  // namespace


TEST_CASE("IDX images load and rescale to [0, 1]") {
  TempDir dir;
  const auto px = ramp(10 * 28 * 28);
  write_idx_images(dir.path / "img", px, 10, 28, 28);
  int rows = 0, cols = 0;
  const Eigen::MatrixXd images = load_idx_images(dir.path / "img", &rows, &cols);
  CHECK(images.rows() == 10);
  CHECK(images.cols() == 784);
  CHECK(rows == 28);
  CHECK(cols == 28);
  CHECK(images.minCoeff() >= 0.0);
  CHECK(images.maxCoeff() <= 1.0);
  CHECK(images(1, 2) == doctest::Approx(px[784 + 2] / 255.0));
}

TEST_CASE("bad magic, truncation and count mismatch are data errors") {
  TempDir dir;
  write_idx_images(dir.path / "img", ramp(4 * 4 * 4), 4, 4, 4);
  write_idx_labels(dir.path / "lab", {1, 2, 3});
  CHECK_THROWS_AS(load_idx_images(dir.path / "lab"), DataError);
  CHECK_THROWS_AS(load_idx_labels(dir.path / "img"), DataError);
  CHECK_THROWS_AS(load_mnist(dir.path / "img", dir.path / "lab"), DataError);

  fs::resize_file(dir.path / "img", fs::file_size(dir.path / "img") - 5);
  CHECK_THROWS_AS(load_idx_images(dir.path / "img"), DataError);
  CHECK_THROWS_AS(load_idx_images(dir.path / "missing"), DataError);
}

TEST_CASE("subsample and pooling") {
  TempDir dir;
  std::vector<std::uint8_t> px(3 * 4 * 4, 0);
  for (std::size_t j = 0; j < 16; ++j) px[j] = static_cast<std::uint8_t>(j < 8 ? 255 : 0);
  write_idx_images(dir.path / "img", px, 3, 4, 4);
  write_idx_labels(dir.path / "lab", {7, 1, 0});
  const ImageDataset all = load_mnist(dir.path / "img", dir.path / "lab");
  CHECK(all.size() == 3);
  const ImageDataset two = load_mnist(dir.path / "img", dir.path / "lab", 2);
  CHECK(two.size() == 2);
  CHECK(two.labels == std::vector<int>{7, 1});

  const Eigen::MatrixXd f = pooled_features(all, 2);
  CHECK(f.cols() == 2 * 2 + 1);
  CHECK(f(0, 0) == doctest::Approx(1.0));  // top-left block is in the first two rows
  CHECK(f(0, 2) == doctest::Approx(0.0));
  CHECK(f.col(4).isOnes());
  CHECK_THROWS(pooled_features(all, 3));
}

TEST_CASE("cache round-trip gives identical tensors") {
  TempDir dir;
  write_idx_images(dir.path / "img", ramp(5 * 28 * 28), 5, 28, 28);
  write_idx_labels(dir.path / "lab", {0, 1, 2, 3, 9});
  const ImageDataset a = load_mnist(dir.path / "img", dir.path / "lab");
  save_dataset(dir.path / "cache.bin", a);
  const ImageDataset b = load_dataset(dir.path / "cache.bin");
  CHECK(a.images == b.images);
  CHECK(a.labels == b.labels);
  CHECK(b.rows == 28);
  CHECK(b.cols == 28);

  std::ofstream(dir.path / "junk.bin") << "not a cache";
  CHECK_THROWS_AS(load_dataset(dir.path / "junk.bin"), DataError);
}
