#include "gradvar/mnist.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "gradvar/errors.hpp"

namespace gradvar {

namespace {

constexpr std::array<char, 4> kCacheMagic = {'G', 'V', 'D', 'S'};
constexpr std::uint32_t kCacheVersion = 1;

std::vector<std::uint8_t> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<std::uint8_t>& buf, std::size_t off, const std::filesystem::path& path) {
  if (buf.size() < off + 4) throw DataError(path.string() + ": truncated header");
  return (std::uint32_t{buf[off]} << 24) | (std::uint32_t{buf[off + 1]} << 16) | (std::uint32_t{buf[off + 2]} << 8) |
         std::uint32_t{buf[off + 3]};
}

void write_be32(std::ostream& os, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8),
                     static_cast<char>(v)};
  os.write(b, 4);
}

template <typename T>
void write_le(std::ostream& os, T v) {
  static_assert(std::endian::native == std::endian::little, "cache format assumes a little-endian host");
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_le(std::istream& is, const std::filesystem::path& path) {
  T v;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw DataError(path.string() + ": truncated cache file");
  return v;
}

}  // namespace

Eigen::MatrixXd load_idx_images(const std::filesystem::path& path, int* rows, int* cols) {
  const auto buf = read_all(path);
  const std::uint32_t magic = read_be32(buf, 0, path);
  if (magic != kIdxImagesMagic) {
    throw DataError(path.string() + ": bad magic number " + std::to_string(magic) + " (expected 0x00000803)");
  }
  const std::uint32_t count = read_be32(buf, 4, path);
  const std::uint32_t r = read_be32(buf, 8, path);
  const std::uint32_t c = read_be32(buf, 12, path);
  const std::size_t pixels = std::size_t{r} * c;
  if (buf.size() < 16 + std::size_t{count} * pixels) throw DataError(path.string() + ": truncated image payload");

  Eigen::MatrixXd images(count, static_cast<Eigen::Index>(pixels));
  for (std::size_t n = 0; n < count; ++n) {
    for (std::size_t p = 0; p < pixels; ++p) {
      images(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p)) = buf[16 + n * pixels + p] / 255.0;
    }
  }
  if (rows) *rows = static_cast<int>(r);
  if (cols) *cols = static_cast<int>(c);
  return images;
}

std::vector<int> load_idx_labels(const std::filesystem::path& path) {
  const auto buf = read_all(path);
  const std::uint32_t magic = read_be32(buf, 0, path);
  if (magic != kIdxLabelsMagic) {
    throw DataError(path.string() + ": bad magic number " + std::to_string(magic) + " (expected 0x00000801)");
  }
  const std::uint32_t count = read_be32(buf, 4, path);
  if (buf.size() < 8 + std::size_t{count}) throw DataError(path.string() + ": truncated label payload");
  return {buf.begin() + 8, buf.begin() + 8 + count};
}

ImageDataset load_mnist(const std::filesystem::path& images, const std::filesystem::path& labels,
                        Eigen::Index subsample) {
  ImageDataset d;
  d.images = load_idx_images(images, &d.rows, &d.cols);
  d.labels = load_idx_labels(labels);
  if (static_cast<Eigen::Index>(d.labels.size()) != d.images.rows()) {
    throw DataError("count mismatch: " + std::to_string(d.images.rows()) + " images vs " +
                    std::to_string(d.labels.size()) + " labels");
  }
  if (subsample > 0 && subsample < d.images.rows()) {
    d.images.conservativeResize(subsample, Eigen::NoChange);
    d.labels.resize(static_cast<std::size_t>(subsample));
  }
  return d;
}

Eigen::MatrixXd pooled_features(const ImageDataset& data, int factor) {
  if (factor < 1 || data.rows % factor != 0 || data.cols % factor != 0) {
    throw DataError("pooling factor " + std::to_string(factor) + " does not divide the image size");
  }
  const int pr = data.rows / factor, pc = data.cols / factor;
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(data.size(), pr * pc + 1);
  const double scale = 1.0 / (factor * factor);
  for (Eigen::Index n = 0; n < data.size(); ++n) {
    for (int r = 0; r < data.rows; ++r) {
      for (int c = 0; c < data.cols; ++c) {
        x(n, (r / factor) * pc + c / factor) += scale * data.images(n, r * data.cols + c);
      }
    }
    x(n, pr * pc) = 1.0;
  }
  return x;
}

void save_dataset(const std::filesystem::path& path, const ImageDataset& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(kCacheMagic.data(), kCacheMagic.size());
  write_le<std::uint32_t>(out, kCacheVersion);
  write_le<std::uint64_t>(out, static_cast<std::uint64_t>(data.size()));
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(data.rows));
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(data.cols));
  for (Eigen::Index n = 0; n < data.images.rows(); ++n) {
    for (Eigen::Index p = 0; p < data.images.cols(); ++p) write_le<double>(out, data.images(n, p));
  }
  for (int y : data.labels) write_le<std::uint8_t>(out, static_cast<std::uint8_t>(y));
  if (!out) throw DataError("failed writing " + path.string());
}

ImageDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kCacheMagic) {
    throw DataError(path.string() + ": not a dataset cache file");
  }
  if (read_le<std::uint32_t>(in, path) != kCacheVersion) throw DataError(path.string() + ": unsupported cache version");
  ImageDataset d;
  const auto count = static_cast<Eigen::Index>(read_le<std::uint64_t>(in, path));
  d.rows = static_cast<int>(read_le<std::uint32_t>(in, path));
  d.cols = static_cast<int>(read_le<std::uint32_t>(in, path));
  d.images.resize(count, static_cast<Eigen::Index>(d.rows) * d.cols);
  for (Eigen::Index n = 0; n < count; ++n) {
    for (Eigen::Index p = 0; p < d.images.cols(); ++p) d.images(n, p) = read_le<double>(in, path);
  }
  d.labels.resize(static_cast<std::size_t>(count));
  for (auto& y : d.labels) y = read_le<std::uint8_t>(in, path);
  return d;
}

void write_idx_images(const std::filesystem::path& path, const std::vector<std::uint8_t>& pixels, std::uint32_t count,
                      std::uint32_t rows, std::uint32_t cols) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  write_be32(out, kIdxImagesMagic);
  write_be32(out, count);
  write_be32(out, rows);
  write_be32(out, cols);
  out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
}

void write_idx_labels(const std::filesystem::path& path, const std::vector<std::uint8_t>& labels) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  write_be32(out, kIdxLabelsMagic);
  write_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.write(reinterpret_cast<const char*>(labels.data()), static_cast<std::streamsize>(labels.size()));
}

}  // namespace gradvar
