#include "gradvar/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gradvar {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kStreamSalt = 0xD1B54A32D192ED03ULL;
constexpr std::uint64_t kSubSalt = 0x8CB92BA72F3D8DD7ULL;
}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t RngStream::derive_key(std::uint64_t seed, std::uint64_t stream_id) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream_id * kStreamSalt + 1));
}

double RngStream::uniform_at(std::uint64_t counter) const {
  const std::uint64_t bits = splitmix64(key_ + counter * kGolden);
  // 53 random bits mapped to the open interval (0, 1).
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() {
  const std::uint64_t n = position_++;
  const double u1 = uniform_at(2 * n);
  const double u2 = uniform_at(2 * n + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double RngStream::uniform() {
  const std::uint64_t n = position_++;
  return uniform_at(2 * n);
}

RngStream RngStream::substream(std::uint64_t s) const {
  return RngStream(seed_, splitmix64(stream_id_ ^ kSubSalt) + splitmix64(s + kSubSalt));
}

RngStream make_rng(std::uint64_t seed) { return RngStream(seed, 0); }

Eigen::VectorXd standard_normal_vec(RngStream& rng, std::ptrdiff_t k) {
  if (k < 1) throw std::invalid_argument("standard_normal_vec: dimension must be >= 1");
  Eigen::VectorXd z(k);
  for (std::ptrdiff_t i = 0; i < k; ++i) z[i] = rng.normal();
  return z;
}

std::vector<RngStream> split_substreams(const RngStream& rng, std::size_t n) {
  if (n < 1) throw std::invalid_argument("split_substreams: n must be >= 1");
  std::vector<RngStream> out;
  out.reserve(n);
  for (std::size_t s = 0; s < n; ++s) out.push_back(rng.substream(s));
  return out;
}

}  // namespace gradvar
