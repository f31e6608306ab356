#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace gradvar {

/// Counter-based random stream keyed on (seed, stream_id).
///
/// Variate n of a stream depends only on (seed, stream_id, n), so a stream can
/// be copied, split and replayed without shared state. Normals use the cosine
/// branch of Box-Muller on two uniforms drawn at counters 2n and 2n+1; the
/// uniforms come from the SplitMix64 finalizer applied to a keyed counter.
/// This generation method is fixed: seeded outputs are stable across versions.
class RngStream {
 public:
  RngStream() = default;
  RngStream(std::uint64_t seed, std::uint64_t stream_id)
      : seed_(seed), stream_id_(stream_id), key_(derive_key(seed, stream_id)) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }
  /// Number of normal variates consumed so far.
  std::uint64_t position() const { return position_; }

  /// Next standard normal variate; advances the stream by one.
  double normal();
  /// Next uniform on the open interval (0, 1); consumes one normal slot.
  double uniform();

  /// Substream s of this stream. Depends only on (seed, stream_id, s).
  RngStream substream(std::uint64_t s) const;

  friend bool operator==(const RngStream& a, const RngStream& b) {
    return a.seed_ == b.seed_ && a.stream_id_ == b.stream_id_ && a.position_ == b.position_;
  }

 private:
  static std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream_id);
  double uniform_at(std::uint64_t counter) const;

  std::uint64_t seed_ = 0;
  std::uint64_t stream_id_ = 0;
  std::uint64_t key_ = derive_key(0, 0);
  std::uint64_t position_ = 0;
};

RngStream make_rng(std::uint64_t seed);

/// k iid standard normals; advances the stream by exactly k.
Eigen::VectorXd standard_normal_vec(RngStream& rng, std::ptrdiff_t k);

/// Substreams 0..n-1 of `rng`. split_substreams(r, 1)[0] == r.substream(0).
std::vector<RngStream> split_substreams(const RngStream& rng, std::size_t n);

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace gradvar
