#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>

namespace qgsf {

/// Philox4x64-10 block function (Salmon et al., SC'11). Pure, stateless.
std::array<std::uint64_t, 4> philox4x64(std::array<std::uint64_t, 4> counter,
                                        std::array<std::uint64_t, 2> key) noexcept;

/// SplitMix64 finalizer, used for stream-id derivation.
std::uint64_t mix64(std::uint64_t x) noexcept;

/**
 * Derive a stream label from an ordered list of integers.
 *
 * h = 0; for each v: h = mix64(h ^ v + 0x9e3779b97f4a7c15). The rule is part
 * of the reproducibility contract: a config file plus this function is enough
 * to regenerate every random number of a run.
 */
std::uint64_t derive_stream_id(std::initializer_list<std::uint64_t> parts) noexcept;

/**
 * A counter-based random stream keyed by (seed, stream_id).
 *
 * Each 256-bit Philox block is indexed by a 64-bit counter, so a stream holds
 * 2^66 outputs and streams with different keys never share a block. The
 * stream is a plain value: copying it forks an identical sequence.
 */
class RngStream {
public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept;

  std::uint64_t seed() const noexcept { return key_[0]; }
  std::uint64_t stream_id() const noexcept { return key_[1]; }

  /// A child stream keyed by (seed, derive_stream_id({stream_id, tag})).
  RngStream substream(std::uint64_t tag) const noexcept;

  std::uint64_t next_u64() noexcept;

  /// Uniform on the open interval (0, 1); never returns 0 or 1.
  double uniform01() noexcept;

  /// Standard normal by the Box-Muller transform. Variates come in pairs;
  /// the second of each pair is cached for the next call.
  double standard_normal() noexcept;

  /// Exponential with the given rate (> 0).
  double exponential(double rate);

  /// Gamma(shape, scale 1) for any real shape > 0 (Marsaglia-Tsang, with the
  /// U^(1/shape) boost below shape 1).
  double gamma(double shape);

  /// Chi-squared with real degrees of freedom df > 0.
  double chi_squared(double df);

private:
  void refill() noexcept;

  std::array<std::uint64_t, 2> key_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 4> buffer_{};
  unsigned used_ = 4;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace qgsf
