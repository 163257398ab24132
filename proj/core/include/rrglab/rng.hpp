#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string_view>

namespace rrglab {

// Name recorded in run manifests.
inline constexpr std::string_view kRngAlgorithm = "philox4x32-10";

/// Counter-based generator: the 64-bit seed is the Philox key, the 64-bit
/// stream id occupies the upper half of the 128-bit counter and the lower
/// half counts blocks. Streams with different ids never overlap, so trial k
/// always sees the same numbers no matter how many trials run.
///
/// Satisfies UniformRandomBitGenerator with 64-bit output.
class RngStream {
public:
    using result_type = std::uint64_t;

    RngStream() : RngStream(0, 0) {}
    RngStream(std::uint64_t seed, std::uint64_t stream_id);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform();
    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n);
    /// Standard normal via Box-Muller; the spare variate is cached.
    double normal();

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_; }
    std::uint64_t blocks_consumed() const { return block_; }

private:
    void refill();

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int buffered_ = 0;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

/// The stream used for trial `stream_id` of an experiment seeded with `seed`.
RngStream rng_stream(std::uint64_t seed, std::uint64_t stream_id);

/// Combines a parent stream id with a sub-purpose tag (splitmix64 finalizer).
std::uint64_t derive_stream_id(std::uint64_t parent, std::uint64_t tag);

/// Philox4x32-10 block function, exposed for the known-answer test.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

}  // namespace rrglab
