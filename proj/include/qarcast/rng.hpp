#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

namespace qarcast {

namespace detail {
/// Raw Philox4x32-10 block function, exposed for known-answer tests.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) noexcept;
}  // namespace detail

/// Purpose tags used when deriving sub-streams. Keeping them in one place
/// guarantees two consumers never share a stream by accident.
enum class StreamTag : std::uint64_t {
    Series = 1,
    Method = 2,
    Futures = 3,
    Replication = 4,
    Multipliers = 5,
    Innovations = 6,
    Uniforms = 7,
    SeriesRegen = 8,
    Window = 9,
    Oracle = 10,
    Timing = 11,
};

/// Counter-based random stream (Philox4x32-10).
///
/// The stream identity is the pair (master_seed, stream_index); the draw
/// position is a 64-bit counter. Two streams with equal identity produce the
/// same sequence, and sub-streams are derived by hashing a tag and an index
/// into the identity, so results never depend on evaluation order.
class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::uint64_t stream_index) noexcept;

    [[nodiscard]] RngStream substream(StreamTag tag, std::uint64_t index) const noexcept;

    [[nodiscard]] std::uint64_t master_seed() const noexcept { return master_seed_; }
    [[nodiscard]] std::uint64_t stream_index() const noexcept { return stream_index_; }

    std::uint64_t next_u64() noexcept;

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept;
    /// Uniform on the open interval (0, 1).
    double uniform_open() noexcept;
    /// Uniform integer on [0, n). n must be positive.
    std::size_t index(std::size_t n) noexcept;

private:
    void refill() noexcept;

    std::uint64_t master_seed_;
    std::uint64_t stream_index_;
    std::array<std::uint32_t, 2> key_{};
    std::uint64_t counter_ = 0;
    std::array<std::uint64_t, 2> buffer_{};
    int buffered_ = 0;
};

double draw_uniform(RngStream& rng) noexcept;
double draw_standard_normal(RngStream& rng) noexcept;
double draw_student_t(int df, RngStream& rng) noexcept;
double draw_chi_squared(int df, RngStream& rng) noexcept;
double draw_exponential_mean1(RngStream& rng) noexcept;

}  // namespace qarcast
