#ifndef STOCHMOM_PHILOX_HPP
#define STOCHMOM_PHILOX_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

namespace stochmom {

/// Philox4x64-10 counter-based generator (Salmon et al., SC'11).
///
/// Output is a pure function of (counter, key), so any element of any stream
/// can be produced without touching the others. That is what makes ensemble
/// results independent of the worker schedule.
class Philox4x64 {
public:
    using counter_type = std::array<std::uint64_t, 4>;
    using key_type = std::array<std::uint64_t, 2>;

    static counter_type block(counter_type ctr, key_type key) noexcept
    {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            auto [hi0, lo0] = mulhilo(kMul0, ctr[0]);
            auto [hi1, lo1] = mulhilo(kMul1, ctr[2]);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        }
        return ctr;
    }

private:
    static constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
    static constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
    static constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
    static constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

    static std::array<std::uint64_t, 2> mulhilo(std::uint64_t a, std::uint64_t b) noexcept
    {
        const auto product = static_cast<unsigned __int128>(a) * b;
        return {static_cast<std::uint64_t>(product >> 64), static_cast<std::uint64_t>(product)};
    }
};

/// Independent random streams multiplexed onto one master seed.
enum class StreamId : std::uint64_t {
    wiener = 0,
    initial_position = 1,
    diagnostics = 2,
};

/// Uniform in (0, 1]; never returns zero so it is safe under log().
inline double to_unit_open_left(std::uint64_t bits) noexcept
{
    return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

/// Standard normal variates addressed by (seed, path_index, stream, k).
///
/// Block b of the Philox counter yields four uniforms and, via two
/// Box-Muller transforms, the normals with indices 4b..4b+3.
class GaussianStream {
public:
    GaussianStream(std::uint64_t seed, std::uint64_t path_index, StreamId stream) noexcept
        : key_{seed, kKeyTag}, path_index_{path_index}, stream_{static_cast<std::uint64_t>(stream)}
    {}

    /// Normal with absolute index k in this stream.
    double at(std::uint64_t k) const noexcept
    {
        const auto normals = block_normals(k / 4);
        return normals[k % 4];
    }

    /// Fills out[i] with the normal of absolute index first + i.
    void fill(std::uint64_t first, std::span<double> out) const noexcept
    {
        std::size_t i = 0;
        std::uint64_t k = first;
        while (i < out.size()) {
            const auto normals = block_normals(k / 4);
            for (auto j = k % 4; j < 4 && i < out.size(); ++j, ++i, ++k)
                out[i] = normals[j];
        }
    }

    /// Uniform in (0, 1] with absolute index k; shares counters with at().
    double uniform_at(std::uint64_t k) const noexcept
    {
        const auto bits = Philox4x64::block({k / 4, path_index_, stream_, kUniformTag}, key_);
        return to_unit_open_left(bits[k % 4]);
    }

private:
    static constexpr std::uint64_t kKeyTag = 0x53544F43484D4F4DULL;  // "STOCHMOM"
    static constexpr std::uint64_t kUniformTag = 1;

    std::array<double, 4> block_normals(std::uint64_t b) const noexcept
    {
        const auto bits = Philox4x64::block({b, path_index_, stream_, 0}, key_);
        std::array<double, 4> z{};
        for (int pair = 0; pair < 2; ++pair) {
            const double u1 = to_unit_open_left(bits[2 * pair]);
            const double u2 = to_unit_open_left(bits[2 * pair + 1]);
            const double radius = std::sqrt(-2.0 * std::log(u1));
            const double angle = 2.0 * std::numbers::pi * u2;
            z[2 * pair] = radius * std::cos(angle);
            z[2 * pair + 1] = radius * std::sin(angle);
        }
        return z;
    }

    Philox4x64::key_type key_;
    std::uint64_t path_index_;
    std::uint64_t stream_;
};

}  // namespace stochmom

#endif  // STOCHMOM_PHILOX_HPP
