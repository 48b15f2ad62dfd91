#pragma once

#include <array>
#include <cstdint>

namespace poischaos
{
//---------------------------------------------------------------------------//
/*!
 * Philox4x32-10 counter-based generator.
 *
 * Salmon et al., "Parallel random numbers: as easy as 1, 2, 3", SC11.
 * Output is a pure function of (key, counter), so any draw can be
 * regenerated independently of scheduling or of how many draws precede it.
 */
class Philox4x32
{
  public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    explicit constexpr Philox4x32(std::uint64_t seed)
        : key_{static_cast<std::uint32_t>(seed),
               static_cast<std::uint32_t>(seed >> 32)}
    {
    }

    constexpr Counter operator()(Counter ctr) const
    {
        Key key = key_;
        for (int round = 0; round < 10; ++round)
        {
            if (round > 0)
            {
                key[0] += kWeylA;
                key[1] += kWeylB;
            }
            ctr = single_round(ctr, key);
        }
        return ctr;
    }

    //! Uniform double in the open interval (0, 1) from 52 random bits
    static constexpr double to_unit(std::uint32_t hi, std::uint32_t lo)
    {
        std::uint64_t const bits = (static_cast<std::uint64_t>(hi) << 20)
                                   | (static_cast<std::uint64_t>(lo) >> 12);
        // cell midpoints: the largest value is 1 - 2^-53, still below one
        return (static_cast<double>(bits) + 0.5) * 0x1.0p-52;
    }

  private:
    static constexpr std::uint32_t kWeylA = 0x9E3779B9;
    static constexpr std::uint32_t kWeylB = 0xBB67AE85;
    static constexpr std::uint32_t kMulA = 0xD2511F53;
    static constexpr std::uint32_t kMulB = 0xCD9E8D57;

    static constexpr Counter single_round(Counter const& ctr, Key const& key)
    {
        std::uint64_t p0 = static_cast<std::uint64_t>(kMulA) * ctr[0];
        std::uint64_t p1 = static_cast<std::uint64_t>(kMulB) * ctr[2];
        auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        auto lo0 = static_cast<std::uint32_t>(p0);
        auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        auto lo1 = static_cast<std::uint32_t>(p1);
        return {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }

    Key key_;
};

}  // namespace poischaos
