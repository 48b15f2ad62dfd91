#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "poischaos/measure.hpp"

namespace poischaos
{
//---------------------------------------------------------------------------//
/*!
 * Set partition of [K] = {1, ..., K}.
 *
 * Blocks are stored canonically: each block ascending, blocks ordered by
 * their minimum element. Elements are 1-based; tensor position of element e
 * is e - 1.
 */
class SetPartition
{
  public:
    using Block = std::vector<int>;

    SetPartition() = default;
    //! Build from arbitrary blocks; validates and canonicalizes
    SetPartition(int ground_size, std::vector<Block> blocks);
    //! Build from a restricted growth string (labels[e-1] = block of e)
    static SetPartition from_growth_string(std::vector<int> const& labels);
    //! All singletons of [K]
    static SetPartition minimal(int ground_size);

    int ground_size() const { return ground_size_; }
    std::size_t size() const { return blocks_.size(); }
    std::vector<Block> const& blocks() const { return blocks_; }
    Block const& block(std::size_t j) const { return blocks_[j]; }

    //! Block index (0-based, canonical order) of element e (1-based)
    std::size_t block_of(int element) const { return owner_[element - 1]; }

    std::string to_string() const;
    bool operator==(SetPartition const&) const = default;

  private:
    int ground_size_{0};
    std::vector<Block> blocks_;
    std::vector<std::size_t> owner_;
};

struct EnumerationLimits
{
    int max_ground_size{10};
    int max_word_length{10};
};

std::vector<SetPartition>
enumerate_partitions(int ground_size, EnumerationLimits limits = {});

//! Every block meets every factor's argument range in at most one element
bool is_nonflat(SetPartition const& sigma, Shape const& shape);

std::vector<SetPartition>
enumerate_nonflat(Shape const& shape, EnumerationLimits limits = {});

std::vector<SetPartition> filter_geq2(std::vector<SetPartition> partitions);

struct SigmaSplit
{
    std::vector<SetPartition::Block> singletons;
    std::vector<SetPartition::Block> big_blocks;
};

SigmaSplit split_sigma(SetPartition const& sigma);

//---------------------------------------------------------------------------//
/*!
 * A non-flat partition together with a chosen subset of its big blocks.
 *
 * `chosen` holds indices into sigma.blocks(), ascending; each refers to a
 * block of size at least two. The chosen blocks stay free variables in the
 * product kernel; the other big blocks are integrated out.
 */
struct DiagramPair
{
    SetPartition sigma;
    std::vector<std::size_t> chosen;

    //! |A| + |sigma_1|: order of the kernel this pair contributes to
    int output_order() const;
    bool is_chosen(std::size_t block) const;
    std::string to_string() const;
};

std::vector<DiagramPair> enumerate_diagram_pairs(Shape const& shape,
                                                 int q,
                                                 EnumerationLimits limits = {});

//---------------------------------------------------------------------------//
/*!
 * Word over the alphabet of nonempty subsets of [m].
 *
 * Letter j is a bitmask: bit i set means factor i (0-based) receives the
 * j-th inserted point.
 */
struct Word
{
    using Letter = std::uint32_t;

    std::vector<Letter> letters;

    std::size_t length() const { return letters.size(); }
    //! d_i: number of letters containing factor i
    std::vector<int> multiplicities(std::size_t factor_count) const;
    //! Positions j (ascending, 0-based) of letters containing factor i
    std::vector<std::size_t> positions_of(std::size_t factor) const;
    bool is_restricted(Shape const& shape) const;
    std::string to_string() const;

    bool operator==(Word const&) const = default;
};

//! All words of length q with d_i <= k_i, in lexicographic letter order
std::vector<Word>
enumerate_words(Shape const& shape, int q, EnumerationLimits limits = {});

//! k (k-1) ... (k-i+1), with k_(0) = 1
std::int64_t falling_factorial(int k, int i);

std::int64_t factorial(int k);
std::int64_t binomial(int n, int k);

}  // namespace poischaos
