#include "poischaos/combinat.hpp"

#include <algorithm>
#include <bit>
#include <sstream>

#include "poischaos/errors.hpp"

namespace poischaos
{
namespace
{
void require_ground_size(int k, EnumerationLimits const& limits)
{
    if (k > limits.max_ground_size)
    {
        std::ostringstream msg;
        msg << "partition enumeration of [" << k << "] exceeds the cap of "
            << limits.max_ground_size;
        throw ResourceLimit(msg.str());
    }
}

std::string block_list(std::vector<SetPartition::Block> const& blocks)
{
    std::ostringstream os;
    os << '{';
    for (std::size_t j = 0; j < blocks.size(); ++j)
    {
        os << (j ? ",{" : "{");
        for (std::size_t e = 0; e < blocks[j].size(); ++e)
            os << (e ? "," : "") << blocks[j][e];
        os << '}';
    }
    os << '}';
    return os.str();
}
}  // namespace

//---------------------------------------------------------------------------//
SetPartition::SetPartition(int ground_size, std::vector<Block> blocks)
    : ground_size_(ground_size), blocks_(std::move(blocks))
{
    if (ground_size_ < 0)
        throw InvalidArgument("partition ground size must be nonnegative");
    owner_.assign(static_cast<std::size_t>(ground_size_), blocks_.size());
    for (auto& b : blocks_)
    {
        if (b.empty())
            throw InvalidArgument("partition blocks must be nonempty");
        std::sort(b.begin(), b.end());
    }
    std::sort(blocks_.begin(), blocks_.end(),
              [](Block const& a, Block const& b) { return a.front() < b.front(); });
    for (std::size_t j = 0; j < blocks_.size(); ++j)
    {
        for (int e : blocks_[j])
        {
            if (e < 1 || e > ground_size_)
                throw InvalidArgument("partition element outside [K]");
            if (owner_[e - 1] != blocks_.size())
                throw InvalidArgument("partition blocks overlap");
            owner_[e - 1] = j;
        }
    }
    for (std::size_t o : owner_)
    {
        if (o == blocks_.size())
            throw InvalidArgument("partition blocks do not cover [K]");
    }
}

SetPartition SetPartition::from_growth_string(std::vector<int> const& labels)
{
    std::vector<Block> blocks;
    for (std::size_t e = 0; e < labels.size(); ++e)
    {
        auto label = static_cast<std::size_t>(labels[e]);
        if (label > blocks.size())
            throw InvalidArgument("not a restricted growth string");
        if (label == blocks.size())
            blocks.emplace_back();
        blocks[label].push_back(static_cast<int>(e) + 1);
    }
    return SetPartition(static_cast<int>(labels.size()), std::move(blocks));
}

SetPartition SetPartition::minimal(int ground_size)
{
    std::vector<Block> blocks;
    for (int e = 1; e <= ground_size; ++e)
        blocks.push_back({e});
    return SetPartition(ground_size, std::move(blocks));
}

std::string SetPartition::to_string() const
{
    return block_list(blocks_);
}

//---------------------------------------------------------------------------//
/*!
 * Enumerate set partitions of [K] through restricted growth strings.
 *
 * Element e may join any existing block or open a new one; the growth string
 * order yields each partition exactly once.
 */
std::vector<SetPartition> enumerate_partitions(int ground_size, EnumerationLimits limits)
{
    if (ground_size < 1)
        throw InvalidArgument("enumerate_partitions needs K >= 1");
    require_ground_size(ground_size, limits);

    std::vector<SetPartition> result;
    std::vector<int> labels(static_cast<std::size_t>(ground_size), 0);
    std::vector<int> max_prefix(static_cast<std::size_t>(ground_size), 0);
    while (true)
    {
        result.push_back(SetPartition::from_growth_string(labels));
        // Increment the rightmost position that can still grow
        int e = ground_size - 1;
        while (e > 0 && labels[e] > max_prefix[e - 1])
            --e;
        if (e == 0)
            break;
        ++labels[e];
        max_prefix[e] = std::max(max_prefix[e - 1], labels[e]);
        for (int j = e + 1; j < ground_size; ++j)
        {
            labels[j] = 0;
            max_prefix[j] = max_prefix[e];
        }
    }
    return result;
}

bool is_nonflat(SetPartition const& sigma, Shape const& shape)
{
    if (sigma.ground_size() != shape.total_order())
        return false;
    for (auto const& block : sigma.blocks())
    {
        std::vector<bool> seen(shape.factor_count(), false);
        for (int e : block)
        {
            std::size_t i = shape.owner(e - 1);
            if (seen[i])
                return false;
            seen[i] = true;
        }
    }
    return true;
}

std::vector<SetPartition> enumerate_nonflat(Shape const& shape, EnumerationLimits limits)
{
    int const k_total = shape.total_order();
    if (k_total == 0)
        return {};
    require_ground_size(k_total, limits);

    // Depth-first growth string construction, pruning any element that would
    // join a block already holding an element of the same factor.
    std::vector<SetPartition> result;
    std::vector<int> labels(static_cast<std::size_t>(k_total), 0);
    std::vector<std::vector<std::size_t>> owners;  // per open block
    std::vector<std::size_t> factor_of(static_cast<std::size_t>(k_total));
    for (int pos = 0; pos < k_total; ++pos)
        factor_of[pos] = shape.owner(pos);

    auto recurse = [&](auto&& self, int pos) -> void {
        if (pos == k_total)
        {
            result.push_back(SetPartition::from_growth_string(labels));
            return;
        }
        std::size_t const f = factor_of[pos];
        for (std::size_t b = 0; b <= owners.size(); ++b)
        {
            if (b == owners.size())
            {
                owners.push_back({f});
                labels[pos] = static_cast<int>(b);
                self(self, pos + 1);
                owners.pop_back();
                break;
            }
            // owners may reallocate during recursion; index, never hold a reference
            if (std::find(owners[b].begin(), owners[b].end(), f) != owners[b].end())
                continue;
            owners[b].push_back(f);
            labels[pos] = static_cast<int>(b);
            self(self, pos + 1);
            owners[b].pop_back();
        }
    };
    recurse(recurse, 0);
    return result;
}

std::vector<SetPartition> filter_geq2(std::vector<SetPartition> partitions)
{
    std::erase_if(partitions, [](SetPartition const& sigma) {
        return std::any_of(sigma.blocks().begin(), sigma.blocks().end(),
                           [](auto const& b) { return b.size() < 2; });
    });
    return partitions;
}

SigmaSplit split_sigma(SetPartition const& sigma)
{
    SigmaSplit split;
    for (auto const& b : sigma.blocks())
        (b.size() == 1 ? split.singletons : split.big_blocks).push_back(b);
    return split;
}

//---------------------------------------------------------------------------//
int DiagramPair::output_order() const
{
    int singletons = 0;
    for (auto const& b : sigma.blocks())
        singletons += b.size() == 1 ? 1 : 0;
    return singletons + static_cast<int>(chosen.size());
}

bool DiagramPair::is_chosen(std::size_t block) const
{
    return std::binary_search(chosen.begin(), chosen.end(), block);
}

std::string DiagramPair::to_string() const
{
    std::vector<SetPartition::Block> a;
    for (auto j : chosen)
        a.push_back(sigma.block(j));
    return "sigma=" + sigma.to_string() + " A=" + block_list(a);
}

std::vector<DiagramPair>
enumerate_diagram_pairs(Shape const& shape, int q, EnumerationLimits limits)
{
    int const k_total = shape.total_order();
    if (q < 0 || q > k_total)
        throw InvalidArgument("diagram pairs need 0 <= q <= K");

    std::vector<DiagramPair> result;
    for (auto& sigma : enumerate_nonflat(shape, limits))
    {
        std::vector<std::size_t> big;
        int singletons = 0;
        for (std::size_t j = 0; j < sigma.size(); ++j)
        {
            if (sigma.block(j).size() == 1)
                ++singletons;
            else
                big.push_back(j);
        }
        int const need = q - singletons;
        if (need < 0 || need > static_cast<int>(big.size()))
            continue;
        // All subsets of the big blocks with exactly `need` members, in
        // lexicographic order of block indices
        std::vector<bool> pick(big.size(), false);
        std::fill(pick.begin(), pick.begin() + need, true);
        do
        {
            DiagramPair pair{sigma, {}};
            for (std::size_t t = 0; t < big.size(); ++t)
            {
                if (pick[t])
                    pair.chosen.push_back(big[t]);
            }
            result.push_back(std::move(pair));
        } while (std::prev_permutation(pick.begin(), pick.end()));
    }
    return result;
}

//---------------------------------------------------------------------------//
std::vector<int> Word::multiplicities(std::size_t factor_count) const
{
    std::vector<int> d(factor_count, 0);
    for (Letter letter : letters)
    {
        for (std::size_t i = 0; i < factor_count; ++i)
        {
            if (letter >> i & 1u)
                ++d[i];
        }
    }
    return d;
}

std::vector<std::size_t> Word::positions_of(std::size_t factor) const
{
    std::vector<std::size_t> pos;
    for (std::size_t j = 0; j < letters.size(); ++j)
    {
        if (letters[j] >> factor & 1u)
            pos.push_back(j);
    }
    return pos;
}

bool Word::is_restricted(Shape const& shape) const
{
    std::size_t const m = shape.factor_count();
    for (Letter letter : letters)
    {
        if (letter == 0 || (m < 32 && letter >> m != 0))
            return false;
    }
    auto d = this->multiplicities(m);
    for (std::size_t i = 0; i < m; ++i)
    {
        if (d[i] > shape.order(i))
            return false;
    }
    return true;
}

std::string Word::to_string() const
{
    std::ostringstream os;
    os << '(';
    for (std::size_t j = 0; j < letters.size(); ++j)
    {
        os << (j ? ",{" : "{");
        bool first = true;
        for (unsigned i = 0; i < 32; ++i)
        {
            if (letters[j] >> i & 1u)
            {
                os << (first ? "" : ",") << i + 1;
                first = false;
            }
        }
        os << '}';
    }
    os << ')';
    return os.str();
}

std::vector<Word> enumerate_words(Shape const& shape, int q, EnumerationLimits limits)
{
    if (q < 1)
        throw InvalidArgument("words need length q >= 1");
    if (q > limits.max_word_length)
    {
        std::ostringstream msg;
        msg << "word length " << q << " exceeds the cap of "
            << limits.max_word_length;
        throw ResourceLimit(msg.str());
    }
    std::size_t const m = shape.factor_count();
    if (m >= 32)
        throw ResourceLimit("words support at most 31 factors");
    if (q > shape.total_order())
        return {};

    std::vector<Word> result;
    std::vector<int> remaining(shape.orders().begin(), shape.orders().end());
    Word current;
    Word::Letter const alphabet_end = Word::Letter{1} << m;

    auto recurse = [&](auto&& self, int depth) -> void {
        if (depth == q)
        {
            result.push_back(current);
            return;
        }
        for (Word::Letter letter = 1; letter < alphabet_end; ++letter)
        {
            bool fits = true;
            for (std::size_t i = 0; i < m && fits; ++i)
                fits = !(letter >> i & 1u) || remaining[i] > 0;
            if (!fits)
                continue;
            for (std::size_t i = 0; i < m; ++i)
                remaining[i] -= static_cast<int>(letter >> i & 1u);
            current.letters.push_back(letter);
            self(self, depth + 1);
            current.letters.pop_back();
            for (std::size_t i = 0; i < m; ++i)
                remaining[i] += static_cast<int>(letter >> i & 1u);
        }
    };
    recurse(recurse, 0);
    return result;
}

//---------------------------------------------------------------------------//
std::int64_t falling_factorial(int k, int i)
{
    if (i < 0 || k < 0 || i > k)
    {
        std::ostringstream msg;
        msg << "falling factorial needs 0 <= i <= k (got k=" << k << ", i=" << i
            << ")";
        throw InvalidArgument(msg.str());
    }
    std::int64_t result = 1;
    for (int j = 0; j < i; ++j)
        result *= k - j;
    return result;
}

std::int64_t factorial(int k)
{
    return falling_factorial(k, k);
}

std::int64_t binomial(int n, int k)
{
    if (k < 0 || n < 0 || k > n)
        return 0;
    return falling_factorial(n, k) / factorial(k);
}

}  // namespace poischaos
