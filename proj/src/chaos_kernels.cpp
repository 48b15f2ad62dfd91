#include "poischaos/chaos_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "poischaos/errors.hpp"

namespace poischaos
{
namespace
{
std::size_t atoms_of(std::span<Kernel const> kernels)
{
    for (auto const& f : kernels)
    {
        if (f.order() > 0)
            return f.atom_count();
    }
    return 0;
}

std::vector<Kernel> abs_all(std::span<Kernel const> kernels)
{
    std::vector<Kernel> result;
    result.reserve(kernels.size());
    for (auto const& f : kernels)
        result.push_back(abs(f));
    return result;
}

void require_symmetric(std::span<Kernel const> kernels)
{
    for (std::size_t i = 0; i < kernels.size(); ++i)
    {
        if (!kernels[i].is_symmetric())
        {
            std::ostringstream msg;
            msg << "kernel f" << i + 1 << " is not flagged symmetric";
            throw InvalidArgument(msg.str());
        }
    }
}
}  // namespace

//---------------------------------------------------------------------------//
double ConditionReport::max_mass() const
{
    double result = 0;
    for (auto const& item : per_item)
        result = std::max(result, item.mass);
    return result;
}

void require_kernels_match(Shape const& shape,
                           std::span<Kernel const> kernels,
                           MeasureSpace const& space)
{
    if (kernels.size() != shape.factor_count())
    {
        std::ostringstream msg;
        msg << "shape has " << shape.factor_count() << " factors but "
            << kernels.size() << " kernels were given";
        throw InvalidArgument(msg.str());
    }
    for (std::size_t i = 0; i < kernels.size(); ++i)
    {
        if (kernels[i].order() != shape.order(i))
        {
            std::ostringstream msg;
            msg << "kernel f" << i + 1 << " has order " << kernels[i].order()
                << " but the shape requires " << shape.order(i);
            throw OrderMismatch(msg.str());
        }
        require_same_space(kernels[i], space);
    }
}

//---------------------------------------------------------------------------//
Kernel apply_partition(std::span<Kernel const> kernels,
                       SetPartition const& sigma,
                       Shape const& shape)
{
    if (kernels.size() != shape.factor_count())
        throw InvalidArgument("kernel count differs from the shape");
    if (!is_nonflat(sigma, shape))
    {
        throw InvalidArgument("partition " + sigma.to_string()
                              + " is flat for the given shape");
    }
    std::size_t const n = atoms_of(kernels);
    int const out_order = static_cast<int>(sigma.size());

    // Argument slots of each factor, expressed as block indices of sigma
    std::vector<std::vector<std::size_t>> slots(kernels.size());
    double scalar = 1;
    for (std::size_t i = 0; i < kernels.size(); ++i)
    {
        if (kernels[i].order() != shape.order(i))
            throw OrderMismatch("kernel order differs from the shape");
        if (shape.order(i) == 0)
        {
            scalar *= kernels[i].scalar_value();
            continue;
        }
        for (int pos = 0; pos < shape.order(i); ++pos)
            slots[i].push_back(sigma.block_of(shape.offset(i) + pos + 1));
    }
    if (out_order == 0)
        return Kernel::scalar(scalar);

    std::vector<double> values(checked_pow(n, out_order));
    for_each_index(n, out_order, [&](std::span<Atom const> z, std::size_t flat) {
        double v = scalar;
        for (std::size_t i = 0; i < kernels.size() && v != 0; ++i)
        {
            if (slots[i].empty())
                continue;
            std::size_t src = 0;
            for (std::size_t blk : slots[i])
                src = src * n + z[blk];
            v *= kernels[i][src];
        }
        values[flat] = v;
    });
    return Kernel(n, out_order, std::move(values));
}

namespace
{
//! Surviving argument positions of the identified tensor for a given pair
std::vector<int> kept_blocks(DiagramPair const& pair)
{
    std::vector<int> keep;
    for (std::size_t j = 0; j < pair.sigma.size(); ++j)
    {
        if (pair.sigma.block(j).size() == 1 || pair.is_chosen(j))
            keep.push_back(static_cast<int>(j));
    }
    return keep;
}
}  // namespace

Kernel build_H(DiagramPair const& pair,
               Shape const& shape,
               std::span<Kernel const> kernels,
               MeasureSpace const& space)
{
    require_kernels_match(shape, kernels, space);
    for (auto j : pair.chosen)
    {
        if (j >= pair.sigma.size() || pair.sigma.block(j).size() < 2)
            throw InvalidArgument("chosen blocks must be blocks of size >= 2");
    }
    Kernel identified = apply_partition(kernels, pair.sigma, shape);
    auto keep = kept_blocks(pair);
    if (identified.order() == 0)
        return identified;
    return symmetrize(integrate_out(identified, keep, space), space);
}

Kernel product_kernel(int q,
                      Shape const& shape,
                      std::span<Kernel const> kernels,
                      MeasureSpace const& space)
{
    int const k_total = shape.total_order();
    if (q < 1 || q > k_total)
    {
        std::ostringstream msg;
        msg << "product kernel order " << q << " outside 1.." << k_total;
        throw InvalidArgument(msg.str());
    }
    require_kernels_match(shape, kernels, space);
    require_symmetric(kernels);

    Kernel h = Kernel::zeros(space.atom_count(), q);
    // Pairs arrive grouped by sigma; reuse the identified tensor across A
    SetPartition const* last_sigma = nullptr;
    Kernel identified;
    auto pairs = enumerate_diagram_pairs(shape, q);
    for (auto const& pair : pairs)
    {
        if (!last_sigma || !(*last_sigma == pair.sigma))
        {
            identified = apply_partition(kernels, pair.sigma, shape);
            last_sigma = &pair.sigma;
        }
        auto keep = kept_blocks(pair);
        h += symmetrize(integrate_out(identified, keep, space), space);
    }
    return h;
}

double diagram_expectation(Shape const& shape,
                           std::span<Kernel const> kernels,
                           MeasureSpace const& space)
{
    require_kernels_match(shape, kernels, space);
    if (shape.all_zero())
    {
        double result = 1;
        for (auto const& f : kernels)
            result *= f.scalar_value();
        return result;
    }
    double result = 0;
    for (auto const& sigma : filter_geq2(enumerate_nonflat(shape)))
        result += integrate(apply_partition(kernels, sigma, shape), space);
    return result;
}

//---------------------------------------------------------------------------//
Kernel contraction(Kernel const& f, Kernel const& g, int r, int l, MeasureSpace const& space)
{
    int const k1 = f.order();
    int const k2 = g.order();
    if (l < 0 || l > r || r > std::min(k1, k2))
    {
        std::ostringstream msg;
        msg << "contraction needs 0 <= l <= r <= min(k1, k2); got r=" << r
            << ", l=" << l << ", k1=" << k1 << ", k2=" << k2;
        throw InvalidArgument(msg.str());
    }
    require_same_space(f, space);
    require_same_space(g, space);

    std::size_t const n = space.atom_count();
    int const shared = r - l;
    int const out_order = k1 + k2 - r - l;
    std::vector<double> values(checked_pow(n, out_order), 0.0);
    std::vector<Atom> fi(static_cast<std::size_t>(k1));
    std::vector<Atom> gi(static_cast<std::size_t>(k2));
    for_each_index(n, out_order, [&](std::span<Atom const> out, std::size_t flat) {
        // out = (y_1..y_{r-l}, t_1..t_{k1-r}, s_1..s_{k2-r})
        for (int j = 0; j < shared; ++j)
            fi[l + j] = gi[l + j] = out[j];
        for (int j = 0; j < k1 - r; ++j)
            fi[r + j] = out[shared + j];
        for (int j = 0; j < k2 - r; ++j)
            gi[r + j] = out[shared + (k1 - r) + j];
        double acc = 0;
        for_each_index(n, l, [&](std::span<Atom const> x, std::size_t) {
            double w = 1;
            for (int j = 0; j < l; ++j)
            {
                fi[j] = gi[j] = x[j];
                w *= space.weight(x[j]);
            }
            acc += f.at(fi) * g.at(gi) * w;
        });
        values[flat] = acc;
    });
    return Kernel(out_order == 0 ? 0 : n, out_order, std::move(values));
}

ChaosExpansion m2_product_kernels(Kernel const& f1, Kernel const& f2, MeasureSpace const& space)
{
    Shape shape({f1.order(), f2.order()});
    Kernel const& lo = f1.order() <= f2.order() ? f1 : f2;
    Kernel const& hi = f1.order() <= f2.order() ? f2 : f1;
    int const k1 = lo.order();
    int const k2 = hi.order();
    std::size_t const n = space.atom_count();

    ChaosExpansion result{shape, {}};
    result.kernels.reserve(static_cast<std::size_t>(k1 + k2 + 1));
    for (int q = 0; q <= k1 + k2; ++q)
        result.kernels.push_back(q == 0 ? Kernel::scalar(0) : Kernel::zeros(n, q));

    // Total "removed" order M = k1 + k2 - q runs over 0..2 k1
    for (int removed = 0; removed <= 2 * k1; ++removed)
    {
        int const q = k1 + k2 - removed;
        Kernel h = q == 0 ? Kernel::scalar(0) : Kernel::zeros(n, q);
        for (int r = (removed + 1) / 2; r <= std::min(removed, k1); ++r)
        {
            double coeff = static_cast<double>(factorial(r) * binomial(k1, r)
                                               * binomial(k2, r)
                                               * binomial(r, removed - r));
            Kernel c = contraction(lo, hi, r, removed - r, space);
            h += coeff * (q == 0 ? c : symmetrize(c, space));
        }
        result.kernels[static_cast<std::size_t>(q)] = std::move(h);
    }
    return result;
}

ChaosExpansion product_expansion(Shape const& shape,
                                 std::span<Kernel const> kernels,
                                 MeasureSpace const& space)
{
    require_kernels_match(shape, kernels, space);
    require_symmetric(kernels);
    ChaosExpansion result{shape, {}};
    result.kernels.push_back(Kernel::scalar(diagram_expectation(shape, kernels, space)));
    for (int q = 1; q <= shape.total_order(); ++q)
        result.kernels.push_back(product_kernel(q, shape, kernels, space));
    return result;
}

//---------------------------------------------------------------------------//
ConditionReport check_condition_A(Shape const& shape,
                                  std::span<Kernel const> kernels,
                                  MeasureSpace const& space)
{
    require_kernels_match(shape, kernels, space);
    ConditionReport report;
    if (shape.all_zero())
    {
        report.notes = "all orders zero";
        return report;
    }
    for (std::size_t i = 0; i < kernels.size(); ++i)
    {
        report.per_item.push_back(
            {"L1[f" + std::to_string(i + 1) + "]", lp_norm(kernels[i], 1, space)});
    }
    auto absolute = abs_all(kernels);
    for (auto const& sigma : enumerate_nonflat(shape))
    {
        report.per_item.push_back(
            {"sigma=" + sigma.to_string(),
             integrate(apply_partition(absolute, sigma, shape), space)});
    }
    for (auto const& item : report.per_item)
        report.satisfied = report.satisfied && std::isfinite(item.mass);
    return report;
}

Shape residual_shape(Word const& word, Shape const& shape)
{
    auto d = word.multiplicities(shape.factor_count());
    std::vector<int> orders(shape.factor_count());
    for (std::size_t i = 0; i < orders.size(); ++i)
    {
        orders[i] = shape.order(i) - d[i];
        if (orders[i] < 0)
            throw InvalidArgument("word is not restricted for the shape");
    }
    return Shape(std::move(orders));
}

std::vector<Kernel> residual_kernels(Word const& word,
                                     std::span<Atom const> points,
                                     std::span<Kernel const> kernels)
{
    if (points.size() != word.length())
        throw InvalidArgument("word length differs from the number of points");
    std::vector<Kernel> result;
    result.reserve(kernels.size());
    std::vector<Atom> fixed;
    for (std::size_t i = 0; i < kernels.size(); ++i)
    {
        fixed.clear();
        for (auto j : word.positions_of(i))
            fixed.push_back(points[j]);
        result.push_back(kernels[i].section(fixed));
    }
    return result;
}

ConditionReport check_condition_A_loc(Shape const& shape,
                                      std::span<Kernel const> kernels,
                                      MeasureSpace const& space)
{
    require_kernels_match(shape, kernels, space);
    for (int k : shape.orders())
    {
        if (k < 1)
            throw InvalidArgument("Condition A-(loc) needs all orders >= 1");
    }
    ConditionReport report;
    int const k_total = shape.total_order();
    std::size_t const n = space.atom_count();
    for (int q = 1; q < k_total; ++q)
    {
        for (auto const& word : enumerate_words(shape, q))
        {
            Shape rshape = residual_shape(word, shape);
            for_each_index(n, q, [&](std::span<Atom const> z, std::size_t) {
                auto residual = residual_kernels(word, z, kernels);
                auto inner = check_condition_A(rshape, residual, space);
                std::ostringstream id;
                id << "W=" << word.to_string() << " z=(";
                for (std::size_t j = 0; j < z.size(); ++j)
                    id << (j ? "," : "") << z[j];
                id << ')';
                report.per_item.push_back({id.str(), inner.max_mass()});
                report.satisfied = report.satisfied && inner.satisfied;
            });
        }
    }
    for (auto const& item : report.per_item)
        report.satisfied = report.satisfied && std::isfinite(item.mass);
    return report;
}

}  // namespace poischaos
