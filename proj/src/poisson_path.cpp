#include "poischaos/poisson_path.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "poischaos/chaos_kernels.hpp"
#include "poischaos/errors.hpp"
#include "poischaos/philox.hpp"

namespace poischaos
{
//---------------------------------------------------------------------------//
long PointConfiguration::total() const
{
    return std::accumulate(counts.begin(), counts.end(), 0L);
}

PointConfiguration PointConfiguration::plus(Atom z) const
{
    if (z >= counts.size())
        throw InvalidArgument("atom index out of range");
    PointConfiguration result = *this;
    ++result.counts[z];
    return result;
}

//---------------------------------------------------------------------------//
namespace
{
// Means above this are split into independent chunks, each sampled by
// sequential-search inversion; the sum of independent Poisson counts is
// Poisson with the summed mean.
constexpr double kChunkMean = 30.0;

int poisson_by_inversion(double mean, double u)
{
    double p = std::exp(-mean);
    double cdf = p;
    int k = 0;
    while (u > cdf)
    {
        ++k;
        p *= mean / k;
        cdf += p;
        if (p < 1e-300 && k > mean)
            break;
    }
    return k;
}
}  // namespace

PointConfiguration sample(MeasureSpace const& space,
                          std::uint64_t seed,
                          std::uint64_t index,
                          std::uint32_t stream)
{
    if (stream >= (1u << 16))
        throw InvalidArgument("stream id must fit in 16 bits");
    Philox4x32 const rng(seed);
    PointConfiguration config;
    config.counts.resize(space.atom_count());
    for (Atom a = 0; a < space.atom_count(); ++a)
    {
        double remaining = space.weight(a);
        int count = 0;
        for (std::uint32_t chunk = 0; remaining > 0; ++chunk)
        {
            double const mean = std::min(remaining, kChunkMean);
            remaining -= mean;
            Philox4x32::Counter ctr{static_cast<std::uint32_t>(index),
                                    static_cast<std::uint32_t>(index >> 32),
                                    static_cast<std::uint32_t>(a),
                                    (stream << 16) | (chunk / 2)};
            auto out = rng(ctr);
            double u = chunk % 2 == 0 ? Philox4x32::to_unit(out[0], out[1])
                                      : Philox4x32::to_unit(out[2], out[3]);
            count += poisson_by_inversion(mean, u);
        }
        config.counts[a] = count;
    }
    return config;
}

//---------------------------------------------------------------------------//
MultipleIntegral::MultipleIntegral(Kernel const& f, MeasureSpace const& space, PathLimits limits)
    : order_(f.order()), atoms_(space.atom_count()), limits_(limits)
{
    require_same_space(f, space);
    Kernel sym = f.is_symmetric() ? f : symmetrize(f, space);
    marginals_.resize(static_cast<std::size_t>(order_) + 1);
    marginals_[order_] = sym;
    for (int j = order_ - 1; j >= 0; --j)
    {
        std::vector<int> keep(static_cast<std::size_t>(j));
        std::iota(keep.begin(), keep.end(), 0);
        marginals_[j] = integrate_out(marginals_[j + 1], keep, space);
    }
}

double MultipleIntegral::operator()(PointConfiguration const& config) const
{
    if (order_ == 0)
        return marginals_[0].scalar_value();
    if (config.atom_count() != atoms_)
        throw InvalidArgument("configuration and kernel live on different spaces");
    if (config.total() > limits_.max_total_count)
    {
        std::ostringstream msg;
        msg << "configuration holds " << config.total()
            << " points, above the cap of " << limits_.max_total_count;
        throw ResourceLimit(msg.str());
    }

    std::vector<Atom> support;
    for (Atom a = 0; a < atoms_; ++a)
    {
        if (config.counts[a] > 0)
            support.push_back(a);
    }
    std::vector<int> remaining(config.counts);

    // Sum of g(a_1..a_j) over ordered tuples of distinct points: choosing atom
    // a at step t contributes the number of its still-unused points.
    auto factorial_sum = [&](auto&& self, Kernel const& g, int depth, int j,
                             std::size_t flat) -> double {
        if (depth == j)
            return g[flat];
        double acc = 0;
        for (Atom a : support)
        {
            int const r = remaining[a];
            if (r == 0)
                continue;
            --remaining[a];
            acc += r * self(self, g, depth + 1, j, flat * atoms_ + a);
            ++remaining[a];
        }
        return acc;
    };

    double result = 0;
    for (int j = 0; j <= order_; ++j)
    {
        double term = j == 0 ? marginals_[0].scalar_value()
                             : factorial_sum(factorial_sum, marginals_[j], 0, j, 0);
        double coeff = static_cast<double>(binomial(order_, j));
        result += ((order_ - j) % 2 == 0 ? coeff : -coeff) * term;
    }
    return result;
}

double multiple_integral(PointConfiguration const& config,
                         Kernel const& f,
                         MeasureSpace const& space)
{
    return MultipleIntegral(f, space)(config);
}

//---------------------------------------------------------------------------//
Functional::Functional(Eval eval, AddOne analytic_add_one)
    : eval_(std::move(eval)), add_one_(std::move(analytic_add_one))
{
    if (!eval_)
        throw InvalidArgument("functional needs an evaluator");
}

double Functional::analytic_add_one(PointConfiguration const& config, Atom z) const
{
    if (!add_one_)
        throw InvalidArgument("functional carries no analytic add-one cost");
    return add_one_(config, z);
}

Functional Functional::with_analytic_add_one(AddOne add_one) const
{
    return Functional(eval_, std::move(add_one));
}

Functional Functional::constant(double c)
{
    return Functional([c](PointConfiguration const&) { return c; },
                      [](PointConfiguration const&, Atom) { return 0.0; });
}

double add_one_cost(Functional const& F, PointConfiguration const& config, Atom z)
{
    return F(config.plus(z)) - F(config);
}

double iterated_difference(Functional const& F,
                           PointConfiguration const& config,
                           std::span<Atom const> points)
{
    std::size_t const q = points.size();
    if (q >= 31)
        throw ResourceLimit("iterated difference of order above 30");
    for (Atom z : points)
    {
        if (z >= config.atom_count())
            throw InvalidArgument("atom index out of range");
    }
    double result = 0;
    PointConfiguration shifted = config;
    for (std::uint32_t subset = 0; subset < (1u << q); ++subset)
    {
        shifted.counts = config.counts;
        int size = 0;
        for (std::size_t i = 0; i < q; ++i)
        {
            if (subset >> i & 1u)
            {
                ++shifted.counts[points[i]];
                ++size;
            }
        }
        double v = F(shifted);
        result += (static_cast<int>(q) - size) % 2 == 0 ? v : -v;
    }
    return result;
}

Functional integral_functional(Kernel const& f, MeasureSpace const& space)
{
    MultipleIntegral integral(f, space);
    return Functional([integral](PointConfiguration const& c) { return integral(c); });
}

Functional product_functional(Shape const& shape,
                              std::span<Kernel const> kernels,
                              MeasureSpace const& space)
{
    require_kernels_match(shape, kernels, space);
    std::size_t const n = space.atom_count();
    std::vector<MultipleIntegral> factors;
    // derivatives[i * n + z] evaluates k_i I_{k_i - 1}(f_i(z, .))
    std::vector<MultipleIntegral> derivatives;
    std::vector<double> scale;
    for (std::size_t i = 0; i < kernels.size(); ++i)
    {
        Kernel sym = kernels[i].is_symmetric() ? kernels[i]
                                               : symmetrize(kernels[i], space);
        factors.emplace_back(sym, space);
        scale.push_back(shape.order(i));
        for (Atom z = 0; z < n; ++z)
        {
            if (sym.order() == 0)
            {
                derivatives.emplace_back(Kernel::scalar(0), space);
                continue;
            }
            Atom const fixed[] = {z};
            derivatives.emplace_back(sym.section(fixed), space);
        }
    }

    auto eval = [factors](PointConfiguration const& c) {
        double result = 1;
        for (auto const& integral : factors)
            result *= integral(c);
        return result;
    };
    auto add_one = [factors, derivatives, scale, n](PointConfiguration const& c,
                                                    Atom z) {
        // prod_i (F_i + D_z F_i) - prod_i F_i
        double with = 1;
        double without = 1;
        for (std::size_t i = 0; i < factors.size(); ++i)
        {
            double const value = factors[i](c);
            double const derivative = scale[i] == 0
                                          ? 0.0
                                          : scale[i] * derivatives[i * n + z](c);
            with *= value + derivative;
            without *= value;
        }
        return with - without;
    };
    return Functional(eval, add_one);
}

//---------------------------------------------------------------------------//
namespace
{
void require_word_fits(Word const& word,
                       std::span<Atom const> points,
                       Shape const& shape)
{
    if (word.length() != points.size())
    {
        std::ostringstream msg;
        msg << "word of length " << word.length() << " paired with "
            << points.size() << " points";
        throw InvalidArgument(msg.str());
    }
    if (!word.is_restricted(shape))
    {
        throw InvalidArgument("word " + word.to_string()
                              + " is not restricted for the shape");
    }
}

//! Falling-factorial prefactor and residual integrals of one word
struct WordTermEvaluator
{
    double prefactor{1};
    std::vector<MultipleIntegral> residuals;

    double operator()(PointConfiguration const& config) const
    {
        double result = prefactor;
        for (auto const& integral : residuals)
        {
            if (result == 0)
                break;
            result *= integral(config);
        }
        return result;
    }
};

WordTermEvaluator make_word_term(Word const& word,
                                 std::span<Atom const> points,
                                 Shape const& shape,
                                 std::span<Kernel const> kernels,
                                 MeasureSpace const& space)
{
    require_word_fits(word, points, shape);
    require_kernels_match(shape, kernels, space);
    auto d = word.multiplicities(shape.factor_count());
    WordTermEvaluator term;
    for (std::size_t i = 0; i < kernels.size(); ++i)
        term.prefactor *= static_cast<double>(falling_factorial(shape.order(i), d[i]));
    for (auto const& residual : residual_kernels(word, points, kernels))
        term.residuals.emplace_back(residual, space);
    return term;
}
}  // namespace

double word_term(PointConfiguration const& config,
                 Word const& word,
                 std::span<Atom const> points,
                 Shape const& shape,
                 std::span<Kernel const> kernels,
                 MeasureSpace const& space)
{
    return make_word_term(word, points, shape, kernels, space)(config);
}

double word_term_by_differences(PointConfiguration const& config,
                                Word const& word,
                                std::span<Atom const> points,
                                Shape const& shape,
                                std::span<Kernel const> kernels,
                                MeasureSpace const& space)
{
    require_word_fits(word, points, shape);
    require_kernels_match(shape, kernels, space);
    // Applying D^{A_1}_{z_1} ... D^{A_q}_{z_q} to (F_1..F_m) leaves in slot i
    // the iterated difference of F_i at the points whose letters contain i.
    double result = 1;
    for (std::size_t i = 0; i < kernels.size(); ++i)
    {
        Functional F = integral_functional(kernels[i], space);
        std::vector<Atom> own;
        for (auto j : word.positions_of(i))
            own.push_back(points[j]);
        result *= own.empty() ? F(config) : iterated_difference(F, config, own);
    }
    return result;
}

Functional word_sum_functional(int q,
                               std::span<Atom const> points,
                               Shape const& shape,
                               std::span<Kernel const> kernels,
                               MeasureSpace const& space)
{
    if (static_cast<int>(points.size()) != q)
        throw InvalidArgument("word_sum needs exactly q points");
    std::vector<WordTermEvaluator> terms;
    for (auto const& word : enumerate_words(shape, q))
        terms.push_back(make_word_term(word, points, shape, kernels, space));
    return Functional([terms = std::move(terms)](PointConfiguration const& c) {
        double result = 0;
        for (auto const& term : terms)
            result += term(c);
        return result;
    });
}

double word_sum(PointConfiguration const& config,
                int q,
                Shape const& shape,
                std::span<Kernel const> kernels,
                MeasureSpace const& space,
                std::span<Atom const> points)
{
    return word_sum_functional(q, points, shape, kernels, space)(config);
}

}  // namespace poischaos
