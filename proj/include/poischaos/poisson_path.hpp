#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "poischaos/combinat.hpp"
#include "poischaos/measure.hpp"

namespace poischaos
{
//---------------------------------------------------------------------------//
//! Realization of the Poisson measure: number of points on each atom
struct PointConfiguration
{
    std::vector<int> counts;

    std::size_t atom_count() const { return counts.size(); }
    long total() const;
    PointConfiguration plus(Atom z) const;
    bool operator==(PointConfiguration const&) const = default;
};

struct PathLimits
{
    long max_total_count{64};
};

//---------------------------------------------------------------------------//
/*!
 * Draw independent Poisson counts with means equal to the atom weights.
 *
 * The draw for atom a is a pure function of (seed, index, a, stream): the
 * configuration with a given index is identical no matter how many others
 * are drawn or in which order. Distinct streams are independent.
 */
PointConfiguration sample(MeasureSpace const& space,
                          std::uint64_t seed,
                          std::uint64_t index = 0,
                          std::uint32_t stream = 0);

//---------------------------------------------------------------------------//
/*!
 * Pathwise evaluator for the multiple integral I_q(f).
 *
 * Uses the factorial-measure expansion
 *   I_q(f) = sum_j C(q,j) (-1)^(q-j) int f d(eta^(j) x mu^(q-j)),
 * valid for symmetric f. The mu-marginals are precomputed once so that each
 * evaluation only sums over ordered tuples of distinct points.
 */
class MultipleIntegral
{
  public:
    MultipleIntegral(Kernel const& f, MeasureSpace const& space, PathLimits limits = {});

    int order() const { return order_; }
    double operator()(PointConfiguration const& config) const;

  private:
    int order_{0};
    std::size_t atoms_{0};
    PathLimits limits_;
    //! marginals_[j]: f with its last q - j arguments integrated against mu
    std::vector<Kernel> marginals_;
};

double multiple_integral(PointConfiguration const& config,
                         Kernel const& f,
                         MeasureSpace const& space);

//---------------------------------------------------------------------------//
/*!
 * A Poisson functional F = f(eta) evaluable on configurations.
 *
 * Optionally carries an analytic representation of its add-one cost, used
 * by checkers to cross-validate the direct difference.
 */
class Functional
{
  public:
    using Eval = std::function<double(PointConfiguration const&)>;
    using AddOne = std::function<double(PointConfiguration const&, Atom)>;

    explicit Functional(Eval eval, AddOne analytic_add_one = {});

    double operator()(PointConfiguration const& config) const { return eval_(config); }
    bool has_analytic_add_one() const { return static_cast<bool>(add_one_); }
    double analytic_add_one(PointConfiguration const& config, Atom z) const;

    Functional with_analytic_add_one(AddOne add_one) const;

    static Functional constant(double c);

  private:
    Eval eval_;
    AddOne add_one_;
};

//! F(eta + delta_z) - F(eta)
double add_one_cost(Functional const& F, PointConfiguration const& config, Atom z);

//! D^(q)_{z_1..z_q} F via the alternating sum over subsets of the points
double iterated_difference(Functional const& F,
                           PointConfiguration const& config,
                           std::span<Atom const> points);

//! I_q(f) as a functional; non-symmetric kernels are symmetrized first
Functional integral_functional(Kernel const& f, MeasureSpace const& space);

/*!
 * Phi = prod_i I_{k_i}(f_i).
 *
 * The attached analytic add-one cost expands D_z Phi through the product
 * rule and the derivative formula D_z I_k(f) = k I_{k-1}(f(z, .)).
 */
Functional product_functional(Shape const& shape,
                              std::span<Kernel const> kernels,
                              MeasureSpace const& space);

//---------------------------------------------------------------------------//
// Word-indexed iterated differences of a product
//---------------------------------------------------------------------------//
//! prod_i (k_i)_(d_i) I_{k_i - d_i}(f_i(z_{q(i)}, .)) evaluated on config
double word_term(PointConfiguration const& config,
                 Word const& word,
                 std::span<Atom const> points,
                 Shape const& shape,
                 std::span<Kernel const> kernels,
                 MeasureSpace const& space);

//! Same quantity by composing add-one costs letter by letter
double word_term_by_differences(PointConfiguration const& config,
                                Word const& word,
                                std::span<Atom const> points,
                                Shape const& shape,
                                std::span<Kernel const> kernels,
                                MeasureSpace const& space);

//! Sum of word_term over all restricted words of length q, as a functional
Functional word_sum_functional(int q,
                               std::span<Atom const> points,
                               Shape const& shape,
                               std::span<Kernel const> kernels,
                               MeasureSpace const& space);

double word_sum(PointConfiguration const& config,
                int q,
                Shape const& shape,
                std::span<Kernel const> kernels,
                MeasureSpace const& space,
                std::span<Atom const> points);

}  // namespace poischaos
