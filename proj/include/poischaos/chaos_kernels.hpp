#pragma once

#include <span>
#include <string>
#include <vector>

#include "poischaos/combinat.hpp"
#include "poischaos/measure.hpp"

namespace poischaos
{
//---------------------------------------------------------------------------//
/*!
 * Finite chaos expansion h_0, h_1, ..., h_K of a product of integrals.
 *
 * kernels[q] has order q; kernels[0] is the scalar h_0 = E[product].
 */
struct ChaosExpansion
{
    Shape shape;
    std::vector<Kernel> kernels;

    double h0() const { return kernels.front().scalar_value(); }
    Kernel const& h(int q) const { return kernels.at(static_cast<std::size_t>(q)); }
    int top_order() const { return static_cast<int>(kernels.size()) - 1; }
};

struct ConditionItem
{
    std::string id;
    double mass{0};
};

//! Integrability masses behind Condition A or its localized version
struct ConditionReport
{
    bool satisfied{true};
    std::vector<ConditionItem> per_item;
    std::string notes;

    double max_mass() const;
};

//! Throws unless orders match the shape and every kernel lives on `space`
void require_kernels_match(Shape const& shape,
                           std::span<Kernel const> kernels,
                           MeasureSpace const& space);

/*!
 * Identify tensor-product arguments along the blocks of a non-flat partition.
 *
 * Block j of sigma (canonical order) becomes argument j of the result.
 * Order-zero factors enter as multiplicative constants.
 */
Kernel apply_partition(std::span<Kernel const> kernels,
                       SetPartition const& sigma,
                       Shape const& shape);

/*!
 * H(sigma, A; f_1, ..., f_m).
 *
 * Identify variables along sigma, integrate the big blocks outside A against
 * the measure, then symmetrize over the surviving variables. Survivors are
 * labeled by increasing minimum block element before symmetrization.
 */
Kernel build_H(DiagramPair const& pair,
               Shape const& shape,
               std::span<Kernel const> kernels,
               MeasureSpace const& space);

//! h_q: sum of H over every diagram pair with |A| + |sigma_1| = q
Kernel product_kernel(int q,
                      Shape const& shape,
                      std::span<Kernel const> kernels,
                      MeasureSpace const& space);

//! E[prod I_{k_i}(f_i)] as a sum over partitions with all blocks of size >= 2
double diagram_expectation(Shape const& shape,
                           std::span<Kernel const> kernels,
                           MeasureSpace const& space);

/*!
 * Contraction sharing r arguments of f and g, l of which are integrated.
 *
 * Result arguments are (shared free, f's remaining, g's remaining).
 */
Kernel contraction(Kernel const& f,
                   Kernel const& g,
                   int r,
                   int l,
                   MeasureSpace const& space);

//! Chaos kernels of I_{k1}(f1) I_{k2}(f2) through the contraction closed form
ChaosExpansion m2_product_kernels(Kernel const& f1,
                                  Kernel const& f2,
                                  MeasureSpace const& space);

//! All kernels h_0..h_K of the product
ChaosExpansion product_expansion(Shape const& shape,
                                 std::span<Kernel const> kernels,
                                 MeasureSpace const& space);

ConditionReport check_condition_A(Shape const& shape,
                                  std::span<Kernel const> kernels,
                                  MeasureSpace const& space);

ConditionReport check_condition_A_loc(Shape const& shape,
                                      std::span<Kernel const> kernels,
                                      MeasureSpace const& space);

//! Kernels f_i(z_{q(i)}, .) obtained by fixing the arguments a word assigns
std::vector<Kernel> residual_kernels(Word const& word,
                                     std::span<Atom const> points,
                                     std::span<Kernel const> kernels);
Shape residual_shape(Word const& word, Shape const& shape);

}  // namespace poischaos
