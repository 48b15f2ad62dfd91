#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "poischaos/chaos_kernels.hpp"
#include "poischaos/poisson_path.hpp"

namespace poischaos
{
//---------------------------------------------------------------------------//
enum class ExpectationMethod
{
    exact_truncated,
    monte_carlo
};

char const* to_string(ExpectationMethod method);

struct ExpectationResult
{
    double value{0};
    ExpectationMethod method{ExpectationMethod::exact_truncated};
    //! Poisson mass outside the enumerated box (exact only)
    double truncation_mass{0};
    //! Standard error of the mean (Monte Carlo only)
    double std_error{0};
    long samples{0};
    //! E[F^2] restricted to the box, or the sample second moment
    double second_moment{0};

    //! Cauchy-Schwarz bound on the mass left outside the box
    double truncation_slack() const;
};

struct ExpectationBudget
{
    std::size_t max_configurations{2'000'000};
};

//! Sum of F over all count vectors with entries <= n_max, Poisson-weighted
ExpectationResult exact_expectation(Functional const& F,
                                    MeasureSpace const& space,
                                    int n_max,
                                    ExpectationBudget budget = {});

//! Sample mean over configurations 0..samples-1 of the given stream
ExpectationResult mc_expectation(Functional const& F,
                                 MeasureSpace const& space,
                                 long samples,
                                 std::uint64_t seed,
                                 std::uint32_t stream = 0);

//---------------------------------------------------------------------------//
struct CheckRow
{
    std::string label;
    double expected{0};
    double actual{0};
    double discrepancy{0};
    double tolerance{0};
};

/*!
 * Verdict of one checker.
 *
 * Every row carries its own tolerance. The headline discrepancy and tolerance
 * are those of the row closest to (or furthest past) its limit, so that
 * passed holds exactly when max_discrepancy <= tolerance_used.
 */
struct CheckReport
{
    std::string check_name;
    bool passed{true};
    double max_discrepancy{0};
    double tolerance_used{0};
    std::vector<CheckRow> details;

    void add(CheckRow row);
};

//! Single-entry perturbation applied to the side a checker treats as claimed
struct Corruption
{
    //! h_q index for kernel checks, factor index for input kernels
    std::size_t target{1};
    std::size_t flat{0};
    double delta{1e-3};
};

struct CheckOptions
{
    double tolerance{1e-7};
    int n_max{16};
    long samples{100'000};
    std::uint64_t seed{0};
    std::optional<Corruption> corruption;
    ExpectationBudget budget;
};

//---------------------------------------------------------------------------//
//! h_q(z) against E[D^(q)_z Phi] / q! on every point tuple of the atom grid
CheckReport check_last_penrose(Shape const& shape,
                               std::span<Kernel const> kernels,
                               MeasureSpace const& space,
                               CheckOptions const& options);

/*!
 * h_q(z) against the word expansion of E[D^(q)_z Phi] / q!.
 *
 * Compares product_kernel, the exact expectation of the word sum, and the
 * deterministic sum over words of diagram expectations of the residual
 * kernels; for two factors the contraction closed form joins in.
 */
CheckReport check_word_formula(Shape const& shape,
                               std::span<Kernel const> kernels,
                               MeasureSpace const& space,
                               CheckOptions const& options);

//! Phi(eta) against h_0 + sum_q I_q(h_q)(eta) on sampled configurations
CheckReport check_product_identity(Shape const& shape,
                                   std::span<Kernel const> kernels,
                                   MeasureSpace const& space,
                                   CheckOptions const& options);

/*!
 * diagram_expectation against the exact expectation of Phi, and for single
 * integrals against the product-of-block-integrals form; for two factors
 * also against the isometry. A corruption hits f_target on the diagram side.
 */
CheckReport check_diagram_expectation(Shape const& shape,
                                      std::span<Kernel const> kernels,
                                      MeasureSpace const& space,
                                      CheckOptions const& options);

//! E[I_p(f) I_q(g)] against delta_pq q! <sym f, sym g>
CheckReport check_isometry(MeasureSpace const& space,
                           Kernel const& f,
                           Kernel const& g,
                           CheckOptions const& options);

/*!
 * Both p-Poincare inequalities, estimated by Monte Carlo.
 *
 * One report per exponent. Samples are shared across exponents. When F
 * carries an analytic add-one cost it is compared with the direct
 * difference on the first analytic_samples configurations.
 */
struct PoincareOptions
{
    long samples{100'000};
    std::uint64_t seed{0};
    double sigmas{4};
    long analytic_samples{1000};
    double analytic_tolerance{1e-8};
};

std::vector<CheckReport> check_poincare(Functional const& F,
                                        MeasureSpace const& space,
                                        std::span<double const> exponents,
                                        PoincareOptions const& options);

CheckReport check_poincare(Functional const& F,
                           MeasureSpace const& space,
                           double p,
                           PoincareOptions const& options);

//! Product functional whose analytic add-one cost uses corrupted kernels
Functional product_functional_with_corrupt_add_one(Shape const& shape,
                                                   std::span<Kernel const> kernels,
                                                   MeasureSpace const& space,
                                                   Corruption const& corruption);

//---------------------------------------------------------------------------//
struct GridSpec
{
    double T{10};
    double h{0.01};
};

struct WitnessRow
{
    double T{0};
    double h{0};
    std::size_t atoms{0};
    //! integral of |f1 f2 f3| on the diagonal
    double sigma_mass{0};
    //! L1 mass of f2 left free by the word ({1})
    double loc_mass{0};
    //! integral of |f1(z0) f2 f3| on the diagonal of the last two factors
    double section_mass{0};
};

struct WitnessTable
{
    std::vector<WitnessRow> rows;
    //! Only set when at least two truncations are given
    std::optional<bool> sigma_mass_increasing;
    std::optional<double> last_loc_change;
};

//! Condition A versus A-(loc) masses for f_i(v) = v^(1/2), mu = v^(-5/2) dv
WitnessTable divergence_witness(std::span<GridSpec const> truncations);

//! Discretization of (1, T] at midpoints with weights z^(-5/2) h
MeasureSpace witness_space(GridSpec const& spec);

}  // namespace poischaos
