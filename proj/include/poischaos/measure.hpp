#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

namespace poischaos
{
using Atom = std::size_t;

//---------------------------------------------------------------------------//
/*!
 * Finite discrete measure: a list of atoms carrying strictly positive mass.
 *
 * This is the intensity of the Poisson measure and the reference measure for
 * every kernel integral in the library.
 */
class MeasureSpace
{
  public:
    explicit MeasureSpace(std::vector<double> weights);

    std::size_t atom_count() const { return weights_.size(); }
    double weight(Atom a) const { return weights_[a]; }
    std::span<double const> weights() const { return weights_; }
    double total_mass() const { return total_mass_; }

  private:
    std::vector<double> weights_;
    double total_mass_{0};
};

//---------------------------------------------------------------------------//
/*!
 * Orders (k_1, ..., k_m) of the factors in a product of multiple integrals.
 *
 * Zero entries are allowed and denote scalar factors.
 */
class Shape
{
  public:
    explicit Shape(std::vector<int> orders);

    std::size_t factor_count() const { return orders_.size(); }
    int order(std::size_t i) const { return orders_[i]; }
    std::span<int const> orders() const { return orders_; }
    //! K = k_1 + ... + k_m
    int total_order() const { return total_; }
    //! First tensor position (0-based) occupied by factor i
    int offset(std::size_t i) const { return offsets_[i]; }
    //! Factor owning tensor position `pos` (0-based)
    std::size_t owner(int pos) const;
    bool all_zero() const { return total_ == 0; }

    bool operator==(Shape const&) const = default;

  private:
    std::vector<int> orders_;
    std::vector<int> offsets_;
    int total_{0};
};

//---------------------------------------------------------------------------//
/*!
 * Dense real tensor of order k over the atoms {0, ..., n-1}.
 *
 * Values are row-major with the first argument most significant. Order zero
 * holds a single scalar. The symmetric flag certifies invariance under all
 * argument permutations; it is set by construction routines that guarantee
 * it (e.g. symmetrize) and never inferred.
 */
class Kernel
{
  public:
    Kernel() : Kernel(scalar(0.0)) {}
    Kernel(std::size_t atoms, int order, std::vector<double> values,
           bool symmetric = false);

    static Kernel scalar(double value);
    static Kernel zeros(std::size_t atoms, int order);
    static Kernel
    from_function(std::size_t atoms,
                  int order,
                  std::function<double(std::span<Atom const>)> const& fn);

    int order() const { return order_; }
    std::size_t atom_count() const { return atoms_; }
    std::size_t size() const { return values_.size(); }
    bool is_symmetric() const { return symmetric_; }

    std::span<double const> values() const { return values_; }
    double operator[](std::size_t flat) const { return values_[flat]; }
    double at(std::span<Atom const> idx) const;
    double scalar_value() const;

    std::size_t flat_index(std::span<Atom const> idx) const;

    //! Fix the leading arguments: returns (a...) -> f(fixed..., a...)
    Kernel section(std::span<Atom const> fixed) const;

    //! Copy with one entry changed by `delta` (symmetry flag dropped)
    Kernel perturbed(std::size_t flat, double delta) const;

    //! Certify symmetry after an exhaustive check; throws if not symmetric
    Kernel& mark_symmetric(double tolerance = 0.0);

    Kernel& operator+=(Kernel const& other);
    Kernel& operator*=(double factor);

  private:
    std::size_t atoms_{0};
    int order_{0};
    std::vector<double> values_;
    bool symmetric_{false};
};

Kernel operator+(Kernel lhs, Kernel const& rhs);
Kernel operator*(double factor, Kernel f);
Kernel abs(Kernel f);

//---------------------------------------------------------------------------//
// Numeric comparison
//---------------------------------------------------------------------------//
struct Tolerance
{
    double rel{1e-9};
    double abs{1e-12};
};

bool approx_equal(double a, double b, Tolerance tol = {});
double max_abs_diff(Kernel const& a, Kernel const& b);
//! Largest deviation |f(p(idx)) - f(idx)| over all indices and permutations
double asymmetry(Kernel const& f);

//---------------------------------------------------------------------------//
// Index iteration
//---------------------------------------------------------------------------//
std::size_t checked_pow(std::size_t base, int exponent);

/*!
 * Visit every index tuple in row-major order.
 *
 * The callback receives the tuple and its flat offset.
 */
void for_each_index(std::size_t atoms,
                    int order,
                    std::function<void(std::span<Atom const>, std::size_t)> const&
                        visit);

//---------------------------------------------------------------------------//
// Kernel algebra
//---------------------------------------------------------------------------//
struct SymmetrizeLimits
{
    int max_order{8};
};

Kernel symmetrize(Kernel const& f,
                  MeasureSpace const& space,
                  SymmetrizeLimits limits = {});

Kernel tensor_product(std::span<Kernel const> kernels);
Kernel tensor_product(std::initializer_list<Kernel> kernels);

double integrate(Kernel const& f, MeasureSpace const& space);
double inner_product(Kernel const& f, Kernel const& g, MeasureSpace const& space);
double lp_norm(Kernel const& f, double p, MeasureSpace const& space);

/*!
 * Integrate out a subset of arguments against the measure.
 *
 * `keep` lists the argument positions that survive, in the order they
 * appear in the result; every other position is integrated.
 */
Kernel integrate_out(Kernel const& f,
                     std::span<int const> keep,
                     MeasureSpace const& space);

void require_same_space(Kernel const& f, MeasureSpace const& space);

}  // namespace poischaos
