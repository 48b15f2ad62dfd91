#include "poischaos/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "poischaos/errors.hpp"

namespace poischaos
{
//---------------------------------------------------------------------------//
MeasureSpace::MeasureSpace(std::vector<double> weights)
    : weights_(std::move(weights))
{
    if (weights_.empty())
    {
        throw InvalidArgument("measure space needs at least one atom");
    }
    for (std::size_t a = 0; a < weights_.size(); ++a)
    {
        double w = weights_[a];
        if (!(w > 0) || !std::isfinite(w))
        {
            std::ostringstream msg;
            msg << "atom " << a << " has weight " << w
                << "; weights must be finite and strictly positive";
            throw InvalidArgument(msg.str());
        }
        total_mass_ += w;
    }
}

//---------------------------------------------------------------------------//
Shape::Shape(std::vector<int> orders) : orders_(std::move(orders))
{
    if (orders_.empty())
    {
        throw InvalidArgument("shape needs at least one factor");
    }
    offsets_.reserve(orders_.size());
    for (int k : orders_)
    {
        if (k < 0)
        {
            throw InvalidArgument("shape orders must be nonnegative");
        }
        offsets_.push_back(total_);
        total_ += k;
    }
}

std::size_t Shape::owner(int pos) const
{
    if (pos < 0 || pos >= total_)
    {
        throw InvalidArgument("tensor position outside shape");
    }
    auto it = std::upper_bound(offsets_.begin(), offsets_.end(), pos);
    // Skip back over zero-order factors sharing the same offset
    std::size_t i = static_cast<std::size_t>(it - offsets_.begin()) - 1;
    while (orders_[i] == 0)
    {
        --i;
    }
    return i;
}

//---------------------------------------------------------------------------//
std::size_t checked_pow(std::size_t base, int exponent)
{
    std::size_t result = 1;
    for (int i = 0; i < exponent; ++i)
    {
        if (base != 0
            && result > std::numeric_limits<std::size_t>::max() / base)
        {
            throw ResourceLimit("tensor extent overflows");
        }
        result *= base;
    }
    return result;
}

void for_each_index(
    std::size_t atoms,
    int order,
    std::function<void(std::span<Atom const>, std::size_t)> const& visit)
{
    std::vector<Atom> idx(static_cast<std::size_t>(order), 0);
    std::size_t const total = checked_pow(atoms, order);
    for (std::size_t flat = 0; flat < total; ++flat)
    {
        visit(idx, flat);
        for (int j = order - 1; j >= 0; --j)
        {
            if (++idx[j] < atoms)
                break;
            idx[j] = 0;
        }
    }
}

//---------------------------------------------------------------------------//
Kernel::Kernel(std::size_t atoms,
               int order,
               std::vector<double> values,
               bool symmetric)
    : atoms_(atoms), order_(order), values_(std::move(values))
{
    if (order_ < 0)
    {
        throw InvalidArgument("kernel order must be nonnegative");
    }
    if (values_.size() != checked_pow(atoms_, order_))
    {
        std::ostringstream msg;
        msg << "order-" << order_ << " kernel on " << atoms_ << " atoms needs "
            << checked_pow(atoms_, order_) << " values, got " << values_.size();
        throw InvalidArgument(msg.str());
    }
    for (double v : values_)
    {
        if (!std::isfinite(v))
            throw InvalidArgument("kernel entries must be finite");
    }
    symmetric_ = symmetric || order_ <= 1;
}

Kernel Kernel::scalar(double value)
{
    return Kernel(0, 0, {value}, true);
}

Kernel Kernel::zeros(std::size_t atoms, int order)
{
    return Kernel(atoms, order,
                  std::vector<double>(checked_pow(atoms, order), 0.0), true);
}

Kernel Kernel::from_function(
    std::size_t atoms,
    int order,
    std::function<double(std::span<Atom const>)> const& fn)
{
    std::vector<double> values(checked_pow(atoms, order));
    for_each_index(atoms, order, [&](std::span<Atom const> idx, std::size_t flat) {
        values[flat] = fn(idx);
    });
    return Kernel(atoms, order, std::move(values));
}

std::size_t Kernel::flat_index(std::span<Atom const> idx) const
{
    if (idx.size() != static_cast<std::size_t>(order_))
    {
        throw InvalidArgument("index tuple length differs from kernel order");
    }
    std::size_t flat = 0;
    for (Atom a : idx)
    {
        if (a >= atoms_)
            throw InvalidArgument("atom index out of range");
        flat = flat * atoms_ + a;
    }
    return flat;
}

double Kernel::at(std::span<Atom const> idx) const
{
    return values_[this->flat_index(idx)];
}

double Kernel::scalar_value() const
{
    if (order_ != 0)
    {
        throw OrderMismatch("scalar_value requires an order-0 kernel");
    }
    return values_.front();
}

Kernel Kernel::section(std::span<Atom const> fixed) const
{
    int const d = static_cast<int>(fixed.size());
    if (d > order_)
    {
        throw InvalidArgument("cannot fix more arguments than the kernel has");
    }
    std::size_t base = 0;
    for (Atom a : fixed)
    {
        if (a >= atoms_)
            throw InvalidArgument("atom index out of range");
        base = base * atoms_ + a;
    }
    std::size_t const extent = checked_pow(atoms_, order_ - d);
    base *= extent;
    std::vector<double> values(values_.begin() + static_cast<std::ptrdiff_t>(base),
                               values_.begin()
                                   + static_cast<std::ptrdiff_t>(base + extent));
    return Kernel(order_ - d == 0 ? 0 : atoms_, order_ - d, std::move(values),
                  symmetric_);
}

Kernel Kernel::perturbed(std::size_t flat, double delta) const
{
    if (flat >= values_.size())
        throw InvalidArgument("perturbation entry out of range");
    Kernel result = *this;
    result.values_[flat] += delta;
    result.symmetric_ = order_ <= 1;
    return result;
}

Kernel& Kernel::mark_symmetric(double tolerance)
{
    double dev = asymmetry(*this);
    if (dev > tolerance)
    {
        std::ostringstream msg;
        msg << "kernel is not symmetric (max deviation " << dev << ")";
        throw InvalidArgument(msg.str());
    }
    symmetric_ = true;
    return *this;
}

Kernel& Kernel::operator+=(Kernel const& other)
{
    if (other.order_ != order_ || other.values_.size() != values_.size())
    {
        throw OrderMismatch("cannot add kernels of different order or extent");
    }
    for (std::size_t i = 0; i < values_.size(); ++i)
        values_[i] += other.values_[i];
    symmetric_ = symmetric_ && other.symmetric_;
    return *this;
}

Kernel& Kernel::operator*=(double factor)
{
    for (double& v : values_)
        v *= factor;
    return *this;
}

Kernel operator+(Kernel lhs, Kernel const& rhs)
{
    lhs += rhs;
    return lhs;
}

Kernel operator*(double factor, Kernel f)
{
    f *= factor;
    return f;
}

Kernel abs(Kernel f)
{
    std::vector<double> values(f.values().begin(), f.values().end());
    for (double& v : values)
        v = std::fabs(v);
    return Kernel(f.atom_count(), f.order(), std::move(values), f.is_symmetric());
}

//---------------------------------------------------------------------------//
bool approx_equal(double a, double b, Tolerance tol)
{
    double diff = std::fabs(a - b);
    return diff <= std::max(tol.abs, tol.rel * std::max(std::fabs(a), std::fabs(b)));
}

double max_abs_diff(Kernel const& a, Kernel const& b)
{
    if (a.order() != b.order() || a.size() != b.size())
    {
        throw OrderMismatch("cannot compare kernels of different order or extent");
    }
    double result = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        result = std::max(result, std::fabs(a[i] - b[i]));
    return result;
}

namespace
{
//! Visit the flat offset of f(idx o p) for every idx, for a fixed permutation
template<class F>
void for_each_permuted(Kernel const& f, std::span<int const> perm, F&& visit)
{
    int const k = f.order();
    std::size_t const n = f.atom_count();
    std::vector<std::size_t> stride(static_cast<std::size_t>(k), 1);
    for (int j = k - 2; j >= 0; --j)
        stride[j] = stride[j + 1] * n;
    // Argument j of the permuted call reads idx[perm[j]], so idx[i] scales
    // by the stride of the slot j with perm[j] == i.
    std::vector<std::size_t> weight(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j)
        weight[perm[j]] = stride[j];
    for_each_index(n, k, [&](std::span<Atom const> idx, std::size_t flat) {
        std::size_t src = 0;
        for (int i = 0; i < k; ++i)
            src += idx[i] * weight[i];
        visit(flat, src);
    });
}
}  // namespace

double asymmetry(Kernel const& f)
{
    if (f.order() <= 1)
        return 0;
    std::vector<int> perm(static_cast<std::size_t>(f.order()));
    std::iota(perm.begin(), perm.end(), 0);
    double dev = 0;
    while (std::next_permutation(perm.begin(), perm.end()))
    {
        for_each_permuted(f, perm, [&](std::size_t flat, std::size_t src) {
            dev = std::max(dev, std::fabs(f[flat] - f[src]));
        });
    }
    return dev;
}

//---------------------------------------------------------------------------//
void require_same_space(Kernel const& f, MeasureSpace const& space)
{
    if (f.order() > 0 && f.atom_count() != space.atom_count())
    {
        std::ostringstream msg;
        msg << "kernel defined on " << f.atom_count()
            << " atoms used with a space of " << space.atom_count() << " atoms";
        throw InvalidArgument(msg.str());
    }
}

Kernel symmetrize(Kernel const& f, MeasureSpace const& space, SymmetrizeLimits limits)
{
    require_same_space(f, space);
    if (f.order() <= 1)
        return f;
    if (f.order() > limits.max_order)
    {
        std::ostringstream msg;
        msg << "symmetrization of order " << f.order() << " exceeds the cap of "
            << limits.max_order;
        throw ResourceLimit(msg.str());
    }
    std::vector<double> acc(f.size(), 0.0);
    std::vector<int> perm(static_cast<std::size_t>(f.order()));
    std::iota(perm.begin(), perm.end(), 0);
    double count = 0;
    do
    {
        for_each_permuted(f, perm, [&](std::size_t flat, std::size_t src) {
            acc[flat] += f[src];
        });
        count += 1;
    } while (std::next_permutation(perm.begin(), perm.end()));
    for (double& v : acc)
        v /= count;
    return Kernel(f.atom_count(), f.order(), std::move(acc), true);
}

Kernel tensor_product(std::span<Kernel const> kernels)
{
    std::size_t atoms = 0;
    for (auto const& f : kernels)
    {
        if (f.order() == 0)
            continue;
        if (atoms != 0 && f.atom_count() != atoms)
            throw InvalidArgument("tensor factors live on different spaces");
        atoms = f.atom_count();
    }
    std::vector<double> values{1.0};
    int order = 0;
    for (auto const& f : kernels)
    {
        std::vector<double> next;
        next.reserve(values.size() * f.size());
        for (double v : values)
        {
            for (double w : f.values())
                next.push_back(v * w);
        }
        values = std::move(next);
        order += f.order();
    }
    bool symmetric = order <= 1;
    return Kernel(order == 0 ? 0 : atoms, order, std::move(values), symmetric);
}

Kernel tensor_product(std::initializer_list<Kernel> kernels)
{
    return tensor_product(std::span<Kernel const>(kernels.begin(), kernels.size()));
}

Kernel integrate_out(Kernel const& f, std::span<int const> keep, MeasureSpace const& space)
{
    require_same_space(f, space);
    int const k = f.order();
    std::vector<bool> kept(static_cast<std::size_t>(k), false);
    for (int pos : keep)
    {
        if (pos < 0 || pos >= k || kept[pos])
            throw InvalidArgument("invalid or repeated kept argument");
        kept[pos] = true;
    }
    int const out_order = static_cast<int>(keep.size());
    std::size_t const n = space.atom_count();
    std::vector<double> out(checked_pow(n, out_order), 0.0);
    for_each_index(n, k, [&](std::span<Atom const> idx, std::size_t flat) {
        double w = 1;
        for (int j = 0; j < k; ++j)
        {
            if (!kept[j])
                w *= space.weight(idx[j]);
        }
        std::size_t dst = 0;
        for (int pos : keep)
            dst = dst * n + idx[pos];
        out[dst] += f[flat] * w;
    });
    return Kernel(out_order == 0 ? 0 : n, out_order, std::move(out));
}

double integrate(Kernel const& f, MeasureSpace const& space)
{
    return integrate_out(f, {}, space).scalar_value();
}

double inner_product(Kernel const& f, Kernel const& g, MeasureSpace const& space)
{
    if (f.order() != g.order())
    {
        std::ostringstream msg;
        msg << "inner product of incompatible kernel orders " << f.order()
            << " and " << g.order();
        throw OrderMismatch(msg.str());
    }
    require_same_space(f, space);
    require_same_space(g, space);
    double result = 0;
    std::size_t const n = space.atom_count();
    for_each_index(n, f.order(), [&](std::span<Atom const> idx, std::size_t flat) {
        double w = 1;
        for (Atom a : idx)
            w *= space.weight(a);
        result += f[flat] * g[flat] * w;
    });
    return result;
}

double lp_norm(Kernel const& f, double p, MeasureSpace const& space)
{
    if (!(p >= 1))
        throw InvalidArgument("lp_norm requires p >= 1");
    require_same_space(f, space);
    double sum = 0;
    for_each_index(space.atom_count(), f.order(),
                   [&](std::span<Atom const> idx, std::size_t flat) {
                       double w = 1;
                       for (Atom a : idx)
                           w *= space.weight(a);
                       sum += std::pow(std::fabs(f[flat]), p) * w;
                   });
    return std::pow(sum, 1 / p);
}

}  // namespace poischaos
