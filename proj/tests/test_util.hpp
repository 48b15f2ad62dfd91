#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "poischaos/measure.hpp"

namespace poischaos::test
{
//! Symmetric kernel with entries uniform in [lo, hi] before symmetrization
inline Kernel random_symmetric(std::mt19937_64& rng,
                               MeasureSpace const& space,
                               int order,
                               double lo = -1,
                               double hi = 1)
{
    std::uniform_real_distribution<double> dist(lo, hi);
    if (order == 0)
        return Kernel::scalar(dist(rng));
    Kernel raw = Kernel::from_function(space.atom_count(), order,
                                       [&](auto) { return dist(rng); });
    return symmetrize(raw, space);
}

inline std::vector<Kernel> random_kernels(std::mt19937_64& rng,
                                          MeasureSpace const& space,
                                          std::vector<int> const& orders)
{
    std::vector<Kernel> result;
    for (int k : orders)
        result.push_back(random_symmetric(rng, space, k));
    return result;
}

inline MeasureSpace random_space(std::mt19937_64& rng, std::size_t atoms)
{
    std::uniform_real_distribution<double> dist(0.5, 1.5);
    std::vector<double> w(atoms);
    for (auto& x : w)
        x = dist(rng);
    return MeasureSpace(w);
}

inline Kernel make1(std::vector<double> v)
{
    auto n = v.size();
    return Kernel(n, 1, std::move(v));
}

inline Kernel make2(std::size_t n, std::vector<double> v, bool symmetric = false)
{
    return Kernel(n, 2, std::move(v), symmetric);
}

}  // namespace poischaos::test
