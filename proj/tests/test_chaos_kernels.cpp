#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "poischaos/chaos_kernels.hpp"
#include "poischaos/errors.hpp"
#include "test_util.hpp"

using namespace poischaos;
using poischaos::test::make1;
using poischaos::test::random_kernels;
using poischaos::test::random_space;

namespace
{
std::vector<std::vector<int>> small_shapes()
{
    return {{1, 1}, {1, 2}, {2, 1}, {2, 2}, {1, 1, 1}, {1, 1, 2}, {2, 1, 1},
            {1, 3}, {3, 1}, {2, 3}, {1, 1, 1, 1}};
}

double all_perm_average(std::size_t n,
                        std::span<Atom const> z,
                        std::function<double(std::span<Atom const>)> const& g)
{
    std::vector<Atom> perm(z.begin(), z.end());
    std::vector<std::size_t> order(z.size());
    std::iota(order.begin(), order.end(), 0);
    double sum = 0;
    double count = 0;
    (void)n;
    do
    {
        for (std::size_t j = 0; j < order.size(); ++j)
            perm[j] = z[order[j]];
        sum += g(perm);
        count += 1;
    } while (std::next_permutation(order.begin(), order.end()));
    return sum / count;
}
}  // namespace

TEST_CASE("apply_partition follows the identification examples")
{
    std::mt19937_64 rng(1);
    MeasureSpace space = random_space(rng, 3);
    SUBCASE("m=2, shape (1,2)")
    {
        auto f = random_kernels(rng, space, {1, 2});
        Shape shape({1, 2});
        Kernel g = apply_partition(f, SetPartition(3, {{1, 2}, {3}}), shape);
        for_each_index(3, 2, [&](std::span<Atom const> z, std::size_t flat) {
            Atom a[] = {z[0]};
            Atom b[] = {z[0], z[1]};
            CHECK(g[flat] == doctest::Approx(f[0].at(a) * f[1].at(b)));
        });
    }
    SUBCASE("m=3, shape (2,2,2)")
    {
        auto f = random_kernels(rng, space, {2, 2, 2});
        Shape shape({2, 2, 2});
        Kernel g = apply_partition(f, SetPartition(6, {{1, 3, 5}, {2}, {4, 6}}), shape);
        for_each_index(3, 3, [&](std::span<Atom const> z, std::size_t flat) {
            Atom a[] = {z[0], z[1]};
            Atom b[] = {z[0], z[2]};
            Atom c[] = {z[0], z[2]};
            CHECK(g[flat] == doctest::Approx(f[0].at(a) * f[1].at(b) * f[2].at(c)));
        });
    }
    SUBCASE("m=3, shape (2,0,2) with a scalar middle factor")
    {
        auto f = random_kernels(rng, space, {2, 0, 2});
        Shape shape({2, 0, 2});
        Kernel g = apply_partition(f, SetPartition(4, {{1, 3}, {2, 4}}), shape);
        for_each_index(3, 2, [&](std::span<Atom const> z, std::size_t flat) {
            Atom a[] = {z[0], z[1]};
            CHECK(g[flat]
                  == doctest::Approx(f[0].at(a) * f[1].scalar_value() * f[2].at(a)));
        });
    }
    SUBCASE("flat partitions are rejected")
    {
        auto f = random_kernels(rng, space, {2, 1});
        CHECK_THROWS_AS(apply_partition(f, SetPartition(3, {{1, 2}, {3}}), Shape({2, 1})),
                        InvalidArgument);
    }
}

TEST_CASE("apply_partition commutes with absolute values")
{
    std::mt19937_64 rng(2);
    MeasureSpace space = random_space(rng, 2);
    for (auto const& orders : small_shapes())
    {
        Shape shape(orders);
        auto f = random_kernels(rng, space, orders);
        std::vector<Kernel> absf;
        for (auto const& k : f)
            absf.push_back(abs(k));
        for (auto const& sigma : enumerate_nonflat(shape))
        {
            CHECK(max_abs_diff(apply_partition(absf, sigma, shape),
                               abs(apply_partition(f, sigma, shape)))
                  < 1e-15);
        }
    }
}

TEST_CASE("build_H on the three-factor figure pairs")
{
    std::mt19937_64 rng(4);
    MeasureSpace space = random_space(rng, 3);
    Shape shape({2, 2, 2});
    auto f = random_kernels(rng, space, {2, 2, 2});
    SetPartition sigma(6, {{1}, {2, 3, 6}, {4, 5}});
    auto F = [&](std::size_t i, Atom x, Atom y) {
        Atom idx[] = {x, y};
        return f[i].at(idx);
    };

    // A_1 = sigma>=2: nothing is integrated
    DiagramPair a1{sigma, {1, 2}};
    Kernel h1 = build_H(a1, shape, f, space);
    REQUIRE(h1.order() == 3);
    for_each_index(3, 3, [&](std::span<Atom const> z, std::size_t flat) {
        double expected = all_perm_average(3, z, [&](std::span<Atom const> p) {
            return F(0, p[0], p[1]) * F(1, p[1], p[2]) * F(2, p[2], p[1]);
        });
        CHECK(h1[flat] == doctest::Approx(expected).epsilon(1e-12));
    });

    // A_2 = {{2,3,6}}: the block {4,5} is integrated. The symmetrization over
    // two free variables carries a factor 1/2 in front of the two terms.
    DiagramPair a2{sigma, {1}};
    Kernel h2 = build_H(a2, shape, f, space);
    REQUIRE(h2.order() == 2);
    for_each_index(3, 2, [&](std::span<Atom const> z, std::size_t flat) {
        double integral = 0;
        for (Atom v = 0; v < 3; ++v)
        {
            integral += space.weight(v)
                        * (F(0, z[0], z[1]) * F(1, z[1], v) * F(2, v, z[1])
                           + F(0, z[1], z[0]) * F(1, z[0], v) * F(2, v, z[0]));
        }
        CHECK(h2[flat] == doctest::Approx(0.5 * integral).epsilon(1e-12));
    });

    // Minimal partition gives the symmetrized tensor product
    DiagramPair minimal{SetPartition::minimal(6), {}};
    CHECK(max_abs_diff(build_H(minimal, shape, f, space),
                       symmetrize(tensor_product(f), space))
          < 1e-14);
}

TEST_CASE("product_kernel closed forms for single integrals")
{
    std::mt19937_64 rng(6);
    MeasureSpace space = random_space(rng, 3);
    SUBCASE("m = 2")
    {
        auto f = random_kernels(rng, space, {1, 1});
        Shape shape({1, 1});
        Kernel h1 = product_kernel(1, shape, f, space);
        for (Atom a = 0; a < 3; ++a)
            CHECK(h1[a] == doctest::Approx(f[0][a] * f[1][a]));
        CHECK(max_abs_diff(product_kernel(2, shape, f, space),
                           symmetrize(tensor_product(f), space))
              < 1e-15);
        CHECK_THROWS_AS(product_kernel(0, shape, f, space), InvalidArgument);
        CHECK_THROWS_AS(product_kernel(3, shape, f, space), InvalidArgument);
    }
    SUBCASE("m = 3")
    {
        auto f = random_kernels(rng, space, {1, 1, 1});
        Shape shape({1, 1, 1});
        double i23 = inner_product(f[1], f[2], space);
        double i13 = inner_product(f[0], f[2], space);
        double i12 = inner_product(f[0], f[1], space);
        Kernel h1 = product_kernel(1, shape, f, space);
        for (Atom a = 0; a < 3; ++a)
        {
            double expected = f[0][a] * f[1][a] * f[2][a] + f[0][a] * i23
                              + f[1][a] * i13 + f[2][a] * i12;
            CHECK(h1[a] == doctest::Approx(expected).epsilon(1e-12));
        }
        auto pointwise = [&](Kernel const& a, Kernel const& b) {
            return Kernel::from_function(3, 1, [&](auto z) { return a[z[0]] * b[z[0]]; });
        };
        Kernel expected2 = symmetrize(
            tensor_product({pointwise(f[0], f[1]), f[2]})
                + tensor_product({pointwise(f[0], f[2]), f[1]})
                + tensor_product({pointwise(f[1], f[2]), f[0]}),
            space);
        CHECK(max_abs_diff(product_kernel(2, shape, f, space), expected2) < 1e-14);
    }
}

TEST_CASE("top-order kernel is the symmetrized tensor product")
{
    std::mt19937_64 rng(8);
    for (auto const& orders : small_shapes())
    {
        MeasureSpace space = random_space(rng, 2);
        Shape shape(orders);
        auto f = random_kernels(rng, space, orders);
        CHECK(max_abs_diff(product_kernel(shape.total_order(), shape, f, space),
                           symmetrize(tensor_product(f), space))
              <= 1e-12);
    }
}

TEST_CASE("diagram_expectation")
{
    MeasureSpace one({1.0});
    std::vector<Kernel> f{make1({2}), make1({3})};
    CHECK(diagram_expectation(Shape({1, 1}), f, one) == doctest::Approx(6));

    std::mt19937_64 rng(9);
    MeasureSpace space = random_space(rng, 3);
    CHECK(diagram_expectation(Shape({1, 2}), random_kernels(rng, space, {1, 2}), space)
          == 0);

    auto g = random_kernels(rng, space, {1, 1, 1});
    double direct = 0;
    for (Atom a = 0; a < 3; ++a)
        direct += g[0][a] * g[1][a] * g[2][a] * space.weight(a);
    CHECK(diagram_expectation(Shape({1, 1, 1}), g, space) == doctest::Approx(direct));

    std::vector<Kernel> scalars{Kernel::scalar(2), Kernel::scalar(-3)};
    CHECK(diagram_expectation(Shape({0, 0}), scalars, space) == -6);
}

TEST_CASE("two-factor expectation reduces to the isometry")
{
    std::mt19937_64 rng(10);
    for (int k1 = 1; k1 <= 3; ++k1)
    {
        for (int k2 = 1; k2 <= 3; ++k2)
        {
            MeasureSpace space = random_space(rng, 2);
            auto f = random_kernels(rng, space, {k1, k2});
            double expected = k1 == k2 ? static_cast<double>(factorial(k1))
                                             * inner_product(f[0], f[1], space)
                                       : 0.0;
            CHECK(diagram_expectation(Shape({k1, k2}), f, space)
                  == doctest::Approx(expected).epsilon(1e-12));
        }
    }
}

TEST_CASE("contraction")
{
    std::mt19937_64 rng(12);
    MeasureSpace space = random_space(rng, 3);
    Kernel f = test::random_symmetric(rng, space, 1);
    Kernel g = test::random_symmetric(rng, space, 1);
    Kernel full = contraction(f, g, 1, 1, space);
    CHECK(full.order() == 0);
    CHECK(full.scalar_value() == doctest::Approx(inner_product(f, g, space)));
    CHECK(max_abs_diff(contraction(f, g, 0, 0, space), tensor_product({f, g})) == 0);

    MeasureSpace unit({1.0, 1.0});
    Kernel s(2, 2, {1, 2, 2, 1});
    Kernel c = contraction(s, s, 1, 1, unit);
    REQUIRE(c.order() == 2);
    CHECK(c[0] == 5);
    CHECK(c[1] == 1 * 2 + 2 * 1);

    CHECK_THROWS_AS(contraction(f, g, 2, 0, space), InvalidArgument);
    CHECK_THROWS_AS(contraction(f, g, 0, 1, space), InvalidArgument);
}

TEST_CASE("contraction closed form for two factors")
{
    std::mt19937_64 rng(13);
    SUBCASE("two single integrals")
    {
        MeasureSpace space = random_space(rng, 3);
        auto f = random_kernels(rng, space, {1, 1});
        auto e = m2_product_kernels(f[0], f[1], space);
        CHECK(e.h0() == doctest::Approx(inner_product(f[0], f[1], space)));
        for (Atom a = 0; a < 3; ++a)
            CHECK(e.h(1)[a] == doctest::Approx(f[0][a] * f[1][a]));
        CHECK(max_abs_diff(e.h(2), symmetrize(tensor_product(f), space)) < 1e-15);
    }
    SUBCASE("disjoint supports")
    {
        MeasureSpace space({1.0, 2.0, 0.5, 1.5});
        Kernel f1 = make1({1.0, -2.0, 0, 0});
        Kernel f2 = make1({0, 0, 0.5, 3.0});
        auto e = m2_product_kernels(f1, f2, space);
        CHECK(e.h0() == 0);
        CHECK(max_abs_diff(e.h(1), Kernel::zeros(4, 1)) == 0);
        CHECK(max_abs_diff(e.h(2), symmetrize(tensor_product({f1, f2}), space)) == 0);
    }
    SUBCASE("agrees with the partition sum for k1, k2 <= 3, n <= 3")
    {
        for (int k1 = 1; k1 <= 3; ++k1)
        {
            for (int k2 = 1; k2 <= 3; ++k2)
            {
                for (std::size_t n = 1; n <= 3; ++n)
                {
                    if (n == 3 && k1 + k2 > 5)
                        continue;  // keeps the permutation sums cheap
                    MeasureSpace space = random_space(rng, n);
                    auto f = random_kernels(rng, space, {k1, k2});
                    auto closed = m2_product_kernels(f[0], f[1], space);
                    auto general = product_expansion(Shape({k1, k2}), f, space);
                    REQUIRE(closed.top_order() == general.top_order());
                    CHECK(std::fabs(closed.h0() - general.h0()) < 1e-10);
                    for (int q = 1; q <= k1 + k2; ++q)
                        CHECK(max_abs_diff(closed.h(q), general.h(q)) < 1e-10);
                    // h_q vanishes below k2 - k1
                    for (int q = 1; q < std::abs(k2 - k1); ++q)
                        CHECK(max_abs_diff(closed.h(q), Kernel::zeros(n, q)) == 0);
                }
            }
        }
    }
}

TEST_CASE("build_H is invariant under relabeling the factors")
{
    std::mt19937_64 rng(14);
    MeasureSpace space = random_space(rng, 2);
    std::vector<int> orders{1, 2, 1};
    Shape shape(orders);
    auto f = random_kernels(rng, space, orders);

    // New factor order (f3, f1, f2): positions 0 | 1 2 | 3 move to 1 | 2 3 | 0
    std::vector<int> new_orders{1, 1, 2};
    Shape new_shape(new_orders);
    std::vector<Kernel> g{f[2], f[0], f[1]};
    int const move[] = {2, 3, 4, 1};  // 1-based element e -> move[e-1]

    for (int q = 0; q <= shape.total_order(); ++q)
    {
        for (auto const& pair : enumerate_diagram_pairs(shape, q))
        {
            std::vector<SetPartition::Block> blocks;
            for (auto const& b : pair.sigma.blocks())
            {
                SetPartition::Block nb;
                for (int e : b)
                    nb.push_back(move[e - 1]);
                blocks.push_back(nb);
            }
            SetPartition sigma2(4, blocks);
            DiagramPair moved{sigma2, {}};
            for (auto j : pair.chosen)
                moved.chosen.push_back(sigma2.block_of(move[pair.sigma.block(j)[0] - 1]));
            std::sort(moved.chosen.begin(), moved.chosen.end());
            Kernel a = build_H(pair, shape, f, space);
            Kernel b = build_H(moved, new_shape, g, space);
            CHECK(max_abs_diff(a, b) < 1e-14);
        }
    }
}

TEST_CASE("Condition A and its localized version")
{
    std::mt19937_64 rng(15);
    MeasureSpace space = random_space(rng, 2);
    for (auto const& orders : small_shapes())
    {
        Shape shape(orders);
        auto f = random_kernels(rng, space, orders);
        auto a = check_condition_A(shape, f, space);
        CHECK(a.satisfied);
        CHECK(a.per_item.size() == f.size() + enumerate_nonflat(shape).size());
        for (auto const& item : a.per_item)
            CHECK(std::isfinite(item.mass));
        auto loc = check_condition_A_loc(shape, f, space);
        CHECK(loc.satisfied);
        CHECK_FALSE(loc.per_item.empty());
    }

    std::vector<Kernel> scalars{Kernel::scalar(1), Kernel::scalar(2)};
    auto zero = check_condition_A(Shape({0, 0}), scalars, space);
    CHECK(zero.satisfied);
    CHECK(zero.per_item.empty());

    auto f = random_kernels(rng, space, {0, 1});
    CHECK_THROWS_AS(check_condition_A_loc(Shape({0, 1}), f, space), InvalidArgument);
}

TEST_CASE("condition masses use absolute values")
{
    MeasureSpace space({1.0, 1.0});
    std::vector<Kernel> f{make1({1, -1}), make1({1, 1})};
    auto report = check_condition_A(Shape({1, 1}), f, space);
    // sigma = {{1,2}}: int |f1 f2| = 2 while int f1 f2 = 0
    bool found = false;
    for (auto const& item : report.per_item)
    {
        if (item.id == "sigma={{1,2}}")
        {
            CHECK(item.mass == 2);
            found = true;
        }
    }
    CHECK(found);
}

TEST_CASE("product_expansion requires symmetric kernels of the right order")
{
    MeasureSpace space({1.0, 2.0});
    Kernel asym(2, 2, {1, 2, 3, 4});
    std::vector<Kernel> f{asym, make1({1, 1})};
    CHECK_THROWS_AS(product_expansion(Shape({2, 1}), f, space), InvalidArgument);
    CHECK_THROWS_AS(product_expansion(Shape({1, 1}), f, space), OrderMismatch);
}
