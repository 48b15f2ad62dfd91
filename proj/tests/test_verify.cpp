#include <cmath>
#include <random>

#include "doctest.h"
#include "poischaos/errors.hpp"
#include "poischaos/verify.hpp"
#include "test_util.hpp"

using namespace poischaos;
using poischaos::test::make1;
using poischaos::test::random_kernels;
using poischaos::test::random_space;

namespace
{
void check_invariant(CheckReport const& r)
{
    CHECK(r.passed == (r.max_discrepancy <= r.tolerance_used));
    for (auto const& row : r.details)
    {
        if (row.discrepancy > row.tolerance)
            CHECK_FALSE(r.passed);
    }
}

CheckOptions exact_options(int n_max = 20)
{
    CheckOptions o;
    o.n_max = n_max;
    o.tolerance = 1e-8;
    return o;
}
}  // namespace

TEST_CASE("exact expectation")
{
    MeasureSpace unit({1.0, 1.0});
    auto c = exact_expectation(Functional::constant(2.5), unit, 20);
    CHECK(c.method == ExpectationMethod::exact_truncated);
    CHECK(c.value == doctest::Approx(2.5 * (1 - c.truncation_mass)).epsilon(1e-14));
    CHECK(c.value == doctest::Approx(2.5).epsilon(1e-14));
    CHECK(c.samples == 21 * 21);
    auto small = exact_expectation(Functional::constant(1), unit, 3);
    CHECK(small.truncation_mass > exact_expectation(Functional::constant(1), unit, 6).truncation_mass);

    Functional I1 = integral_functional(make1({0.7, -1.3}), unit);
    CHECK(std::fabs(exact_expectation(I1, unit, 20).value) < 1e-10);

    MeasureSpace lam({2.3});
    Functional sq([&](PointConfiguration const& cfg) {
        double v = multiple_integral(cfg, make1({1}), lam);
        return v * v;
    });
    CHECK(exact_expectation(sq, lam, 40).value == doctest::Approx(2.3).epsilon(1e-12));
    CHECK(exact_expectation(sq, lam, 5).value < 2.3);

    CHECK_THROWS_AS(exact_expectation(I1, MeasureSpace(std::vector<double>(8, 1.0)), 20),
                    ResourceLimit);
    CHECK_THROWS_AS(exact_expectation(I1, unit, -1), InvalidArgument);
}

TEST_CASE("Monte Carlo expectation")
{
    MeasureSpace space({1.0, 2.0});
    auto c = mc_expectation(Functional::constant(3), space, 100, 1);
    CHECK(c.value == 3);
    CHECK(c.std_error == 0);
    CHECK(c.method == ExpectationMethod::monte_carlo);

    Functional I1 = integral_functional(make1({1.0, -0.5}), space);
    auto m = mc_expectation(I1, space, 100'000, 9);
    CHECK(std::fabs(m.value) <= 4 * m.std_error);

    // counter-based draws: the first half of a longer run is the shorter run
    Functional count0([](PointConfiguration const& cfg) { return cfg.counts[0]; });
    auto half = mc_expectation(count0, space, 500, 4);
    auto full = mc_expectation(count0, space, 1000, 4);
    double second = 0;
    for (long i = 500; i < 1000; ++i)
        second += sample(space, 4, static_cast<std::uint64_t>(i)).counts[0];
    CHECK(full.value == doctest::Approx((half.value * 500 + second) / 1000).epsilon(1e-14));
    CHECK_THROWS_AS(mc_expectation(I1, space, 1, 0), InvalidArgument);
}

TEST_CASE("exact and Monte Carlo expectations agree")
{
    std::mt19937_64 rng(31);
    MeasureSpace space = random_space(rng, 2);
    auto f = random_kernels(rng, space, {1, 2});
    Functional phi = product_functional(Shape({1, 2}), f, space);
    Functional sq([&](PointConfiguration const& c) { return phi(c) * phi(c); });
    for (Functional const* F : {&phi, &sq})
    {
        auto e = exact_expectation(*F, space, 20);
        auto m = mc_expectation(*F, space, 50'000, 2);
        CHECK(std::fabs(e.value - m.value) <= 4 * m.std_error + e.truncation_slack());
    }
}

TEST_CASE("Last-Penrose check")
{
    std::mt19937_64 rng(32);
    MeasureSpace space = random_space(rng, 2);
    auto f = random_kernels(rng, space, {1, 1});
    auto report = check_last_penrose(Shape({1, 1}), f, space, exact_options());
    CHECK(report.passed);
    CHECK(report.max_discrepancy < 1e-8);
    CHECK(report.details.size() == 2 + 4);
    check_invariant(report);

    auto g = random_kernels(rng, space, {1, 1, 1});
    auto r3 = check_last_penrose(Shape({1, 1, 1}), g, space, exact_options());
    CHECK(r3.passed);
    Kernel sym = symmetrize(tensor_product(g), space);
    std::size_t flat = 0;
    for (auto const& row : r3.details)
    {
        if (row.label.rfind("h3", 0) == 0)
            CHECK(row.expected == doctest::Approx(sym[flat++]).epsilon(1e-12));
    }
    CHECK(flat == 8);

    auto options = exact_options();
    options.corruption = Corruption{1, 0, 1.0};
    auto bad = check_last_penrose(Shape({1, 1}), f, space, options);
    CHECK_FALSE(bad.passed);
    CHECK(bad.max_discrepancy == doctest::Approx(1).epsilon(1e-6));
    check_invariant(bad);
}

TEST_CASE("word formula check")
{
    std::mt19937_64 rng(33);
    MeasureSpace space = random_space(rng, 2);
    auto f = random_kernels(rng, space, {2, 1});
    auto report = check_word_formula(Shape({2, 1}), f, space, exact_options());
    CHECK(report.passed);
    CHECK(report.max_discrepancy < 1e-8);
    bool has_contraction = false;
    for (auto const& row : report.details)
        has_contraction = has_contraction || row.label.find("contraction") != std::string::npos;
    CHECK(has_contraction);

    auto g = random_kernels(rng, space, {1, 1, 1});
    CHECK(check_word_formula(Shape({1, 1, 1}), g, space, exact_options()).passed);

    auto options = exact_options();
    options.corruption = Corruption{2, 1, 1e-3};
    auto bad = check_word_formula(Shape({2, 1}), f, space, options);
    CHECK_FALSE(bad.passed);
    check_invariant(bad);
}

TEST_CASE("product identity check")
{
    std::mt19937_64 rng(34);
    MeasureSpace space = random_space(rng, 3);
    auto f = random_kernels(rng, space, {1, 1, 1});
    CheckOptions options;
    options.samples = 1000;
    options.tolerance = 1e-9;
    auto report = check_product_identity(Shape({1, 1, 1}), f, space, options);
    CHECK(report.passed);
    CHECK(report.details.size() == 1000);
    check_invariant(report);

    // factors with disjoint supports
    MeasureSpace four({1.0, 0.5, 1.5, 2.0});
    std::vector<Kernel> disjoint{make1({1, -1, 0, 0}), make1({0, 0, 2, 0.5})};
    CHECK(diagram_expectation(Shape({1, 1}), disjoint, four) == 0);
    CHECK(check_product_identity(Shape({1, 1}), disjoint, four, options).passed);

    options.corruption = Corruption{1, 0, 1e-3};
    auto bad = check_product_identity(Shape({1, 1, 1}), f, space, options);
    CHECK_FALSE(bad.passed);
    check_invariant(bad);
}

TEST_CASE("diagram expectation check")
{
    std::mt19937_64 rng(35);
    MeasureSpace space = random_space(rng, 2);
    auto f = random_kernels(rng, space, {2, 2});
    auto report = check_diagram_expectation(Shape({2, 2}), f, space, exact_options());
    CHECK(report.passed);
    bool iso = false;
    for (auto const& row : report.details)
    {
        if (row.label == "isometry")
        {
            iso = true;
            CHECK(row.expected == doctest::Approx(2 * inner_product(f[0], f[1], space)));
        }
    }
    CHECK(iso);

    auto g = random_kernels(rng, space, {1, 1, 1});
    CHECK(check_diagram_expectation(Shape({1, 1, 1}), g, space, exact_options()).passed);

    auto options = exact_options();
    options.corruption = Corruption{0, 0, 1e-3};
    CHECK_FALSE(check_diagram_expectation(Shape({2, 2}), f, space, options).passed);
}

TEST_CASE("isometry check")
{
    MeasureSpace one({1.0});
    auto r = check_isometry(one, make1({2}), make1({3}), exact_options(40));
    CHECK(r.passed);
    CHECK(r.details.front().expected == doctest::Approx(6).epsilon(1e-10));

    std::mt19937_64 rng(36);
    MeasureSpace space = random_space(rng, 2);
    Kernel f1 = test::random_symmetric(rng, space, 1);
    Kernel f2 = test::random_symmetric(rng, space, 2);
    auto cross = check_isometry(space, f1, f2, exact_options());
    CHECK(cross.passed);
    CHECK(cross.details.front().actual == 0);

    auto same = check_isometry(space, f2, f2, exact_options());
    CHECK(same.passed);
    CHECK(same.details.front().actual >= 0);

    Kernel f3 = test::random_symmetric(rng, space, 3);
    CHECK(check_isometry(space, f3, f3, exact_options()).passed);

    auto options = exact_options();
    options.corruption = Corruption{0, 1, 1e-3};
    CHECK_FALSE(check_isometry(space, f2, f2, options).passed);
    CHECK_THROWS_AS(check_isometry(space, Kernel::zeros(2, 4), f1, options), InvalidArgument);
}

TEST_CASE("Poincare inequalities")
{
    std::mt19937_64 rng(37);
    MeasureSpace space = random_space(rng, 2);
    PoincareOptions options;
    options.samples = 20'000;

    Functional I1 = integral_functional(test::random_symmetric(rng, space, 1), space);
    auto r = check_poincare(I1, space, 2.0, options);
    CHECK(r.passed);
    check_invariant(r);

    auto constant = check_poincare(Functional::constant(1.5), space, 1.0, options);
    CHECK(constant.passed);
    CHECK(constant.max_discrepancy == 0);

    MeasureSpace three = random_space(rng, 3);
    Shape shape({1, 1, 1});
    for (int trial = 0; trial < 3; ++trial)
    {
        auto f = random_kernels(rng, three, {1, 1, 1});
        double const ps[] = {1.0, 1.5, 2.0};
        for (auto const& report :
             check_poincare(product_functional(shape, f, three), three, ps, options))
        {
            CHECK(report.passed);
            CHECK(report.details.size() == 3);
        }
    }

    auto f = random_kernels(rng, three, {1, 1, 1});
    auto bad = product_functional_with_corrupt_add_one(shape, f, three, Corruption{0, 0, 1e-3});
    CHECK_FALSE(check_poincare(bad, three, 1.5, options).passed);
    CHECK_THROWS_AS(check_poincare(I1, space, 2.5, options), InvalidArgument);
}

TEST_CASE("divergence witness")
{
    std::vector<GridSpec> grids{{10, 0.01}, {100, 0.01}, {1000, 0.01}};
    auto table = divergence_witness(grids);
    REQUIRE(table.rows.size() == 3);
    REQUIRE(table.sigma_mass_increasing.has_value());
    CHECK(*table.sigma_mass_increasing);
    for (std::size_t i = 1; i < 3; ++i)
    {
        double const step = table.rows[i].sigma_mass - table.rows[i - 1].sigma_mass;
        CHECK(step == doctest::Approx(std::log(10.0)).epsilon(0.05));
    }
    CHECK(table.rows[2].loc_mass == doctest::Approx(1).epsilon(0.02));
    CHECK(table.rows[0].loc_mass < table.rows[2].loc_mass);
    CHECK(table.rows[2].atoms == 99'900);

    GridSpec single[] = {{10, 0.01}};
    auto one = divergence_witness(single);
    CHECK(one.rows.size() == 1);
    CHECK_FALSE(one.sigma_mass_increasing.has_value());
    CHECK_FALSE(one.last_loc_change.has_value());

    CHECK_THROWS_AS(witness_space({1.0, 0.1}), InvalidArgument);
}
