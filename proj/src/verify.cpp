#include "poischaos/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "poischaos/errors.hpp"

namespace poischaos
{
namespace
{
std::string tuple_label(char const* prefix, int q, std::span<Atom const> z)
{
    std::ostringstream out;
    out << prefix << q << "(";
    for (std::size_t j = 0; j < z.size(); ++j)
        out << (j ? "," : "") << z[j];
    out << ")";
    return out.str();
}

std::vector<double> poisson_pmf(double mean, int n_max)
{
    std::vector<double> pmf(static_cast<std::size_t>(n_max) + 1);
    pmf[0] = std::exp(-mean);
    for (int k = 1; k <= n_max; ++k)
        pmf[k] = pmf[k - 1] * mean / k;
    return pmf;
}

//! Row tolerance for an expectation-based comparison
double expectation_tolerance(double base, double scale, ExpectationResult const& e)
{
    return base * std::max(1.0, std::fabs(scale)) + e.truncation_slack();
}

ChaosExpansion corrupted_expansion(Shape const& shape,
                                   std::span<Kernel const> kernels,
                                   MeasureSpace const& space,
                                   std::optional<Corruption> const& corruption)
{
    ChaosExpansion e = product_expansion(shape, kernels, space);
    if (corruption)
    {
        auto const q = corruption->target;
        if (q >= e.kernels.size())
            throw InvalidArgument("corruption targets a kernel index past K");
        e.kernels[q] = e.kernels[q].perturbed(corruption->flat, corruption->delta);
    }
    return e;
}

std::vector<Kernel> corrupted_inputs(std::span<Kernel const> kernels,
                                     std::optional<Corruption> const& corruption)
{
    std::vector<Kernel> result(kernels.begin(), kernels.end());
    if (corruption)
    {
        if (corruption->target >= result.size())
            throw InvalidArgument("corruption targets a factor past m");
        auto& f = result[corruption->target];
        f = f.perturbed(corruption->flat, corruption->delta);
    }
    return result;
}
}  // namespace

//---------------------------------------------------------------------------//
char const* to_string(ExpectationMethod method)
{
    return method == ExpectationMethod::exact_truncated ? "exact-truncated"
                                                         : "monte-carlo";
}

double ExpectationResult::truncation_slack() const
{
    // |E[F 1_outside]| <= sqrt(P(outside)) sqrt(E F^2)
    if (method != ExpectationMethod::exact_truncated)
        return 0;
    return std::sqrt(truncation_mass) * (1 + std::sqrt(second_moment));
}

ExpectationResult exact_expectation(Functional const& F,
                                    MeasureSpace const& space,
                                    int n_max,
                                    ExpectationBudget budget)
{
    if (n_max < 0)
        throw InvalidArgument("n_max must be nonnegative");
    std::size_t const n = space.atom_count();
    std::size_t total = 1;
    for (std::size_t a = 0; a < n; ++a)
    {
        if (total > budget.max_configurations / (static_cast<std::size_t>(n_max) + 1))
        {
            std::ostringstream msg;
            msg << "exact expectation box (" << n_max + 1 << ")^" << n
                << " exceeds the budget of " << budget.max_configurations
                << " configurations";
            throw ResourceLimit(msg.str());
        }
        total *= static_cast<std::size_t>(n_max) + 1;
    }

    std::vector<std::vector<double>> pmf;
    double inside = 1;
    for (std::size_t a = 0; a < n; ++a)
    {
        pmf.push_back(poisson_pmf(space.weight(a), n_max));
        double mass = 0;
        for (double p : pmf.back())
            mass += p;
        inside *= std::min(mass, 1.0);
    }

    ExpectationResult result;
    result.method = ExpectationMethod::exact_truncated;
    result.truncation_mass = std::clamp(1.0 - inside, 0.0, 1.0);
    result.samples = static_cast<long>(total);

    PointConfiguration config;
    config.counts.assign(n, 0);
    double sum = 0;
    double sum_sq = 0;
    for (std::size_t visited = 0; visited < total; ++visited)
    {
        double w = 1;
        for (std::size_t a = 0; a < n; ++a)
            w *= pmf[a][config.counts[a]];
        double const v = F(config);
        sum += w * v;
        sum_sq += w * v * v;
        // odometer, last atom fastest
        for (std::size_t a = n; a-- > 0;)
        {
            if (++config.counts[a] <= n_max)
                break;
            config.counts[a] = 0;
        }
    }
    result.value = sum;
    result.second_moment = sum_sq;
    return result;
}

ExpectationResult mc_expectation(Functional const& F,
                                 MeasureSpace const& space,
                                 long samples,
                                 std::uint64_t seed,
                                 std::uint32_t stream)
{
    if (samples < 2)
        throw InvalidArgument("Monte Carlo needs at least two samples");
    // Welford for numerically stable variance, fixed summation order
    double mean = 0;
    double m2 = 0;
    double sum_sq = 0;
    for (long i = 0; i < samples; ++i)
    {
        double const v = F(sample(space, seed, static_cast<std::uint64_t>(i), stream));
        double const delta = v - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta * (v - mean);
        sum_sq += v * v;
    }
    ExpectationResult result;
    result.method = ExpectationMethod::monte_carlo;
    result.value = mean;
    result.samples = samples;
    double const variance = m2 / static_cast<double>(samples - 1);
    result.std_error = std::sqrt(variance / static_cast<double>(samples));
    result.second_moment = sum_sq / static_cast<double>(samples);
    return result;
}

//---------------------------------------------------------------------------//
void CheckReport::add(CheckRow row)
{
    bool const row_passed = row.discrepancy <= row.tolerance;
    auto ratio = [](double d, double t) {
        if (t > 0)
            return d / t;
        return d > 0 ? INFINITY : 0.0;
    };
    if (details.empty()
        || ratio(row.discrepancy, row.tolerance) > ratio(max_discrepancy, tolerance_used)
        || (!row_passed && passed))
    {
        max_discrepancy = row.discrepancy;
        tolerance_used = row.tolerance;
    }
    if (!std::isfinite(row.discrepancy))
        passed = false;
    passed = passed && row_passed;
    details.push_back(std::move(row));
}

//---------------------------------------------------------------------------//
CheckReport check_last_penrose(Shape const& shape,
                               std::span<Kernel const> kernels,
                               MeasureSpace const& space,
                               CheckOptions const& options)
{
    CheckReport report;
    report.check_name = "last_penrose";
    ChaosExpansion expansion = corrupted_expansion(shape, kernels, space, options.corruption);
    Functional const phi = product_functional(shape, kernels, space);
    std::size_t const n = space.atom_count();
    for (int q = 1; q <= shape.total_order(); ++q)
    {
        double const qf = static_cast<double>(factorial(q));
        Kernel const& h = expansion.h(q);
        for_each_index(n, q, [&](std::span<Atom const> z, std::size_t flat) {
            std::vector<Atom> points(z.begin(), z.end());
            Functional diff([&phi, points](PointConfiguration const& c) {
                return iterated_difference(phi, c, points);
            });
            auto e = exact_expectation(diff, space, options.n_max, options.budget);
            double const expected = e.value / qf;
            CheckRow row;
            row.label = tuple_label("h", q, z);
            row.expected = expected;
            row.actual = h[flat];
            row.discrepancy = std::fabs(row.actual - expected);
            row.tolerance = options.tolerance + e.truncation_slack() / qf;
            report.add(std::move(row));
        });
    }
    return report;
}

//---------------------------------------------------------------------------//
CheckReport check_word_formula(Shape const& shape,
                               std::span<Kernel const> kernels,
                               MeasureSpace const& space,
                               CheckOptions const& options)
{
    CheckReport report;
    report.check_name = "word_formula";
    ChaosExpansion expansion = corrupted_expansion(shape, kernels, space, options.corruption);
    std::optional<ChaosExpansion> closed;
    if (shape.factor_count() == 2 && shape.order(0) > 0 && shape.order(1) > 0)
        closed = m2_product_kernels(kernels[0], kernels[1], space);

    std::size_t const n = space.atom_count();
    for (int q = 1; q <= shape.total_order(); ++q)
    {
        double const qf = static_cast<double>(factorial(q));
        auto const words = enumerate_words(shape, q);
        for_each_index(n, q, [&](std::span<Atom const> z, std::size_t flat) {
            // deterministic double sum over words and residual diagrams
            double deterministic = 0;
            for (auto const& word : words)
            {
                auto d = word.multiplicities(shape.factor_count());
                double prefactor = 1;
                for (std::size_t i = 0; i < d.size(); ++i)
                    prefactor *= static_cast<double>(falling_factorial(shape.order(i), d[i]));
                auto residual = residual_kernels(word, z, kernels);
                deterministic += prefactor
                                 * diagram_expectation(residual_shape(word, shape),
                                                       residual, space);
            }
            deterministic /= qf;

            Functional words_fn = word_sum_functional(q, z, shape, kernels, space);
            auto e = exact_expectation(words_fn, space, options.n_max, options.budget);
            double const stochastic = e.value / qf;
            double const claimed = expansion.h(q)[flat];
            double const slack = e.truncation_slack() / qf;
            std::string const label = tuple_label("h", q, z);

            report.add({label + " kernel~deterministic", deterministic, claimed,
                        std::fabs(claimed - deterministic), options.tolerance});
            report.add({label + " kernel~expectation", stochastic, claimed,
                        std::fabs(claimed - stochastic), options.tolerance + slack});
            report.add({label + " deterministic~expectation", stochastic, deterministic,
                        std::fabs(deterministic - stochastic), options.tolerance + slack});
            if (closed)
            {
                double const c = closed->h(q)[flat];
                report.add({label + " kernel~contraction", c, claimed,
                            std::fabs(claimed - c), options.tolerance});
            }
        });
    }
    return report;
}

//---------------------------------------------------------------------------//
CheckReport check_product_identity(Shape const& shape,
                                   std::span<Kernel const> kernels,
                                   MeasureSpace const& space,
                                   CheckOptions const& options)
{
    CheckReport report;
    report.check_name = "product_identity";
    ChaosExpansion expansion = corrupted_expansion(shape, kernels, space, options.corruption);
    Functional const phi = product_functional(shape, kernels, space);
    std::vector<MultipleIntegral> chaos;
    for (int q = 1; q <= expansion.top_order(); ++q)
        chaos.emplace_back(expansion.h(q), space);

    for (long i = 0; i < options.samples; ++i)
    {
        auto const config = sample(space, options.seed, static_cast<std::uint64_t>(i));
        double const lhs = phi(config);
        double rhs = expansion.h0();
        double scale = std::fabs(expansion.h0());
        for (auto const& integral : chaos)
        {
            double const v = integral(config);
            rhs += v;
            scale += std::fabs(v);
        }
        scale = std::max({scale, std::fabs(lhs), 1e-12});
        std::ostringstream label;
        label << "sample " << i;
        report.add({label.str(), lhs, rhs, std::fabs(lhs - rhs) / scale, options.tolerance});
    }
    return report;
}

//---------------------------------------------------------------------------//
namespace
{
//! sum over partitions of [m] into blocks of size >= 2 of prod_b int prod_{i in b} f_i
double single_integral_moment(std::span<Kernel const> kernels, MeasureSpace const& space)
{
    int const m = static_cast<int>(kernels.size());
    double total = 0;
    for (auto const& pi : enumerate_partitions(m))
    {
        double term = 1;
        for (auto const& block : pi.blocks())
        {
            if (block.size() < 2)
            {
                term = 0;
                break;
            }
            double integral = 0;
            for (Atom a = 0; a < space.atom_count(); ++a)
            {
                double v = space.weight(a);
                for (int e : block)
                    v *= kernels[static_cast<std::size_t>(e - 1)][a];
                integral += v;
            }
            term *= integral;
        }
        total += term;
    }
    return total;
}
}  // namespace

CheckReport check_diagram_expectation(Shape const& shape,
                                      std::span<Kernel const> kernels,
                                      MeasureSpace const& space,
                                      CheckOptions const& options)
{
    CheckReport report;
    report.check_name = "diagram_expectation";
    require_kernels_match(shape, kernels, space);
    auto const claimed_kernels = corrupted_inputs(kernels, options.corruption);
    double const claimed = diagram_expectation(shape, claimed_kernels, space);

    auto e = exact_expectation(product_functional(shape, kernels, space), space,
                               options.n_max, options.budget);
    report.add({"exact", e.value, claimed, std::fabs(claimed - e.value),
                expectation_tolerance(options.tolerance, e.value, e)});

    bool const singles = std::all_of(shape.orders().begin(), shape.orders().end(),
                                     [](int k) { return k == 1; });
    if (singles)
    {
        double const blocks = single_integral_moment(kernels, space);
        report.add({"block-integrals", blocks, claimed, std::fabs(claimed - blocks),
                    options.tolerance * std::max(1.0, std::fabs(blocks))});
    }
    if (shape.factor_count() == 2)
    {
        int const k1 = shape.order(0);
        int const k2 = shape.order(1);
        double const iso = k1 == k2 ? static_cast<double>(factorial(k1))
                                          * inner_product(kernels[0], kernels[1], space)
                                    : 0.0;
        report.add({"isometry", iso, claimed, std::fabs(claimed - iso),
                    options.tolerance * std::max(1.0, std::fabs(iso))});
    }
    return report;
}

//---------------------------------------------------------------------------//
CheckReport check_isometry(MeasureSpace const& space,
                           Kernel const& f,
                           Kernel const& g,
                           CheckOptions const& options)
{
    if (f.order() > 3 || g.order() > 3)
        throw InvalidArgument("isometry check supports orders up to 3");
    CheckReport report;
    report.check_name = "isometry";
    require_same_space(f, space);
    require_same_space(g, space);
    MultipleIntegral const If(f, space);
    MultipleIntegral const Ig(g, space);
    Functional const product([&](PointConfiguration const& c) { return If(c) * Ig(c); });
    auto e = exact_expectation(product, space, options.n_max, options.budget);

    Kernel claimed_g = g;
    if (options.corruption)
        claimed_g = g.perturbed(options.corruption->flat, options.corruption->delta);
    double rhs = 0;
    if (f.order() == g.order())
    {
        rhs = static_cast<double>(factorial(f.order()))
              * inner_product(symmetrize(f, space), symmetrize(claimed_g, space), space);
    }
    std::ostringstream label;
    label << "E[I" << f.order() << " I" << g.order() << "]";
    report.add({label.str(), e.value, rhs, std::fabs(rhs - e.value),
                expectation_tolerance(options.tolerance, e.value, e)});
    return report;
}

//---------------------------------------------------------------------------//
namespace
{
struct Moments
{
    double mean{0};
    double std_error{0};
};

Moments moments(std::vector<double> const& v)
{
    double mean = 0;
    double m2 = 0;
    for (std::size_t i = 0; i < v.size(); ++i)
    {
        double const delta = v[i] - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta * (v[i] - mean);
    }
    double const count = static_cast<double>(v.size());
    return {mean, count > 1 ? std::sqrt(m2 / (count - 1) / count) : 0.0};
}
}  // namespace

std::vector<CheckReport> check_poincare(Functional const& F,
                                        MeasureSpace const& space,
                                        std::span<double const> exponents,
                                        PoincareOptions const& options)
{
    for (double p : exponents)
    {
        if (!(p >= 1 && p <= 2))
            throw InvalidArgument("Poincare exponent must lie in [1, 2]");
    }
    if (options.samples < 2)
        throw InvalidArgument("Poincare check needs at least two samples");
    std::size_t const n = space.atom_count();
    auto const count = static_cast<std::size_t>(options.samples);

    // Streams: 0 drives F and D F, 1 the independent copy F', 2 the centering
    std::vector<double> value(count);
    std::vector<double> copy(count);
    std::vector<double> centering(count);
    std::vector<double> diff(count * n);
    double analytic_gap = 0;
    std::size_t analytic_rows = 0;
    for (std::size_t i = 0; i < count; ++i)
    {
        auto const c = sample(space, options.seed, i, 0);
        double const fc = F(c);
        value[i] = fc;
        copy[i] = F(sample(space, options.seed, i, 1));
        centering[i] = F(sample(space, options.seed, i, 2));
        for (Atom z = 0; z < n; ++z)
        {
            double const d = F(c.plus(z)) - fc;
            diff[i * n + z] = d;
            if (F.has_analytic_add_one() && static_cast<long>(i) < options.analytic_samples)
            {
                double const a = F.analytic_add_one(c, z);
                double const scale = std::max({1.0, std::fabs(fc), std::fabs(d)});
                double const gap = std::fabs(a - d) / scale;
                ++analytic_rows;
                analytic_gap = std::max(analytic_gap, gap);
            }
        }
    }
    double const center = moments(centering).mean;
    Moments const mean_f = moments(value);

    std::vector<CheckReport> reports;
    std::vector<double> buffer(count);
    for (double p : exponents)
    {
        CheckReport report;
        std::ostringstream name;
        name << "poincare p=" << p;
        report.check_name = name.str();

        for (std::size_t i = 0; i < count; ++i)
            buffer[i] = std::pow(std::fabs(value[i] - copy[i]), p);
        Moments const lhs = moments(buffer);

        // integral of E|D_z F|^p mu(dz), as one sample per configuration
        for (std::size_t i = 0; i < count; ++i)
        {
            double s = 0;
            for (Atom z = 0; z < n; ++z)
                s += space.weight(z) * std::pow(std::fabs(diff[i * n + z]), p);
            buffer[i] = s;
        }
        Moments const gradient = moments(buffer);

        double const rhs = std::pow(2.0, 3 - p) * gradient.mean;
        double const se = std::hypot(lhs.std_error, std::pow(2.0, 3 - p) * gradient.std_error);
        report.add({"independent-copy", rhs, lhs.mean, lhs.mean - rhs, options.sigmas * se});

        for (std::size_t i = 0; i < count; ++i)
            buffer[i] = std::pow(std::fabs(value[i] - center), p);
        Moments const centered = moments(buffer);
        double const bias = std::pow(std::fabs(mean_f.mean - center), p);
        double const rhs2 = bias + std::pow(2.0, 2 - p) * gradient.mean;
        double const se2 = std::hypot(
            std::hypot(centered.std_error, std::pow(2.0, 2 - p) * gradient.std_error),
            p * std::pow(std::fabs(mean_f.mean - center), p - 1)
                * std::hypot(mean_f.std_error, moments(centering).std_error));
        report.add({"centered", rhs2, centered.mean, centered.mean - rhs2,
                    options.sigmas * se2});

        if (analytic_rows > 0)
        {
            std::ostringstream label;
            label << "analytic-add-one (" << analytic_rows << " points)";
            report.add({label.str(), 0, analytic_gap, analytic_gap, options.analytic_tolerance});
        }
        reports.push_back(std::move(report));
    }
    return reports;
}

CheckReport check_poincare(Functional const& F,
                           MeasureSpace const& space,
                           double p,
                           PoincareOptions const& options)
{
    double const exponents[] = {p};
    return check_poincare(F, space, exponents, options).front();
}

Functional product_functional_with_corrupt_add_one(Shape const& shape,
                                                   std::span<Kernel const> kernels,
                                                   MeasureSpace const& space,
                                                   Corruption const& corruption)
{
    Functional const honest = product_functional(shape, kernels, space);
    auto bad_kernels = corrupted_inputs(kernels, corruption);
    for (auto& f : bad_kernels)
        f = symmetrize(f, space);
    Functional const bad = product_functional(shape, bad_kernels, space);
    return honest.with_analytic_add_one(
        [bad](PointConfiguration const& c, Atom z) { return bad.analytic_add_one(c, z); });
}

//---------------------------------------------------------------------------//
MeasureSpace witness_space(GridSpec const& spec)
{
    if (!(spec.T > 1) || !(spec.h > 0))
        throw InvalidArgument("witness grid needs T > 1 and h > 0");
    auto const atoms = static_cast<std::size_t>(std::llround((spec.T - 1) / spec.h));
    if (atoms == 0)
        throw InvalidArgument("witness grid has no cells");
    std::vector<double> weights(atoms);
    for (std::size_t j = 0; j < atoms; ++j)
    {
        double const z = 1 + (static_cast<double>(j) + 0.5) * spec.h;
        weights[j] = std::pow(z, -2.5) * spec.h;
    }
    return MeasureSpace(std::move(weights));
}

WitnessTable divergence_witness(std::span<GridSpec const> truncations)
{
    WitnessTable table;
    for (auto const& spec : truncations)
    {
        MeasureSpace const space = witness_space(spec);
        std::size_t const n = space.atom_count();
        Kernel const f = Kernel::from_function(n, 1, [&](std::span<Atom const> z) {
            return std::sqrt(1 + (static_cast<double>(z[0]) + 0.5) * spec.h);
        });
        std::vector<Kernel> const kernels{f, f, f};
        Shape const shape({1, 1, 1});

        WitnessRow row;
        row.T = spec.T;
        row.h = spec.h;
        row.atoms = n;
        row.sigma_mass = integrate(
            abs(apply_partition(kernels, SetPartition(3, {{1, 2, 3}}), shape)), space);

        Word const first{{1u}};
        Atom const z0[] = {0};
        auto residual = residual_kernels(first, z0, kernels);
        row.loc_mass = lp_norm(residual[1], 1, space);
        row.section_mass = integrate(
            abs(apply_partition(residual, SetPartition(2, {{1, 2}}), residual_shape(first, shape))),
            space);
        table.rows.push_back(row);
    }
    if (table.rows.size() >= 2)
    {
        bool increasing = true;
        for (std::size_t i = 1; i < table.rows.size(); ++i)
            increasing = increasing && table.rows[i].sigma_mass > table.rows[i - 1].sigma_mass;
        table.sigma_mass_increasing = increasing;
        auto const& last = table.rows.back();
        auto const& prev = table.rows[table.rows.size() - 2];
        table.last_loc_change = std::fabs(last.loc_mass - prev.loc_mass) / last.loc_mass;
    }
    return table;
}

}  // namespace poischaos
