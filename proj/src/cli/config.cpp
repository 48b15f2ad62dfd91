#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "json_io.hpp"
#include "poischaos/cli.hpp"
#include "poischaos/errors.hpp"
#include "poischaos/philox.hpp"

namespace poischaos::cli
{
namespace
{
using json = nlohmann::ordered_json;

[[noreturn]] void fail(std::string const& field, std::string const& what)
{
    throw ParseError("field '" + field + "': " + what);
}

double get_number(json const& node, std::string const& field)
{
    if (!node.is_number())
        fail(field, "expected a number, got " + std::string(node.type_name()));
    return node.get<double>();
}

long get_integer(json const& node, std::string const& field, long lo, long hi)
{
    if (!node.is_number_integer())
        fail(field, "expected an integer, got " + std::string(node.type_name()));
    auto const v = node.get<long>();
    if (v < lo || v > hi)
    {
        std::ostringstream msg;
        msg << "value " << v << " outside [" << lo << ", " << hi << "]";
        fail(field, msg.str());
    }
    return v;
}

void read_nested(json const& node,
                 std::size_t atoms,
                 int depth,
                 std::string const& field,
                 std::vector<double>& out)
{
    if (depth == 0)
    {
        out.push_back(get_number(node, field));
        return;
    }
    if (!node.is_array())
        fail(field, "expected a nested array of depth " + std::to_string(depth));
    if (node.size() != atoms)
    {
        fail(field, "array has " + std::to_string(node.size()) + " entries, expected "
                        + std::to_string(atoms));
    }
    for (std::size_t j = 0; j < node.size(); ++j)
        read_nested(node[j], atoms, depth - 1, field + "[" + std::to_string(j) + "]", out);
}

Kernel symmetric_or_symmetrized(Kernel f, MeasureSpace const& space)
{
    if (asymmetry(f) == 0)
        return f.mark_symmetric();
    return symmetrize(f, space);
}

Kernel read_kernel(json const& node,
                   int order,
                   MeasureSpace const& space,
                   std::string const& field)
{
    std::size_t const n = space.atom_count();
    if (node.is_object())
    {
        if (!node.contains("generator") || !node["generator"].is_string())
            fail(field, "generator object needs a string 'generator'");
        auto const kind = node["generator"].get<std::string>();
        if (order == 0)
            fail(field, "generators need order >= 1; give a number instead");
        if (kind == "random-uniform")
        {
            for (auto const& [key, value] : node.items())
            {
                if (key != "generator" && key != "seed" && key != "lo" && key != "hi")
                    fail(field + "." + key, "unknown generator parameter");
            }
            std::uint64_t seed = 0;
            double lo = -1;
            double hi = 1;
            if (node.contains("seed"))
                seed = static_cast<std::uint64_t>(get_integer(node["seed"], field + ".seed", 0, 0x7fffffffffffffffL));
            if (node.contains("lo"))
                lo = get_number(node["lo"], field + ".lo");
            if (node.contains("hi"))
                hi = get_number(node["hi"], field + ".hi");
            if (!(lo < hi))
                fail(field, "random-uniform needs lo < hi");
            Philox4x32 const rng(seed);
            std::vector<double> values(checked_pow(n, order));
            for (std::size_t i = 0; i < values.size(); ++i)
            {
                auto out = rng({static_cast<std::uint32_t>(i),
                                static_cast<std::uint32_t>(i >> 32), 0, 0x0fu << 16});
                values[i] = lo + (hi - lo) * Philox4x32::to_unit(out[0], out[1]);
            }
            return symmetrize(Kernel(n, order, std::move(values)), space);
        }
        if (kind == "indicator")
        {
            if (!node.contains("tuples") || !node["tuples"].is_array())
                fail(field, "indicator needs an array 'tuples'");
            Kernel f = Kernel::zeros(n, order);
            std::vector<double> values(f.values().begin(), f.values().end());
            auto const& tuples = node["tuples"];
            for (std::size_t t = 0; t < tuples.size(); ++t)
            {
                std::string const tf = field + ".tuples[" + std::to_string(t) + "]";
                if (!tuples[t].is_array() || tuples[t].size() != static_cast<std::size_t>(order))
                    fail(tf, "expected " + std::to_string(order) + " atom indices");
                std::size_t flat = 0;
                for (std::size_t j = 0; j < tuples[t].size(); ++j)
                {
                    auto a = get_integer(tuples[t][j], tf, 0, static_cast<long>(n) - 1);
                    flat = flat * n + static_cast<std::size_t>(a);
                }
                values[flat] = 1;
            }
            return symmetric_or_symmetrized(Kernel(n, order, std::move(values)), space);
        }
        fail(field + ".generator", "unknown generator '" + kind + "'");
    }
    if (order == 0)
        return Kernel::scalar(get_number(node, field));
    std::vector<double> values;
    read_nested(node, n, order, field, values);
    return symmetric_or_symmetrized(Kernel(n, order, std::move(values)), space);
}

json kernel_to_json(Kernel const& f)
{
    if (f.order() == 0)
        return f.scalar_value();
    std::size_t const n = f.atom_count();
    auto rec = [&](auto&& self, int depth, std::size_t base) -> json {
        json arr = json::array();
        for (std::size_t a = 0; a < n; ++a)
        {
            std::size_t const flat = base * n + a;
            if (depth + 1 == f.order())
                arr.push_back(f[flat]);
            else
                arr.push_back(self(self, depth + 1, flat));
        }
        return arr;
    };
    return rec(rec, 0, 0);
}

std::string line_diagnostic(std::string const& text, std::size_t byte)
{
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i)
    {
        if (text[i] == '\n')
        {
            ++line;
            column = 1;
        }
        else
        {
            ++column;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(column);
}
}  // namespace

nlohmann::ordered_json kernel_json(Kernel const& f)
{
    return kernel_to_json(f);
}

//---------------------------------------------------------------------------//
RunConfig parse_config(std::string const& text)
{
    json root;
    try
    {
        root = json::parse(text);
    }
    catch (json::parse_error const& e)
    {
        throw ParseError("syntax error at " + line_diagnostic(text, e.byte) + ": "
                         + e.what());
    }
    if (!root.is_object())
        throw ParseError("configuration must be a JSON object");

    static std::set<std::string> const known{"weights", "shape", "kernels", "q",
                                             "p", "samples", "identity_samples",
                                             "seed", "n_max", "tolerance", "truncations"};
    for (auto const& [key, value] : root.items())
    {
        if (!known.count(key))
            fail(key, "unknown field");
    }
    for (char const* required : {"weights", "shape", "kernels"})
    {
        if (!root.contains(required))
            fail(required, "missing required field");
    }

    RunConfig config;
    auto const& w = root["weights"];
    if (!w.is_array() || w.empty())
        fail("weights", "expected a nonempty array of positive numbers");
    for (std::size_t i = 0; i < w.size(); ++i)
    {
        double const v = get_number(w[i], "weights[" + std::to_string(i) + "]");
        if (!(v > 0) || !std::isfinite(v))
            fail("weights[" + std::to_string(i) + "]", "weights must be finite and positive");
        config.weights.push_back(v);
    }
    MeasureSpace const space(config.weights);

    auto const& s = root["shape"];
    if (!s.is_array() || s.empty())
        fail("shape", "expected a nonempty array of orders");
    for (std::size_t i = 0; i < s.size(); ++i)
        config.shape.push_back(static_cast<int>(get_integer(s[i], "shape[" + std::to_string(i) + "]", 0, 8)));

    auto const& k = root["kernels"];
    if (!k.is_array() || k.size() != s.size())
        fail("kernels", "expected one kernel per factor (" + std::to_string(s.size()) + ")");
    for (std::size_t i = 0; i < k.size(); ++i)
    {
        std::string const field = "kernels[" + std::to_string(i) + "]";
        try
        {
            config.kernels.push_back(read_kernel(k[i], config.shape[i], space, field));
        }
        catch (InvalidArgument const& e)
        {
            fail(field, e.what());
        }
    }

    int const total = std::accumulate(config.shape.begin(), config.shape.end(), 0);
    if (root.contains("q"))
        config.q = static_cast<int>(get_integer(root["q"], "q", 0, total));
    if (root.contains("p"))
    {
        auto const& p = root["p"];
        config.p.clear();
        auto add = [&](json const& node, std::string const& field) {
            double const v = get_number(node, field);
            if (!(v >= 1 && v <= 2))
                fail(field, "exponent must lie in [1, 2]");
            config.p.push_back(v);
        };
        if (p.is_array())
        {
            if (p.empty())
                fail("p", "expected at least one exponent");
            for (std::size_t i = 0; i < p.size(); ++i)
                add(p[i], "p[" + std::to_string(i) + "]");
        }
        else
        {
            add(p, "p");
        }
    }
    if (root.contains("samples"))
        config.samples = get_integer(root["samples"], "samples", 2, 100'000'000);
    if (root.contains("identity_samples"))
        config.identity_samples = get_integer(root["identity_samples"], "identity_samples", 1, 100'000'000);
    if (root.contains("seed"))
        config.seed = static_cast<std::uint64_t>(get_integer(root["seed"], "seed", 0, 0x7fffffffffffffffL));
    if (root.contains("n_max"))
        config.n_max = static_cast<int>(get_integer(root["n_max"], "n_max", 0, 64));
    if (root.contains("tolerance"))
    {
        config.tolerance = get_number(root["tolerance"], "tolerance");
        if (!(config.tolerance > 0))
            fail("tolerance", "must be positive");
    }
    if (root.contains("truncations"))
    {
        auto const& t = root["truncations"];
        if (!t.is_array() || t.empty())
            fail("truncations", "expected a nonempty array of {T, h}");
        config.truncations.clear();
        for (std::size_t i = 0; i < t.size(); ++i)
        {
            std::string const field = "truncations[" + std::to_string(i) + "]";
            if (!t[i].is_object() || !t[i].contains("T") || !t[i].contains("h"))
                fail(field, "expected an object with T and h");
            GridSpec g{get_number(t[i]["T"], field + ".T"), get_number(t[i]["h"], field + ".h")};
            if (!(g.T > 1) || !(g.h > 0))
                fail(field, "needs T > 1 and h > 0");
            config.truncations.push_back(g);
        }
    }
    return config;
}

RunConfig load_config(std::string const& path)
{
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot read configuration file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

std::string dump_config(RunConfig const& config)
{
    json root;
    root["weights"] = config.weights;
    root["shape"] = config.shape;
    json kernels = json::array();
    for (auto const& f : config.kernels)
        kernels.push_back(kernel_to_json(f));
    root["kernels"] = kernels;
    if (config.q)
        root["q"] = *config.q;
    root["p"] = config.p;
    root["samples"] = config.samples;
    root["identity_samples"] = config.identity_samples;
    root["seed"] = config.seed;
    root["n_max"] = config.n_max;
    root["tolerance"] = config.tolerance;
    json trunc = json::array();
    for (auto const& g : config.truncations)
        trunc.push_back({{"T", g.T}, {"h", g.h}});
    root["truncations"] = trunc;
    return root.dump(2) + "\n";
}

}  // namespace poischaos::cli
