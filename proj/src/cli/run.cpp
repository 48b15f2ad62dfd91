#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json_io.hpp"
#include "poischaos/cli.hpp"
#include "poischaos/errors.hpp"

namespace poischaos::cli
{
namespace
{
using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

struct Flags
{
    std::string command;
    std::string config_path;
    std::string out_dir;
    std::string dump_config;
    std::string check{"all"};
    std::optional<std::uint64_t> seed;
    std::optional<long> samples;
    std::optional<int> n_max;
    bool quiet{false};
};

class Emitter
{
  public:
    Emitter(Flags const& flags, std::ostream& out) : flags_(flags), out_(out)
    {
        if (!flags_.out_dir.empty())
            fs::create_directories(flags_.out_dir);
    }

    void write(std::string const& name, std::string const& content) const
    {
        if (flags_.out_dir.empty())
            return;
        std::ofstream file(fs::path(flags_.out_dir) / name, std::ios::binary);
        if (!file)
            throw std::runtime_error("cannot write report " + name);
        file << content;
    }

    void write_json(std::string const& name, json const& doc) const
    {
        write(name, doc.dump(2) + "\n");
    }

    std::ostream& say() const
    {
        static std::ostream null(nullptr);
        return flags_.quiet ? null : out_;
    }

  private:
    Flags const& flags_;
    std::ostream& out_;
};

std::string csv_number(double v)
{
    std::ostringstream s;
    s << std::setprecision(17) << v;
    return s.str();
}

std::string csv_text(std::string const& text)
{
    if (text.find_first_of(",\"") == std::string::npos)
        return text;
    std::string quoted = "\"";
    for (char c : text)
        quoted += c == '"' ? std::string("\"\"") : std::string(1, c);
    return quoted + "\"";
}

json report_json(CheckReport const& report)
{
    json doc;
    doc["check_name"] = report.check_name;
    doc["passed"] = report.passed;
    doc["max_discrepancy"] = report.max_discrepancy;
    doc["tolerance_used"] = report.tolerance_used;
    json rows = json::array();
    for (auto const& row : report.details)
    {
        rows.push_back({{"label", row.label},
                        {"expected", row.expected},
                        {"actual", row.actual},
                        {"discrepancy", row.discrepancy},
                        {"tolerance", row.tolerance}});
    }
    doc["details"] = rows;
    return doc;
}

std::string report_csv(CheckReport const& report)
{
    std::ostringstream csv;
    csv << "label,expected,actual,discrepancy,tolerance\n";
    for (auto const& row : report.details)
    {
        csv << csv_text(row.label) << ',' << csv_number(row.expected) << ','
            << csv_number(row.actual) << ',' << csv_number(row.discrepancy) << ','
            << csv_number(row.tolerance) << '\n';
    }
    return csv.str();
}

std::string file_stem(std::string name)
{
    for (char& c : name)
    {
        if (c == ' ' || c == '=')
            c = '_';
    }
    return name;
}

//---------------------------------------------------------------------------//
int cmd_enumerate(RunConfig const& config, Emitter const& emit)
{
    Shape const shape = config.make_shape();
    int const k = shape.total_order();
    auto const nonflat = enumerate_nonflat(shape);
    auto const geq2 = filter_geq2(nonflat);

    json doc;
    doc["command"] = "enumerate";
    doc["shape"] = config.shape;
    doc["total_order"] = k;
    doc["bell"] = k > 0 ? enumerate_partitions(k).size() : 1;
    doc["nonflat"] = nonflat.size();
    doc["nonflat_geq2"] = geq2.size();
    json pairs = json::array();
    json words = json::array();
    for (int q = 0; q <= k; ++q)
    {
        pairs.push_back(enumerate_diagram_pairs(shape, q).size());
        if (q >= 1)
            words.push_back(enumerate_words(shape, q).size());
    }
    doc["diagram_pairs_by_q"] = pairs;
    doc["words_by_q"] = words;
    json list = json::array();
    for (auto const& sigma : nonflat)
        list.push_back(sigma.to_string());
    doc["nonflat_partitions"] = list;
    emit.write_json("enumerate.json", doc);

    emit.say() << "shape " << json(config.shape).dump() << "  K = " << k << '\n'
               << "|Pi|      = " << nonflat.size() << '\n'
               << "|Pi>=2|   = " << geq2.size() << '\n'
               << "pairs(q)  = " << pairs.dump() << '\n'
               << "words(q)  = " << words.dump() << '\n';
    return exit_code::ok;
}

int cmd_kernels(RunConfig const& config, Flags const& flags, Emitter const& emit)
{
    MeasureSpace const space = config.space();
    Shape const shape = config.make_shape();
    if (!flags.dump_config.empty())
    {
        std::ofstream file(flags.dump_config, std::ios::binary);
        if (!file)
            throw std::runtime_error("cannot write " + flags.dump_config);
        file << dump_config(config);
    }
    ChaosExpansion const e = product_expansion(shape, config.kernels, space);
    json doc;
    doc["command"] = "kernels";
    doc["shape"] = config.shape;
    json ks = json::array();
    std::ostringstream csv;
    csv << "q,index,value\n";
    for (int q = 0; q <= e.top_order(); ++q)
    {
        if (config.q && *config.q != q)
            continue;
        Kernel const& h = e.h(q);
        ks.push_back({{"q", q}, {"values", kernel_json(h)}});
        emit.say() << "h" << q << " = " << kernel_json(h).dump() << '\n';
        if (q == 0)
        {
            csv << "0,\"()\"," << csv_number(h.scalar_value()) << '\n';
            continue;
        }
        for_each_index(h.atom_count(), q, [&](std::span<Atom const> z, std::size_t flat) {
            csv << q << ",\"(";
            for (std::size_t j = 0; j < z.size(); ++j)
                csv << (j ? "," : "") << z[j];
            csv << ")\"," << csv_number(h[flat]) << '\n';
        });
    }
    doc["kernels"] = ks;
    emit.write_json("kernels.json", doc);
    emit.write("kernels.csv", csv.str());
    return exit_code::ok;
}

int cmd_expect(RunConfig const& config, Emitter const& emit)
{
    MeasureSpace const space = config.space();
    Shape const shape = config.make_shape();
    double const diagram = diagram_expectation(shape, config.kernels, space);
    Functional const phi = product_functional(shape, config.kernels, space);
    auto const exact = exact_expectation(phi, space, config.n_max);
    auto const mc = mc_expectation(phi, space, config.samples, config.seed);

    CheckReport report;
    report.check_name = "expectation";
    report.add({"exact", exact.value, diagram, std::fabs(diagram - exact.value),
                config.tolerance * std::max(1.0, std::fabs(exact.value))
                    + exact.truncation_slack()});
    report.add({"monte-carlo", mc.value, diagram, std::fabs(diagram - mc.value),
                4 * mc.std_error});

    json doc = report_json(report);
    doc["diagram_expectation"] = diagram;
    doc["exact"] = {{"value", exact.value},
                    {"method", to_string(exact.method)},
                    {"truncation_mass", exact.truncation_mass},
                    {"n_max", config.n_max},
                    {"samples", exact.samples}};
    doc["monte_carlo"] = {{"value", mc.value},
                          {"method", to_string(mc.method)},
                          {"stderr", mc.std_error},
                          {"samples", mc.samples},
                          {"seed", config.seed}};
    emit.write_json("expect.json", doc);
    emit.say() << "diagram     " << csv_number(diagram) << '\n'
               << "exact       " << csv_number(exact.value) << "  (truncation mass "
               << exact.truncation_mass << ")\n"
               << "monte-carlo " << csv_number(mc.value) << " +- " << mc.std_error << '\n'
               << (report.passed ? "PASS" : "FAIL") << '\n';
    return report.passed ? exit_code::ok : exit_code::check_failed;
}

CheckReport condition_report(Shape const& shape,
                             std::vector<Kernel> const& kernels,
                             MeasureSpace const& space)
{
    CheckReport report;
    report.check_name = "conditions";
    auto add = [&](std::string const& prefix, ConditionReport const& c) {
        for (auto const& item : c.per_item)
        {
            bool const finite = std::isfinite(item.mass);
            report.add({prefix + item.id, item.mass, item.mass, finite ? 0.0 : INFINITY, 0.0});
        }
    };
    add("A ", check_condition_A(shape, kernels, space));
    bool const all_positive = std::all_of(shape.orders().begin(), shape.orders().end(),
                                          [](int k) { return k >= 1; });
    if (all_positive)
        add("A-loc ", check_condition_A_loc(shape, kernels, space));
    return report;
}

int cmd_verify(RunConfig const& config, Flags const& flags, Emitter const& emit)
{
    static std::vector<std::string> const names{
        "last_penrose", "word_formula", "product_identity", "diagram_expectation",
        "isometry",     "poincare",     "conditions"};
    std::vector<std::string> selected;
    if (flags.check == "all")
    {
        selected = names;
    }
    else
    {
        std::stringstream list(flags.check);
        std::string item;
        while (std::getline(list, item, ','))
        {
            if (std::find(names.begin(), names.end(), item) == names.end())
                throw ParseError("field '--check': unknown check '" + item + "'");
            selected.push_back(item);
        }
    }

    MeasureSpace const space = config.space();
    Shape const shape = config.make_shape();
    CheckOptions options;
    options.tolerance = config.tolerance;
    options.n_max = config.n_max;
    options.samples = config.identity_samples;
    options.seed = config.seed;

    std::vector<CheckReport> reports;
    for (auto const& name : selected)
    {
        if (name == "last_penrose")
            reports.push_back(check_last_penrose(shape, config.kernels, space, options));
        else if (name == "word_formula")
            reports.push_back(check_word_formula(shape, config.kernels, space, options));
        else if (name == "product_identity")
            reports.push_back(check_product_identity(shape, config.kernels, space, options));
        else if (name == "diagram_expectation")
            reports.push_back(check_diagram_expectation(shape, config.kernels, space, options));
        else if (name == "isometry")
        {
            Kernel const& f = config.kernels.front();
            Kernel const& g = config.kernels.size() > 1 ? config.kernels[1] : f;
            if (f.order() <= 3 && g.order() <= 3)
                reports.push_back(check_isometry(space, f, g, options));
        }
        else if (name == "poincare")
        {
            PoincareOptions po;
            po.samples = config.samples;
            po.seed = config.seed;
            auto phi = product_functional(shape, config.kernels, space);
            for (auto& r : check_poincare(phi, space, config.p, po))
                reports.push_back(std::move(r));
        }
        else
            reports.push_back(condition_report(shape, config.kernels, space));
    }

    bool all_passed = true;
    std::ostringstream summary;
    summary << "check,passed,max_discrepancy,tolerance_used\n";
    for (auto const& r : reports)
    {
        all_passed = all_passed && r.passed;
        std::string const stem = file_stem(r.check_name);
        emit.write_json(stem + ".json", report_json(r));
        emit.write(stem + ".csv", report_csv(r));
        summary << csv_text(r.check_name) << ',' << (r.passed ? "true" : "false") << ','
                << csv_number(r.max_discrepancy) << ',' << csv_number(r.tolerance_used)
                << '\n';
        emit.say() << (r.passed ? "PASS " : "FAIL ") << std::left << std::setw(22)
                   << r.check_name << " max_discrepancy=" << r.max_discrepancy
                   << " tolerance=" << r.tolerance_used << '\n';
    }
    emit.write("summary.csv", summary.str());
    return all_passed ? exit_code::ok : exit_code::check_failed;
}

int cmd_witness(RunConfig const& config, Emitter const& emit)
{
    WitnessTable const table = divergence_witness(config.truncations);
    json doc;
    doc["command"] = "witness";
    json rows = json::array();
    std::ostringstream csv;
    csv << "T,h,atoms,sigma_mass,loc_mass,section_mass\n";
    emit.say() << std::left << std::setw(10) << "T" << std::setw(10) << "atoms"
               << std::setw(16) << "sigma_mass" << std::setw(16) << "loc_mass"
               << "section_mass\n";
    for (auto const& row : table.rows)
    {
        rows.push_back({{"T", row.T},
                        {"h", row.h},
                        {"atoms", row.atoms},
                        {"sigma_mass", row.sigma_mass},
                        {"loc_mass", row.loc_mass},
                        {"section_mass", row.section_mass}});
        csv << csv_number(row.T) << ',' << csv_number(row.h) << ',' << row.atoms << ','
            << csv_number(row.sigma_mass) << ',' << csv_number(row.loc_mass) << ','
            << csv_number(row.section_mass) << '\n';
        emit.say() << std::left << std::setw(10) << row.T << std::setw(10) << row.atoms
                   << std::setw(16) << row.sigma_mass << std::setw(16) << row.loc_mass
                   << row.section_mass << '\n';
    }
    doc["rows"] = rows;
    if (table.sigma_mass_increasing)
        doc["sigma_mass_increasing"] = *table.sigma_mass_increasing;
    if (table.last_loc_change)
        doc["last_loc_change"] = *table.last_loc_change;
    emit.write_json("witness.json", doc);
    emit.write("witness.csv", csv.str());
    return exit_code::ok;
}
}  // namespace

//---------------------------------------------------------------------------//
int run(std::vector<std::string> const& args, std::ostream& out, std::ostream& err)
{
    Flags flags;
    CLI::App app{"Chaos expansions of products of Poisson multiple integrals"};
    app.add_option("command", flags.command, "enumerate | kernels | expect | verify | witness")
        ->required()
        ->check(CLI::IsMember({"enumerate", "kernels", "expect", "verify", "witness"}));
    app.add_option("--config", flags.config_path, "JSON run configuration")->required();
    app.add_option("--out", flags.out_dir, "Directory for structured reports");
    app.add_option("--seed", flags.seed, "Master seed");
    app.add_option("--samples", flags.samples, "Monte Carlo samples")->check(CLI::Range(2L, 100'000'000L));
    app.add_option("--nmax", flags.n_max, "Per-atom count cap for exact expectations")
        ->check(CLI::Range(0, 64));
    app.add_option("--check", flags.check, "Check name, comma list, or all");
    app.add_option("--dump-config", flags.dump_config, "Write the resolved configuration");
    app.add_flag("--quiet", flags.quiet, "Suppress the human-readable summary");

    try
    {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    }
    catch (CLI::CallForHelp const&)
    {
        out << app.help();
        return exit_code::ok;
    }
    catch (CLI::ParseError const& e)
    {
        err << "error: " << e.what() << '\n';
        return exit_code::parse_error;
    }

    try
    {
        RunConfig config = load_config(flags.config_path);
        if (flags.seed)
            config.seed = *flags.seed;
        if (flags.samples)
            config.samples = *flags.samples;
        if (flags.n_max)
            config.n_max = *flags.n_max;
        require_kernels_match(config.make_shape(), config.kernels, config.space());

        Emitter const emit(flags, out);
        if (flags.command == "enumerate")
            return cmd_enumerate(config, emit);
        if (flags.command == "kernels")
            return cmd_kernels(config, flags, emit);
        if (flags.command == "expect")
            return cmd_expect(config, emit);
        if (flags.command == "verify")
            return cmd_verify(config, flags, emit);
        return cmd_witness(config, emit);
    }
    catch (ParseError const& e)
    {
        err << "configuration error: " << e.what() << '\n';
        return exit_code::parse_error;
    }
    catch (ResourceLimit const& e)
    {
        err << "resource limit: " << e.what() << '\n';
        return exit_code::resource_error;
    }
    catch (InvalidArgument const& e)
    {
        err << "invalid input: " << e.what() << '\n';
        return exit_code::parse_error;
    }
}

}  // namespace poischaos::cli
