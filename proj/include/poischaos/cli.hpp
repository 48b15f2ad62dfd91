#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "poischaos/measure.hpp"
#include "poischaos/verify.hpp"

namespace poischaos::cli
{
//! Malformed or invalid configuration; exit code 2
class ParseError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

/*!
 * Fully resolved run configuration.
 *
 * Generators are expanded and kernels symmetrized at parse time, so the
 * dumped form re-parses to the same kernels bit for bit.
 */
struct RunConfig
{
    std::vector<double> weights;
    std::vector<int> shape;
    std::vector<Kernel> kernels;
    std::optional<int> q;
    std::vector<double> p{1.0, 1.5, 2.0};
    long samples{100'000};
    long identity_samples{1000};
    std::uint64_t seed{0};
    int n_max{16};
    double tolerance{1e-8};
    std::vector<GridSpec> truncations{{10, 0.01}, {100, 0.01}, {1000, 0.01}};

    MeasureSpace space() const { return MeasureSpace(weights); }
    Shape make_shape() const { return Shape(shape); }
};

RunConfig parse_config(std::string const& text);
RunConfig load_config(std::string const& path);
std::string dump_config(RunConfig const& config);

namespace exit_code
{
inline constexpr int ok = 0;
inline constexpr int check_failed = 1;
inline constexpr int parse_error = 2;
inline constexpr int resource_error = 3;
}  // namespace exit_code

//! Parse argv-style arguments (without the program name) and execute
int run(std::vector<std::string> const& args, std::ostream& out, std::ostream& err);

}  // namespace poischaos::cli
