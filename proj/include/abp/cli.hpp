#pragma once

// Batch front end: single runs, parameter sweeps and contour grids, written
// as CSV (default) or JSON with a provenance header.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "abp/model.hpp"
#include "abp/oracles.hpp"
#include "abp/pde.hpp"
#include "abp/series.hpp"

namespace abp::cli {

inline constexpr const char* kToolName = "abp_mfpt";
inline constexpr const char* kVersion = "0.1.0";
/// Relative --output paths resolve against this directory when it is set.
inline constexpr const char* kOutputDirEnv = "ABP_MFPT_OUTPUT_DIR";

enum class Method { series, pde, bvp, mc, all };
enum class Format { csv, json };

/// Process exit codes.
enum ExitCode : int { kOk = 0, kUsage = 2, kNumerical = 3 };

/// Inclusive `min:max:count` axis.
struct SweepAxis {
    std::string variable;  ///< x0, pe, beta or eta (or t for survival times)
    double min = 0.0;
    double max = 0.0;
    int count = 2;

    std::vector<double> values() const;
    std::string text() const;
};

/// Parses either a single number or `min:max:count`. Throws ValidationError.
std::optional<SweepAxis> parse_axis(const std::string& variable, const std::string& text,
                                    double& fixed);

struct RunSpec {
    Method method = Method::all;
    ModelParams params;            ///< values of the non-swept variables
    std::vector<SweepAxis> sweep;  ///< at most 2; canonical order x0, pe, beta, eta
    std::string output = "-";     ///< "-" is standard output
    Format format = Format::csv;
    std::string preset;

    series::SeriesConfig series;
    pde::GridConfig grid;
    oracles::McConfig mc;
    int bvp_nx = 1023;
    int jobs = 1;

    SweepAxis times{"t", 0.0, 2.0, 201};  ///< survival command only
    int order = 2;                         ///< survival series order
};

/// Throws ValidationError on malformed specs.
void validate(const RunSpec& spec);

/// One point of the sweep grid, in row order (first axis outermost).
std::vector<ModelParams> expand_grid(const RunSpec& spec);

/// Applies the named contour preset (fig4a..fig4d): beta/eta plus default
/// x0 and pe axes for any axis not already swept.
void apply_preset(RunSpec& spec, const std::string& name);

std::string method_name(Method m);
Method parse_method(const std::string& s);

/// A rectangular table of numbers plus provenance lines.
struct Table {
    std::vector<std::pair<std::string, std::string>> provenance;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;  ///< NaN = not computed
};

void write_csv(const Table& table, std::ostream& out);
void write_json(const Table& table, std::ostream& out);

/// Provenance lines common to every command.
std::vector<std::pair<std::string, std::string>> provenance(const RunSpec& spec,
                                                            const std::string& command);

Table cmd_mfpt(const RunSpec& spec, std::ostream& warn);
Table cmd_contour(const RunSpec& spec, std::ostream& warn);
Table cmd_survival(const RunSpec& spec, std::ostream& warn);

/// Full command-line entry point; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace abp::cli
