#pragma once

#include "psmpm/benchmarks.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace psmpm {

/// Sweep run by the `converge` command.
struct StudyConfig
{
    std::vector<double> h{0.25, 0.125, 0.0625};
    std::vector<int> ppe{16, 64, 256};
    double courant = 0.2;
    ParticleLayoutKind layout = ParticleLayoutKind::Lattice;

    bool operator==(const StudyConfig&) const = default;
};

struct RunConfig
{
    /// mms, bar, soil or custom; selects the defaults the other keys override.
    std::string benchmark = "custom";
    BenchmarkSpec spec;
    /// When set, dt is recomputed from this Courant number and the
    /// characteristic length of the basis, rounded to divide t_end.
    std::optional<double> courant;
    std::filesystem::path output_dir = "output";
    /// Frames are written every `cadence` steps and after the last step.
    int cadence = 10;
    StudyConfig study;

    bool operator==(const RunConfig&) const = default;

    /// Throws ValidationError naming the offending field.
    void validate() const;
};

/// Defaults of a builtin benchmark: mms, bar, soil or custom.
RunConfig default_config(const std::string& benchmark);

/// Flat `key = value` text with `[section]` headers and `#` comments.
/// Throws ParseError with the line number on syntax errors and unknown keys,
/// and ValidationError naming the field on invalid values. Warnings, such as
/// a Courant number of 1 or more, are appended to `warnings` when given.
RunConfig parse_config(std::istream& in, std::vector<std::string>* warnings = nullptr);
/// Throws IOError if the file cannot be read.
RunConfig load_config(const std::filesystem::path& path, std::vector<std::string>* warnings = nullptr);

/// Text that parse_config reads back to an equal config.
std::string serialize_config(const RunConfig& config);

/// Spec with dt resolved from the Courant number when one is set.
BenchmarkSpec resolve_spec(const RunConfig& config);

/// Courant number of the resolved spec on its measured characteristic length.
double config_courant(const RunConfig& config);

} // namespace psmpm
