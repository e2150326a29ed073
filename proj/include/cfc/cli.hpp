// Command-line frontend: sample, cluster, train, predict, and evaluate
// subcommands over schema-described delimited data, with a reproducibility
// manifest next to every primary output.

#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace cfc::cli {

inline constexpr const char* kToolName = "cfc";
inline constexpr const char* kToolVersion = "0.1.0";

/// Exit codes shared by every subcommand.
enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitData = 2,
    kExitInternal = 3,
};

/// Parse a cluster-count spec: a comma-separated mix of integers and
/// inclusive ranges, e.g. "2..8" or "2,4,6" or "2,5..7". ConfigError on
/// malformed input, empty sets, or reversed ranges.
std::vector<std::size_t> parse_cluster_counts(const std::string& text);

/// Parse "name=fraction,name=fraction" into an ordered map. ConfigError on
/// malformed pairs, duplicate names, or fractions outside [0, 1].
std::map<std::string, double> parse_fractions(const std::string& text);

/// A rate in [0, 1] rendered as a percentage with two decimals ("97.10").
std::string format_percent(double rate);

/// 16-hex-digit content digest of a file; IoError when unreadable.
std::string file_digest(const std::string& path);

/// Run one CLI invocation. `args` excludes the program name. Writes reports
/// to `out`, diagnostics to `err`, and returns an ExitCode value.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace cfc::cli
