#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

namespace certeig {

enum class Subcommand { check, source, power, newton, pipeline, diagnose, oracle };

Subcommand parse_subcommand(std::string_view name);
std::string_view to_string(Subcommand s);

struct RunConfig {
    // A scenario file, or "builtin:const" / "builtin:het" / "builtin:ref".
    std::string scenario;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    std::optional<double> target;         // overrides the scenario / subcommand default
    std::optional<std::string> schedule;  // quad | lin | hybrid
    std::optional<double> zeta;
    bool oracle = true;
    int threads = 1;     // > 1 uses the OpenMP kernels
    bool timing = true;  // false writes wallclock_ms = 0, making traces byte-identical
};

// Runs one subcommand and writes trace.jsonl, summary.json and summary.csv to out_dir
// (error.json on failure). Returns 0 on success, 1 on numerical failure, 2 on config errors.
// A one-line human summary or the error record goes to log.
int run(Subcommand subcommand, const RunConfig& config, std::ostream& log);

}  // namespace certeig
