// run.hpp - executes a RunConfig and renders its artifacts.

#pragma once

#include <map>
#include <string>
#include <vector>

#include "polrelax/config.hpp"

namespace polrelax {

struct Artifact {
    std::string name;     // file name relative to the output directory
    std::string content;
};

struct RunArtifacts {
    std::vector<Artifact> files;  // summary.json last
};

// Scalars of one evaluation, keyed "<task>" / "<task>.<detail>".
using ScalarMap = std::map<std::string, double>;

// Runs every task (and sweep point) and renders the artifacts in memory.
// Sweep points are evaluated on up to `threads` threads; the artifacts do not
// depend on the thread count.
RunArtifacts execute(const RunConfig& config, unsigned threads = 1);

// Writes all artifacts to `directory` via temporary files and renames; on
// failure no artifact is left behind.
void write_artifacts(const RunArtifacts& artifacts, const std::string& directory);

// Human-readable derived quantities for `validate`.
std::vector<std::string> describe(const RunConfig& config);

std::string format_number(double v);

}  // namespace polrelax
