#pragma once

#include <iosfwd>
#include <string>

namespace magswim::io {

std::string version();

/// Provenance carried by every output file.
struct RunInfo {
    std::string command;
    std::string swimmer_name;
    std::string swimmer_hash;
    std::string config_json;  // one-line JSON echo of the full run configuration
};

/// '#'-prefixed preamble for CSV files.
void write_csv_preamble(std::ostream& os, const RunInfo& info);

/// JSON object text {"tool": ..., "version": ..., "command": ..., "swimmer": {...}, "config": {...}}.
std::string header_json(const RunInfo& info);

}  // namespace magswim::io
