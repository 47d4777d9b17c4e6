#pragma once

#include "magswim/io.hpp"
#include "magswim/swimmer.hpp"

#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <string>

namespace cli {

struct Context {
    std::filesystem::path out_dir;
    magswim::Swimmer swimmer;
    magswim::PDecomposition dec;
    magswim::io::RunInfo info;
};

/// Opens out_dir/name for writing; CSV files get the '#' preamble.
std::ofstream open_csv(const Context& ctx, const std::string& name);

/// Writes {"header": ..., <body fields>} as indented JSON.
void write_json(const Context& ctx, const std::string& name, nlohmann::json body);

/// Standalone gnuplot script next to the data it reads.
void write_script(const Context& ctx, const std::string& name, const std::string& body);

nlohmann::json to_json(const magswim::Vec3& v);

}  // namespace cli
