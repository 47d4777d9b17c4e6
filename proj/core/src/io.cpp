#include "magswim/io.hpp"

#include "json.hpp"

#include <ostream>

namespace magswim::io {

std::string version() { return MAGSWIM_VERSION; }

void write_csv_preamble(std::ostream& os, const RunInfo& info)
{
    os << "# magswim " << version() << '\n';
    os << "# command " << info.command << '\n';
    os << "# swimmer " << info.swimmer_name << " fnv1a:" << info.swimmer_hash << '\n';
    os << "# config " << info.config_json << '\n';
}

std::string header_json(const RunInfo& info)
{
    nlohmann::json j;
    j["tool"] = "magswim";
    j["version"] = version();
    j["command"] = info.command;
    j["swimmer"] = {{"name", info.swimmer_name}, {"fnv1a", info.swimmer_hash}};
    j["config"] = info.config_json.empty() ? nlohmann::json::object() : nlohmann::json::parse(info.config_json);
    return j.dump();
}

}  // namespace magswim::io
