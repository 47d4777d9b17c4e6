#pragma once

#include "magswim/swimmer.hpp"

#include <map>
#include <string>

namespace fixtures {

inline std::string swimmer_path(const std::string& stem)
{
    return std::string(MAGSWIM_DATA_DIR) + "/swimmers/" + stem + ".json";
}

inline const magswim::PDecomposition& swimmer(const std::string& stem)
{
    static std::map<std::string, magswim::PDecomposition> cache;
    auto it = cache.find(stem);
    if (it == cache.end()) it = cache.emplace(stem, magswim::decompose(magswim::load_swimmer_file(swimmer_path(stem)))).first;
    return it->second;
}

inline const magswim::PDecomposition& A() { return swimmer("swimmer_A"); }
inline const magswim::PDecomposition& B() { return swimmer("swimmer_B"); }

}  // namespace fixtures
