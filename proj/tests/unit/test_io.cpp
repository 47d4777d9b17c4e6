#include "magswim/io.hpp"

#include <catch_amalgamated.hpp>
#include "json.hpp"

#include <sstream>

using namespace magswim;

TEST_CASE("CSV preamble lines are comments")
{
    io::RunInfo info{"magswim regimes --swimmer A", "swimmer A", "cbf29ce484222325", R"({"nx":10})"};
    std::ostringstream os;
    io::write_csv_preamble(os, info);
    std::istringstream in(os.str());
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        CHECK(line.rfind("#", 0) == 0);
        ++n;
    }
    CHECK(n >= 3);
    CHECK(os.str().find(io::version()) != std::string::npos);
}

TEST_CASE("header JSON carries the run configuration")
{
    io::RunInfo info{"magswim atlas", "swimmer B", "abc", R"({"resolution":400})"};
    const auto j = nlohmann::json::parse(io::header_json(info));
    CHECK(j.at("version") == io::version());
    CHECK(j.at("command") == "magswim atlas");
    CHECK(j.at("config").at("resolution") == 400);
    CHECK(j.at("swimmer").at("fnv1a") == "abc");
}
