#include <catch_amalgamated.hpp>

#include "json.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const std::string data_dir = MAGSWIM_DATA_DIR;

int run(const std::string& args)
{
    const std::string cmd = std::string(MAGSWIM_CLI) + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name)
{
    const auto p = fs::temp_directory_path() / ("magswim_cli_" + name);
    fs::remove_all(p);
    return p;
}

// Everything after the '#' preamble, which echoes the output directory.
std::string body(const std::string& csv)
{
    std::istringstream in(csv);
    std::string out, line;
    while (std::getline(in, line))
        if (line.empty() || line[0] != '#') out += line + "\n";
    return out;
}

std::string swimmer_A() { return data_dir + "/swimmers/swimmer_A.json"; }

}  // namespace

TEST_CASE("usage errors exit with code 2")
{
    CHECK(run("") == 2);
    CHECK(run("nonsense") == 2);
    CHECK(run("atlas") == 2);
    CHECK(run("atlas --swimmer \"\"") == 2);
    CHECK(run("atlas --swimmer /nonexistent/file.json --out " + scratch("missing").string()) == 2);
    CHECK(run("simulate --swimmer " + swimmer_A() + " --ma 0.015") == 2);
    CHECK(run("simulate --swimmer " + swimmer_A() + " --ma 0.015 --cospsi 1.5") == 2);
    CHECK(run("simulate --swimmer " + swimmer_A() + " --ma 0.015 --cospsi 0.01 --tol 1e-3") == 2);
    CHECK(run("regimes --swimmer " + swimmer_A() + " --ma 0:x:3") == 2);
}

TEST_CASE("simulate is byte-identical across reruns and carries the preamble")
{
    const auto a = scratch("sim_a"), b = scratch("sim_b");
    const std::string args = "simulate --swimmer " + swimmer_A() + " --ma 0.015 --cospsi 0.01 --t-end 200 --seed 7 --out ";
    REQUIRE(run(args + a.string()) == 0);
    REQUIRE(run(args + b.string()) == 0);
    const auto csv = slurp(a / "trajectory.csv");
    CHECK(body(csv) == body(slurp(b / "trajectory.csv")));
    CHECK(body(csv).size() > 1000);
    CHECK(csv.rfind("#", 0) == 0);
    CHECK(csv.find("t,q1,q2,q3,q4,x,y,z\n") != std::string::npos);

    const auto js = nlohmann::json::parse(slurp(a / "simulate.json"));
    CHECK(js["header"].contains("swimmer"));
    CHECK(js["header"]["swimmer"].contains("fnv1a"));
    CHECK(js["header"]["config"]["seed"] == 7);
    CHECK(js["max_norm_drift"].get<double>() < 1e-9);
}

TEST_CASE("atlas writes chart, curves and a script")
{
    const auto d = scratch("atlas");
    REQUIRE(run("atlas --swimmer " + swimmer_A() + " --theta 40 --phi 20 --ma 0.015 --cospsi 0.01 --out " + d.string()) == 0);
    for (const char* f : {"chart.csv", "curves.csv", "intersections.csv", "atlas.gp", "atlas.json"}) CHECK(fs::exists(d / f));
    const auto js = nlohmann::json::parse(slurp(d / "atlas.json"));
    CHECK(js["equilibria"].size() == 8);
}

TEST_CASE("regimes json histogram covers the grid")
{
    const auto d = scratch("regimes");
    REQUIRE(run("regimes --swimmer " + swimmer_A() + " --ma 0:0.035:21 --cospsi -0.2:0.2:21 --out " + d.string()) == 0);
    CHECK(fs::exists(d / "regimes.csv"));
    const auto js = nlohmann::json::parse(slurp(d / "regimes.json"));
    CHECK(js.contains("header"));
    CHECK(js.contains("diagram"));
}
