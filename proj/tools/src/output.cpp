#include "output.hpp"

#include <stdexcept>

namespace cli {

namespace {

std::ofstream open(const Context& ctx, const std::string& name)
{
    std::filesystem::create_directories(ctx.out_dir);
    const auto path = ctx.out_dir / name;
    std::ofstream os(path);
    if (!os) throw std::invalid_argument("cannot write " + path.string());
    os.precision(17);
    return os;
}

}  // namespace

std::ofstream open_csv(const Context& ctx, const std::string& name)
{
    auto os = open(ctx, name);
    magswim::io::write_csv_preamble(os, ctx.info);
    return os;
}

void write_json(const Context& ctx, const std::string& name, nlohmann::json body)
{
    auto os = open(ctx, name);
    nlohmann::json doc;
    doc["header"] = nlohmann::json::parse(magswim::io::header_json(ctx.info));
    for (auto& [k, v] : body.items()) doc[k] = std::move(v);
    os << doc.dump(2) << '\n';
}

void write_script(const Context& ctx, const std::string& name, const std::string& body)
{
    auto os = open(ctx, name);
    os << "# gnuplot script, magswim " << magswim::io::version() << "\n# " << ctx.info.command << "\n"
       << "set datafile separator ','\n" << body;
}

nlohmann::json to_json(const magswim::Vec3& v) { return {v(0), v(1), v(2)}; }

}  // namespace cli
