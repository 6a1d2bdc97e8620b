#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "denjoy/entry.hpp"

namespace {

// the config may name the backend; malformed documents fall through to the
// double backend, which reports them
std::string precision_hint(const std::string& text) {
    try {
        const auto doc = nlohmann::json::parse(text);
        if (doc.is_object() && doc.contains("precision") && doc["precision"].is_string())
            return doc["precision"].get<std::string>();
    } catch (const nlohmann::json::exception&) {
    }
    return "double";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical experiments on circle maps with break points"};
    std::string command, config_path, out_dir, precision;
    std::uint64_t seed = 1;
    app.add_option("command", command, "rotnum | tune | partition | distortion | measure | singularity")
        ->required()
        ->check(CLI::IsMember(denjoy::dbl::commands()));
    app.add_option("--config", config_path, "JSON experiment config")->required();
    app.add_option("--out", out_dir, "output directory (overrides output_dir)");
    app.add_option("--precision", precision, "numeric backend")->check(CLI::IsMember({"double", "extended"}));
    app.add_option("--seed", seed, "seed for sampled base points and quadruples");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    std::ifstream in(config_path, std::ios::binary);
    if (!in) {
        std::cerr << command << " failed: ConfigError: cannot read " << config_path << '\n';
        return 2;
    }
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();

    if (precision.empty()) precision = precision_hint(text);
    if (precision == "extended") return denjoy::ext::run(command, text, out_dir, seed, std::cout, std::cerr);
    return denjoy::dbl::run(command, text, out_dir, seed, std::cout, std::cerr);
}
