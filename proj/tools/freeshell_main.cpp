#include <iostream>

#include <CLI11.hpp>

#include "freeshell/error.hpp"
#include "freeshell/pipeline.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Flatten a 3D shell mesh into a printable plate of tiles and shrinking connectors"};
    app.require_subcommand(1);

    std::string config_path;
    std::string input;
    std::string out_dir;
    bool verbose = false;
    for (const char* name : {"remesh", "flatten", "plate", "verify", "all"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "Configuration file ([section] key = value)")->required();
        sub->add_option("--input", input, "Input mesh (OBJ or STL); overrides pipeline.input");
        sub->add_option("--out", out_dir, "Output directory; overrides pipeline.output_dir");
        sub->add_flag("--verbose", verbose, "Log every coarse iteration");
    }
    CLI11_PARSE(app, argc, argv);

    const std::string stage_name = app.get_subcommands().front()->get_name();
    freeshell::PipelineConfig cfg;
    try {
        cfg = freeshell::load_config(config_path);
    } catch (const freeshell::Error& e) {
        std::cerr << "freeshell: " << e.what() << "\n";
        return 2;
    }
    if (!input.empty()) {
        cfg.input_path = input;
    }
    if (!out_dir.empty()) {
        cfg.output_dir = out_dir;
    }
    return freeshell::run_pipeline(freeshell::parse_stage(stage_name), cfg, std::cout, std::cerr, verbose);
}
