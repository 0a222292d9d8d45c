// Command-line harness for the three-player GAN toy experiments.
//
// Subcommands: train-baseline, train-cgan, train-acgan, train-threeplayer,
// toy-overlap, render-surface, eval, compare. Each takes --config <path>,
// --out <dir> and an optional --seed override. Exit code 0 only when every
// requested scenario completes.

#include <cstdint>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "tpg/scenarios.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool has_seed = false;
    bool has_out = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "experiment config file")->required();
    cmd->add_option("--out", args.out_dir, "output directory (overrides config)")
        ->each([&args](const std::string&) { args.has_out = true; });
    cmd->add_option("--seed", args.seed, "seed override")
        ->each([&args](const std::string&) { args.has_seed = true; });
}

tpg::ExperimentConfig load_with_overrides(const CommonArgs& args) {
    tpg::ExperimentConfig cfg = tpg::load_config(args.config_path);
    if (args.has_seed) {
        cfg.seed = args.seed;
        cfg.has_eval_seed = false;  // rederive from the new seed
    }
    if (args.has_out) cfg.out_dir = args.out_dir;
    return cfg;
}

int run_scenarios_cmd(const CommonArgs& args, const std::vector<std::string>& scenarios) {
    tpg::ExperimentConfig cfg = load_with_overrides(args);
    if (!cfg.dataset_csv.empty() && !std::filesystem::exists(cfg.dataset_csv))
        throw std::runtime_error("dataset_csv '" + cfg.dataset_csv + "' does not exist");
    std::vector<tpg::ExperimentConfig> cfgs;
    for (const std::string& s : scenarios) {
        tpg::ExperimentConfig c = cfg;
        c.scenario = s;
        c.validate();
        cfgs.push_back(std::move(c));
    }
    const tpg::RunReport report = tpg::run_scenarios(cfgs, cfg.out_dir);
    std::cout << tpg::report_text(report);
    for (const auto& r : report.rows)
        if (!r.ok) return 1;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"three-player GAN toy experiment harness"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string checkpoint_path;

    CLI::App* train_baseline = app.add_subcommand("train-baseline", "supervised baseline classifier");
    CLI::App* train_cgan = app.add_subcommand("train-cgan", "conditional GAN pretraining");
    CLI::App* train_acgan = app.add_subcommand("train-acgan", "auxiliary-classifier GAN comparison");
    CLI::App* train_threeplayer =
        app.add_subcommand("train-threeplayer", "the full three-player game");
    CLI::App* toy_overlap =
        app.add_subcommand("toy-overlap", "frozen-classifier game, overlap concentration");
    CLI::App* render_surface =
        app.add_subcommand("render-surface", "rasterize a checkpointed classifier");
    CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpointed classifier");
    CLI::App* compare = app.add_subcommand("compare", "four-scenario comparison table");

    for (CLI::App* cmd : {train_baseline, train_cgan, train_acgan, train_threeplayer, toy_overlap,
                          render_surface, eval_cmd, compare})
        add_common(cmd, args);
    render_surface->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();
    eval_cmd->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (train_baseline->parsed()) return run_scenarios_cmd(args, {"baseline"});
        if (train_cgan->parsed()) return run_scenarios_cmd(args, {"cgan"});
        if (train_acgan->parsed()) return run_scenarios_cmd(args, {"acgan"});
        if (train_threeplayer->parsed()) return run_scenarios_cmd(args, {"three-player"});
        if (toy_overlap->parsed()) return run_scenarios_cmd(args, {"frozen-classifier-game"});
        if (compare->parsed())
            return run_scenarios_cmd(args, {"baseline", "cgan-augmented", "acgan", "three-player"});

        // eval / render-surface work from a saved classifier store
        tpg::ExperimentConfig cfg = load_with_overrides(args);
        const tpg::NamedStores stores = tpg::load_checkpoint(checkpoint_path);
        const tpg::ParameterStore* cls_params = nullptr;
        for (const auto& [name, store] : stores)
            if (name == "classifier") cls_params = &store;
        if (!cls_params)
            throw std::runtime_error("checkpoint '" + checkpoint_path + "' has no classifier store");
        const tpg::Net cls{cfg.classifier_spec(), *cls_params};

        if (eval_cmd->parsed()) {
            const tpg::Dataset test = tpg::build_test_data(cfg);
            const double acc =
                tpg::classify_accuracy(cls, cfg.game_config().cls_loss, test);
            std::cout << "accuracy " << tpg::format_double(acc) << " on " << test.size()
                      << " fresh samples\n";
            return 0;
        }
        // render-surface
        const tpg::SurfaceRaster raster = tpg::rasterize_surface(
            cls, cfg.game_config().cls_loss,
            {cfg.raster_min, cfg.raster_max, cfg.raster_min, cfg.raster_max},
            cfg.raster_resolution);
        std::filesystem::create_directories(cfg.out_dir);
        const std::string path =
            (std::filesystem::path(cfg.out_dir) / "surface.ppm").string();
        tpg::write_raster_ppm(raster, path,
                              {{0, {70, 110, 190}}, {1, {230, 150, 60}}, {-1, {255, 255, 255}}});
        std::cout << "wrote " << path << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
