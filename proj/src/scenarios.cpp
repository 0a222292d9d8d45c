#include "tpg/scenarios.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace tpg {

namespace {

const std::map<int, Rgb> kSurfacePalette = {
    {0, {70, 110, 190}},   // class 0
    {1, {230, 150, 60}},   // class 1
    {-1, {255, 255, 255}}  // tie cells
};

void ensure_dir(const std::string& dir) { std::filesystem::create_directories(dir); }

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << content;
}

std::string path_join(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

RasterBounds raster_bounds(const ExperimentConfig& cfg) {
    return {cfg.raster_min, cfg.raster_max, cfg.raster_min, cfg.raster_max};
}

void write_surface(const ExperimentConfig& cfg, const Net& cls, const std::string& stem) {
    const SurfaceRaster raster = rasterize_surface(cls, cfg.game_config().cls_loss,
                                                   raster_bounds(cfg), cfg.raster_resolution);
    write_raster_ppm(raster, path_join(cfg.out_dir, stem + "_surface.ppm"), kSurfacePalette);
}

std::string trace_row(std::size_t i, const std::vector<double>& v) {
    return i < v.size() ? format_double(v[i]) : std::string();
}

void write_game_trace(const ExperimentConfig& cfg, const TrainTrace& t, const std::string& stem) {
    std::string out = "iter,d_objective,g_gan,g_cls,c_loss,lambda,mu\n";
    for (std::size_t i = 0; i < t.d_objective.size(); ++i) {
        out += std::to_string(i) + "," + trace_row(i, t.d_objective) + "," +
               trace_row(i, t.g_gan) + "," + trace_row(i, t.g_cls) + "," +
               trace_row(i, t.c_loss) + "," + trace_row(i, t.lambda) + "," +
               trace_row(i, t.mu_used) + "\n";
    }
    write_text(path_join(cfg.out_dir, stem + "_trace.csv"), out);
}

void write_classifier_trace(const ExperimentConfig& cfg, const ClassifierResult& r,
                            const std::string& stem) {
    std::string out = "epoch,loss,train_accuracy\n";
    for (std::size_t i = 0; i < r.loss_trace.size(); ++i)
        out += std::to_string(i) + "," + format_double(r.loss_trace[i]) + "," +
               format_double(r.train_acc_trace[i]) + "\n";
    write_text(path_join(cfg.out_dir, stem + "_classifier_trace.csv"), out);
}

Dataset generated_sample_set(const ExperimentConfig& cfg, const Net& gen, std::size_t n) {
    Rng rng = Rng::derive(cfg.effective_eval_seed(), streams::kGenerator);
    return sample_generator(gen, n, cfg.latent_dim, 2, rng);
}

void write_samples(const ExperimentConfig& cfg, const Net& gen, const std::string& stem) {
    save_dataset_csv(generated_sample_set(cfg, gen, 1000),
                     path_join(cfg.out_dir, stem + "_samples.csv"));
}

}  // namespace

Dataset build_train_data(const ExperimentConfig& cfg) {
    if (!cfg.dataset_csv.empty()) return load_dataset_csv(cfg.dataset_csv).samples;
    return sample_mixture(cfg.data_spec(), cfg.train_per_class,
                          Rng::derive(cfg.seed, streams::kData).next_u64());
}

Dataset build_test_data(const ExperimentConfig& cfg) {
    return sample_mixture(cfg.data_spec(), cfg.test_per_class, cfg.effective_eval_seed());
}

Net init_classifier(const ExperimentConfig& cfg) {
    const MlpSpec spec = cfg.classifier_spec();
    return {spec, init_xavier_sqrt2(spec, Rng::derive(cfg.seed, streams::kInitC).next_u64())};
}

CganResult pretrain_cgan(const ExperimentConfig& cfg, const Dataset& train) {
    const MlpSpec g_spec = cfg.generator_spec();
    const MlpSpec d_spec = cfg.discriminator_spec();
    Net gen{g_spec, init_xavier_sqrt2(g_spec, Rng::derive(cfg.seed, streams::kInitG).next_u64())};
    Net dis{d_spec, init_xavier_sqrt2(d_spec, Rng::derive(cfg.seed, streams::kInitD).next_u64())};
    return train_cgan(cfg.game_config(), std::move(gen), std::move(dis), train, cfg.seed,
                      cfg.cgan_iters);
}

double per_class_mean_error(const Dataset& samples, const GaussianClassSpec& spec) {
    double worst = 0.0;
    for (std::size_t c = 0; c < spec.classes.size(); ++c) {
        double sx = 0.0, sy = 0.0;
        std::size_t n = 0;
        for (const auto& s : samples)
            if (s.label == static_cast<int>(c)) {
                sx += s.features[0];
                sy += s.features[1];
                ++n;
            }
        if (n == 0) return HUGE_VAL;  // a class the generator never produced
        const double dx = sx / static_cast<double>(n) - spec.classes[c].mean[0];
        const double dy = sy / static_cast<double>(n) - spec.classes[c].mean[1];
        worst = std::max(worst, std::hypot(dx, dy));
    }
    return worst;
}

namespace {

ScenarioOutcome run_scenario_inner(const ExperimentConfig& cfg) {
    ScenarioOutcome out;
    out.scenario = cfg.scenario;
    ensure_dir(cfg.out_dir);
    write_text(path_join(cfg.out_dir, cfg.scenario + "_config.txt"), echo_config(cfg));

    const Dataset train = build_train_data(cfg);
    const Dataset test = build_test_data(cfg);
    const GameConfig game = cfg.game_config();
    const GaussianClassSpec spec = cfg.data_spec();
    const bool linear_cls = cfg.c_hidden.empty() && cfg.c_loss == "hinge";

    auto finish_classifier = [&](const Net& cls, const std::string& stem) {
        out.accuracy = classify_accuracy(cls, game.cls_loss, test);
        if (linear_cls) out.boundary_angle_deg = boundary_angle(cls);
        write_surface(cfg, cls, stem);
    };

    const GameConfig cls_cfg = cfg.classifier_config();

    if (cfg.scenario == "baseline") {
        const ClassifierResult r =
            train_classifier(cls_cfg, train, nullptr, 0.0, init_classifier(cfg), cfg.seed,
                             cfg.classifier_epochs, cfg.lr_decay_period, cfg.lr_decay_factor);
        finish_classifier(r.cls, cfg.scenario);
        write_classifier_trace(cfg, r, cfg.scenario);
        save_checkpoint({{"classifier", r.cls.params}}, path_join(cfg.out_dir, "baseline.ckpt"));
    } else if (cfg.scenario == "cgan") {
        const CganResult r = pretrain_cgan(cfg, train);
        const Dataset samples = generated_sample_set(cfg, r.gen, 1000);
        out.gen_mean_err = per_class_mean_error(samples, spec);
        // Table-1 style "without real data": a classifier trained purely on
        // synthesized samples
        Rng rng = Rng::derive(cfg.seed, streams::kEval);
        const Dataset synth = sample_generator(r.gen, train.size(), cfg.latent_dim, 2, rng);
        const ClassifierResult c =
            train_classifier(cls_cfg, synth, nullptr, 0.0, init_classifier(cfg), cfg.seed,
                             cfg.classifier_epochs, cfg.lr_decay_period, cfg.lr_decay_factor);
        finish_classifier(c.cls, cfg.scenario);
        write_game_trace(cfg, r.trace, cfg.scenario);
        write_classifier_trace(cfg, c, cfg.scenario);
        write_samples(cfg, r.gen, cfg.scenario);
        save_checkpoint({{"generator", r.gen.params},
                         {"discriminator", r.dis.params},
                         {"classifier", c.cls.params}},
                        path_join(cfg.out_dir, "cgan.ckpt"));
    } else if (cfg.scenario == "cgan-augmented") {
        const CganResult r = pretrain_cgan(cfg, train);
        const ClassifierResult c =
            train_classifier(cls_cfg, train, &r.gen, cfg.aug_fraction, init_classifier(cfg),
                             cfg.seed, cfg.classifier_epochs, cfg.lr_decay_period,
                             cfg.lr_decay_factor);
        finish_classifier(c.cls, cfg.scenario);
        write_game_trace(cfg, r.trace, cfg.scenario);
        write_classifier_trace(cfg, c, cfg.scenario);
        write_samples(cfg, r.gen, cfg.scenario);
        save_checkpoint({{"generator", r.gen.params},
                         {"discriminator", r.dis.params},
                         {"classifier", c.cls.params}},
                        path_join(cfg.out_dir, "cgan-augmented.ckpt"));
    } else if (cfg.scenario == "acgan") {
        const MlpSpec g_spec = cfg.generator_spec();
        if (cfg.d_hidden.empty())
            throw std::invalid_argument("acgan: d_hidden must be nonempty (head trunk)");
        MlpSpec trunk;
        trunk.layer_sizes.push_back(2);
        for (std::size_t h : cfg.d_hidden) trunk.layer_sizes.push_back(h);
        trunk.hidden = cfg.d_act == "tanh" ? Nonlinearity::kTanh : Nonlinearity::kRelu;
        const AcganDiscriminator dis{trunk, 2};
        Net gen{g_spec,
                init_xavier_sqrt2(g_spec, Rng::derive(cfg.seed, streams::kInitG).next_u64())};
        ParameterStore dis_params =
            init_acgan_discriminator(dis, Rng::derive(cfg.seed, streams::kInitD).next_u64());
        const AcganResult r = train_acgan(game, std::move(gen), dis, std::move(dis_params), train,
                                          cfg.seed, cfg.cgan_iters);
        const std::vector<int> pred = acgan_classify(r.dis, r.dis_params, features_matrix(test));
        std::size_t hits = 0;
        for (std::size_t i = 0; i < test.size(); ++i)
            if (pred[i] == test[i].label) ++hits;
        out.accuracy = static_cast<double>(hits) / static_cast<double>(test.size());
        write_game_trace(cfg, r.trace, cfg.scenario);
        write_samples(cfg, r.gen, cfg.scenario);
        save_checkpoint({{"generator", r.gen.params}, {"discriminator", r.dis_params}},
                        path_join(cfg.out_dir, "acgan.ckpt"));
    } else if (cfg.scenario == "three-player") {
        const CganResult pre = pretrain_cgan(cfg, train);
        const ThreePlayerResult r = train_three_player(game, train, pre.gen, pre.dis,
                                                       init_classifier(cfg), cfg.seed,
                                                       cfg.game_iters);
        finish_classifier(r.cls, cfg.scenario);
        write_game_trace(cfg, r.trace, cfg.scenario);
        out.gen_mean_err = per_class_mean_error(generated_sample_set(cfg, r.gen, 1000), spec);
        write_samples(cfg, r.gen, cfg.scenario);
        save_checkpoint({{"generator", r.gen.params},
                         {"discriminator", r.dis.params},
                         {"classifier", r.cls.params},
                         {"initial_generator", r.initial_gen}},
                        path_join(cfg.out_dir, "three-player.ckpt"));
    } else if (cfg.scenario == "frozen-classifier-game") {
        // the toy-overlap experiment: freeze the baseline classifier and let
        // the generator seek its hard samples
        const ClassifierResult base =
            train_classifier(cls_cfg, train, nullptr, 0.0, init_classifier(cfg), cfg.seed,
                             cfg.classifier_epochs, cfg.lr_decay_period, cfg.lr_decay_factor);
        const CganResult pre = pretrain_cgan(cfg, train);
        out.overlap_cgan =
            overlap_score(generated_sample_set(cfg, pre.gen, 1000), spec, cfg.tau);
        GameConfig frozen = game;
        frozen.freeze_classifier = true;
        std::string overlap_trace = "iter,overlap\n";
        const std::int64_t every = std::max<std::int64_t>(1, cfg.game_iters / 20);
        const GameObserver observer = [&](const GameState& st, std::int64_t iter) {
            if (iter % every != 0 && iter != cfg.game_iters - 1) return;
            Rng rng = Rng::derive(cfg.effective_eval_seed(),
                                  1000 + static_cast<std::uint64_t>(iter));
            const Dataset probe =
                sample_generator(st.gen, 500, cfg.latent_dim, 2, rng);
            overlap_trace += std::to_string(iter) + "," +
                             format_double(overlap_score(probe, spec, cfg.tau)) + "\n";
        };
        const ThreePlayerResult r = train_three_player(frozen, train, pre.gen, pre.dis, base.cls,
                                                       cfg.seed, cfg.game_iters, observer);
        write_text(path_join(cfg.out_dir, cfg.scenario + "_overlap_trace.csv"), overlap_trace);
        out.overlap_game =
            overlap_score(generated_sample_set(cfg, r.gen, 1000), spec, cfg.tau);
        write_game_trace(cfg, r.trace, cfg.scenario);
        write_classifier_trace(cfg, base, cfg.scenario);
        finish_classifier(r.cls, cfg.scenario);
        write_samples(cfg, r.gen, cfg.scenario);
        save_checkpoint({{"generator", r.gen.params},
                         {"discriminator", r.dis.params},
                         {"classifier", r.cls.params},
                         {"initial_generator", r.initial_gen}},
                        path_join(cfg.out_dir, "frozen-classifier-game.ckpt"));
    } else {
        throw std::invalid_argument("unknown scenario '" + cfg.scenario + "'");
    }
    out.ok = true;
    return out;
}

}  // namespace

ScenarioOutcome run_scenario(const ExperimentConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    ScenarioOutcome out;
    try {
        out = run_scenario_inner(cfg);
    } catch (const std::exception& e) {
        out.scenario = cfg.scenario;
        out.ok = false;
        out.error = e.what();
    }
    out.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

RunReport run_scenarios(const std::vector<ExperimentConfig>& cfgs, const std::string& out_dir) {
    RunReport report;
    report.rng_algorithm = Rng::kAlgorithmId;
    if (!cfgs.empty()) report.seed = cfgs.front().seed;
    for (const auto& cfg : cfgs) report.rows.push_back(run_scenario(cfg));

    ensure_dir(out_dir);
    write_text(path_join(out_dir, "report.txt"), report_text(report));
    write_text(path_join(out_dir, "report.csv"), report_csv(report));
    std::string timing = "scenario,wall_s\n";
    for (const auto& r : report.rows)
        timing += r.scenario + "," + format_double(r.wall_s) + "\n";
    write_text(path_join(out_dir, "timing.txt"), timing);
    return report;
}

namespace {

std::string field(double v) { return std::isnan(v) ? std::string() : format_double(v); }

}  // namespace

std::string report_text(const RunReport& report) {
    auto pad = [](std::string v, std::size_t w) {
        v.resize(std::max(w, v.size() + 2), ' ');
        return v;
    };
    std::string s;
    s += "seed: " + std::to_string(report.seed) + "\n";
    s += "rng: " + report.rng_algorithm + "\n\n";
    s += pad("scenario", 25) + pad("status", 8) + pad("accuracy", 14) +
         pad("boundary_angle", 20) + pad("overlap(cgan->game)", 24) + "gen_mean_err\n";
    for (const auto& r : report.rows) {
        std::string row = pad(r.scenario, 25);
        row += pad(r.ok ? "ok" : "FAILED", 8);
        row += pad(field(r.accuracy), 14);
        row += pad(field(r.boundary_angle_deg), 20);
        std::string ov;
        if (!std::isnan(r.overlap_cgan)) ov = field(r.overlap_cgan) + " -> " + field(r.overlap_game);
        row += pad(ov, 24);
        row += field(r.gen_mean_err);
        if (!r.ok) row += "  error: " + r.error;
        s += row + "\n";
    }

    const ScenarioOutcome* base = nullptr;
    const ScenarioOutcome* three = nullptr;
    for (const auto& r : report.rows) {
        if (r.scenario == "baseline" && r.ok) base = &r;
        if (r.scenario == "three-player" && r.ok) three = &r;
    }
    if (base && three) {
        const bool holds = three->accuracy >= base->accuracy - 0.01;
        s += "\nordering: three-player accuracy >= baseline - 1pp: ";
        s += holds ? "yes" : "NO";
        s += " (" + field(three->accuracy) + " vs " + field(base->accuracy) + ")\n";
    }
    return s;
}

std::string report_csv(const RunReport& report) {
    std::string s = "scenario,ok,accuracy,boundary_angle_deg,overlap_cgan,overlap_game,gen_mean_err,error\n";
    for (const auto& r : report.rows) {
        s += r.scenario + "," + (r.ok ? "1" : "0") + "," + field(r.accuracy) + "," +
             field(r.boundary_angle_deg) + "," + field(r.overlap_cgan) + "," +
             field(r.overlap_game) + "," + field(r.gen_mean_err) + "," + r.error + "\n";
    }
    return s;
}

}  // namespace tpg
