#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tpg/games.hpp"
#include "tpg/toy.hpp"

namespace tpg {

// Flat `key = value` experiment configuration. Every field has a default
// except seed; echo() materializes all effective values and
// parse_config(echo()) reproduces the config exactly.
struct ExperimentConfig {
    // baseline | cgan | cgan-augmented | acgan | three-player |
    // frozen-classifier-game
    std::string scenario = "baseline";
    std::uint64_t seed = 0;
    bool has_seed = false;       // seed is required; no entropy defaults
    std::uint64_t eval_seed = 0;
    bool has_eval_seed = false;  // defaults to a stream derived from seed
    std::string out_dir = "out";

    // dataset: symmetric two-Gaussian pair unless a CSV is given
    std::string dataset_csv;
    double data_mean = 1.0;
    double data_sigma = 0.5;
    std::size_t train_per_class = 8;
    std::size_t test_per_class = 1000;

    // networks
    std::size_t latent_dim = 8;
    std::vector<std::size_t> g_hidden{32, 32};
    std::vector<std::size_t> d_hidden{32, 32};
    std::vector<std::size_t> c_hidden;  // empty = linear classifier
    std::string g_act = "relu";
    std::string d_act = "relu";
    std::string c_act = "relu";
    std::string c_loss = "hinge";  // hinge | xent

    // iteration counts, tuned for the 8-per-class toy task
    std::int64_t cgan_iters = 2000;
    std::int64_t game_iters = 2000;
    std::int64_t classifier_epochs = 2000;
    std::size_t batch = 16;   // m, shared by all three players in the game
    std::size_t c_batch = 0;  // standalone classifier trainings; 0 = batch

    // optimizers; the classifier rate/decay defaults fit the tiny linear
    // toy model (one Adam step per epoch at 16 samples)
    double mu0_gd = 2e-4;
    double mu0_c = 1e-2;
    double beta1_gd = 0.0;
    double beta2_gd = 0.9;
    double beta1_c = 0.5;
    double beta2_c = 0.999;
    double adam_eps = 1e-8;
    double weight_decay = 0.1;
    std::int64_t lr_decay_period = 800;
    double lr_decay_factor = 0.1;

    // schedules and game
    double w_c = 0.1;
    double alpha = 10.0;
    double beta = 0.75;
    double plan_real = 1.0 / 3.0;
    double plan_initial = 1.0 / 3.0;
    double plan_current = 1.0 / 3.0;
    bool non_saturating = false;
    double aug_fraction = 0.5;

    // toy metrics
    double tau = 0.5;
    double raster_min = -3.0;
    double raster_max = 3.0;
    std::size_t raster_resolution = 200;

    void validate() const;  // also fills nothing; pure checks
    std::uint64_t effective_eval_seed() const;
    std::size_t resolved_c_batch() const { return c_batch == 0 ? batch : c_batch; }

    GameConfig game_config() const;
    GameConfig classifier_config() const;  // game_config with the classifier batch
    GaussianClassSpec data_spec() const;
    MlpSpec generator_spec() const;
    MlpSpec discriminator_spec() const;
    MlpSpec classifier_spec() const;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string echo_config(const ExperimentConfig& cfg);

// shortest decimal form that parses back to the same double
std::string format_double(double v);

}  // namespace tpg
