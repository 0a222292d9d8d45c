#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "tpg/config.hpp"
#include "tpg/io.hpp"

namespace tpg {

// One completed (or failed) scenario. Fields that do not apply stay NaN and
// are omitted from reports.
struct ScenarioOutcome {
    std::string scenario;
    bool ok = false;
    std::string error;
    double accuracy = NAN;           // test accuracy on fresh samples
    double boundary_angle_deg = NAN; // linear toy classifiers
    double overlap_cgan = NAN;       // frozen-classifier-game: before
    double overlap_game = NAN;       // frozen-classifier-game: after
    double gen_mean_err = NAN;       // worst class-conditional mean L2 error
    double wall_s = 0.0;             // reported only in timing.txt
};

struct RunReport {
    std::vector<ScenarioOutcome> rows;
    std::string rng_algorithm;
    std::uint64_t seed = 0;
};

// dataset helpers shared by scenarios and tests
Dataset build_train_data(const ExperimentConfig& cfg);
Dataset build_test_data(const ExperimentConfig& cfg);
Net init_classifier(const ExperimentConfig& cfg);
CganResult pretrain_cgan(const ExperimentConfig& cfg, const Dataset& train);

// worst-class L2 distance between conditional sample means and the true means
double per_class_mean_error(const Dataset& samples, const GaussianClassSpec& spec);

// Runs one scenario, writing its artifacts (checkpoint, config echo, raster,
// sample scatter) under cfg.out_dir. Exceptions are captured into the
// outcome; they do not propagate.
ScenarioOutcome run_scenario(const ExperimentConfig& cfg);

// Runs each scenario in order; failures are recorded and the rest proceed.
// Writes report.txt, report.csv and timing.txt under out_dir.
RunReport run_scenarios(const std::vector<ExperimentConfig>& cfgs, const std::string& out_dir);

std::string report_text(const RunReport& report);
std::string report_csv(const RunReport& report);

}  // namespace tpg
