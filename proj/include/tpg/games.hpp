#pragma once

#include <array>
#include <functional>
#include <cstdint>
#include <optional>
#include <vector>

#include "tpg/losses.hpp"
#include "tpg/mlp.hpp"
#include "tpg/optim.hpp"
#include "tpg/rng.hpp"

namespace tpg {

struct LabeledSample {
    DenseArray features;  // rank-1 [dim]
    int label = 0;
};
using Dataset = std::vector<LabeledSample>;

DenseArray features_matrix(const Dataset& data);
std::vector<int> labels_of(const Dataset& data);
Dataset draw_batch(const Dataset& data, std::size_t m, Rng& rng);  // with replacement

// Classifier batch composition: fractions of real samples, samples from the
// frozen initial generator, and samples from the current generator.
struct BatchPlan {
    double real = 1.0;
    double initial_gen = 0.0;
    double current_gen = 0.0;

    void validate() const;  // nonnegative, sum to 1 within 1e-9
    // integer split of m by largest remainder; ties go to the lower index
    std::array<std::size_t, 3> counts(std::size_t m) const;
};

enum class ClassifierLoss { kHinge, kCrossEntropy };

struct Net {
    MlpSpec spec;
    ParameterStore params;
};

// role-stream ids under one master seed (Rng::derive)
namespace streams {
constexpr std::uint64_t kDiscriminator = 1;
constexpr std::uint64_t kGenerator = 2;
constexpr std::uint64_t kClassifier = 3;
constexpr std::uint64_t kInitG = 4;
constexpr std::uint64_t kInitD = 5;
constexpr std::uint64_t kInitC = 6;
constexpr std::uint64_t kEval = 7;
constexpr std::uint64_t kData = 8;
}  // namespace streams

struct GameConfig {
    std::size_t latent_dim = 8;
    std::size_t num_classes = 2;
    std::size_t batch = 16;  // m
    bool non_saturating = false;
    bool freeze_classifier = false;
    ClassifierLoss cls_loss = ClassifierLoss::kHinge;
    AdamParams adam_gd{0.0, 0.9, 1e-8};
    AdamParams adam_c{0.5, 0.999, 1e-8};
    double mu0_gd = 2e-4;
    double mu0_c = 1e-3;
    double weight_decay_c = 1e-4;
    double w_c = 0.1;
    double alpha = 10.0;
    double beta = 0.75;
    BatchPlan plan{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
};

// The full triple (theta_d, theta_g, theta_c) plus the frozen copy of the
// initial generator and per-player optimizer state. Each player draws from
// its own rng stream so that skipping one player's update leaves the others'
// draw sequences untouched.
struct GameState {
    GameConfig cfg;
    Net gen;
    Net dis;
    std::optional<Net> cls;
    ParameterStore initial_gen;  // snapshotted at construction, never updated
    AdamState opt_g, opt_d, opt_c;
    std::int64_t iter = 0;
    Rng rng_d, rng_g, rng_c;

    GameState(GameConfig cfg, Net gen, Net dis, std::optional<Net> cls, std::uint64_t seed);
};

struct GenBatch {
    DenseArray z;  // [m, latent_dim]
    std::vector<int> labels;
};
GenBatch draw_gen_batch(std::size_t m, std::size_t latent_dim, std::size_t num_classes, Rng& rng);

// z ~ N(0,I), labels uniform; returns G(z,y) paired with the conditioning
// labels, detached from any graph.
Dataset sample_generator(const Net& gen, std::size_t m, std::size_t latent_dim,
                         std::size_t num_classes, Rng& rng);

// One ascent step on (1/m) sum log D(x,y) + (1/m) sum log(1-D(xg,yg)).
// Fake samples enter as constants, so nothing propagates into theta_g.
// Returns the objective before the step.
double discriminator_step(GameState& state, const Dataset& real_batch, const Dataset& fake_batch,
                          double mu);

struct StepLosses {
    double gan = 0.0;
    double cls = 0.0;
};

// One descent step for the generator: the GAN term plus, when a classifier
// is attached and lambda > 0, the classifier loss on generated samples
// routed through a gradient-reversal gate. theta_d and theta_c stay fixed.
StepLosses generator_step(GameState& state, double lambda, double mu);
StepLosses generator_step_on_batch(GameState& state, double lambda, double mu,
                                   const GenBatch& batch);

// d(generator objective)/d(theta_g) at the given lambda on a fixed batch;
// parameters and optimizer state stay untouched. The classifier-path term is
// the difference against lambda=0.
ParameterStore generator_gradients(const GameState& state, double lambda, const GenBatch& batch);

// One descent step on the classifier loss over a batch mixed per plan from
// real data, the initial generator, and the current generator. Generated
// features enter as constants. Returns the loss before the step.
double classifier_step(GameState& state, const BatchPlan& plan, const Dataset& real_data,
                       double mu);

struct TrainTrace {
    std::vector<double> d_objective, g_gan, g_cls, c_loss, lambda, mu_used;
};

struct CganResult {
    Net gen, dis;
    TrainTrace trace;
};

// Conditional-GAN pretraining: alternating discriminator and lambda=0
// generator updates at fixed learning rate.
CganResult train_cgan(const GameConfig& cfg, Net gen, Net dis, const Dataset& data,
                      std::uint64_t seed, std::int64_t iterations);

struct ThreePlayerResult {
    Net gen, dis, cls;
    ParameterStore initial_gen;
    TrainTrace trace;
};

// Observer invoked after each finished iteration (0-based index); it sees
// the live state but must not mutate it or touch its rng streams.
using GameObserver = std::function<void(const GameState&, std::int64_t)>;

// The three-player game: per iteration one discriminator, one generator
// (lambda(p)-weighted reversal) and one classifier update, with p advancing
// linearly 0 -> 1 and learning rates mu(p). freeze_classifier skips the
// classifier update, leaving its parameters at the supplied initialization.
ThreePlayerResult train_three_player(const GameConfig& cfg, const Dataset& data, Net pretrained_gen,
                                     Net pretrained_dis, Net classifier_init, std::uint64_t seed,
                                     std::int64_t iterations, const GameObserver& observer = {});

// ACGAN comparison: the discriminator carries a source head and a class
// head; its generator *descends* the class loss, the sign opposite to the
// three-player game.
struct AcganDiscriminator {
    MlpSpec trunk;               // activation applied after the last trunk layer too
    std::size_t num_classes = 2;
};

ParameterStore init_acgan_discriminator(const AcganDiscriminator& d, std::uint64_t seed);

struct AcganHeads {
    Var source;        // [m,1] sigmoid
    Var class_logits;  // [m,C]
};
AcganHeads acgan_forward(const AcganDiscriminator& d, const GraphNet& net, const Var& x);

struct AcganResult {
    Net gen;
    AcganDiscriminator dis;
    ParameterStore dis_params;
    TrainTrace trace;
};

AcganResult train_acgan(const GameConfig& cfg, Net gen, const AcganDiscriminator& dis,
                        ParameterStore dis_params, const Dataset& data, std::uint64_t seed,
                        std::int64_t iterations);

// class predictions from the ACGAN auxiliary head
std::vector<int> acgan_classify(const AcganDiscriminator& d, const ParameterStore& params,
                                const DenseArray& X);

struct ClassifierResult {
    Net cls;
    std::vector<double> loss_trace;
    std::vector<double> train_acc_trace;
};

// Supervised training with optional generator augmentation: each batch mixes
// real and generated samples (conditioning labels taken as ground truth).
ClassifierResult train_classifier(const GameConfig& cfg, const Dataset& data,
                                  const Net* augment_gen, double aug_fraction, Net cls_init,
                                  std::uint64_t seed, std::int64_t epochs,
                                  std::int64_t decay_period, double decay_factor);

// plain forward evaluation (no gradients kept)
DenseArray net_eval(const Net& net, const DenseArray& X, const std::vector<int>* labels,
                    std::size_t num_classes);

// signed two-class score: hinge -> raw score, cross-entropy -> logit1 - logit0
std::vector<double> classifier_scores(const Net& cls, ClassifierLoss kind, const DenseArray& X);
std::vector<int> classify(const Net& cls, ClassifierLoss kind, const DenseArray& X);
double classify_accuracy(const Net& cls, ClassifierLoss kind, const Dataset& test);

std::vector<int> to_pm1(const std::vector<int>& class_ids);  // {0,1} -> {-1,+1}

}  // namespace tpg
