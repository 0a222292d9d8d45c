#include "tpg/games.hpp"

#include <cmath>
#include <stdexcept>

namespace tpg {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

void check_finite(double v, const std::string& what) {
    if (!std::isfinite(v))
        throw std::runtime_error(what + " is non-finite (" + std::to_string(v) + "); aborting run");
}

Var one_minus(const Var& v) { return add_const(scale(v, -1.0), 1.0); }

// classifier loss on a feature node; the classifier itself is never
// label-conditioned
Var classifier_loss(const GraphNet& cnet, ClassifierLoss kind, const Var& x,
                    const std::vector<int>& labels) {
    if (kind == ClassifierLoss::kHinge) return hinge_loss(cnet(x), to_pm1(labels));
    return cross_entropy_loss(cnet(x), labels);
}

Var gan_generator_loss(const Var& fake_scores, bool non_saturating) {
    if (non_saturating) return scale(mean(safe_log(fake_scores)), -1.0);
    return mean(safe_log(one_minus(fake_scores)));
}

}  // namespace

DenseArray features_matrix(const Dataset& data) {
    require(!data.empty(), "features_matrix: empty dataset");
    const std::size_t dim = data[0].features.size();
    DenseArray X({data.size(), dim});
    for (std::size_t r = 0; r < data.size(); ++r) {
        require(data[r].features.size() == dim, "features_matrix: ragged feature widths");
        for (std::size_t c = 0; c < dim; ++c) X.at(r, c) = data[r].features[c];
    }
    return X;
}

std::vector<int> labels_of(const Dataset& data) {
    std::vector<int> y(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) y[i] = data[i].label;
    return y;
}

Dataset draw_batch(const Dataset& data, std::size_t m, Rng& rng) {
    require(!data.empty(), "draw_batch: empty dataset");
    Dataset batch;
    batch.reserve(m);
    for (std::size_t i = 0; i < m; ++i) batch.push_back(data[rng.uniform_index(data.size())]);
    return batch;
}

void BatchPlan::validate() const {
    require(real >= 0.0 && initial_gen >= 0.0 && current_gen >= 0.0,
            "BatchPlan: fractions must be nonnegative");
    require(std::abs(real + initial_gen + current_gen - 1.0) <= 1e-9,
            "BatchPlan: fractions must sum to 1");
}

std::array<std::size_t, 3> BatchPlan::counts(std::size_t m) const {
    validate();
    const double fs[3] = {real, initial_gen, current_gen};
    std::array<std::size_t, 3> n{};
    double rem[3];
    std::size_t used = 0;
    for (int i = 0; i < 3; ++i) {
        const double exact = fs[i] * static_cast<double>(m);
        n[i] = static_cast<std::size_t>(std::floor(exact));
        rem[i] = exact - std::floor(exact);
        used += n[i];
    }
    while (used < m) {
        int best = 0;
        for (int i = 1; i < 3; ++i)
            if (rem[i] > rem[best]) best = i;
        n[best] += 1;
        rem[best] = -1.0;
        ++used;
    }
    return n;
}

std::vector<int> to_pm1(const std::vector<int>& class_ids) {
    std::vector<int> out(class_ids.size());
    for (std::size_t i = 0; i < class_ids.size(); ++i) {
        require(class_ids[i] == 0 || class_ids[i] == 1, "to_pm1: class id " +
                                                            std::to_string(class_ids[i]) +
                                                            " not binary");
        out[i] = class_ids[i] == 0 ? -1 : 1;
    }
    return out;
}

GameState::GameState(GameConfig cfg_, Net gen_, Net dis_, std::optional<Net> cls_,
                     std::uint64_t seed)
    : cfg(cfg_),
      gen(std::move(gen_)),
      dis(std::move(dis_)),
      cls(std::move(cls_)),
      initial_gen(gen.params),
      opt_g(gen.params, cfg.adam_gd),
      opt_d(dis.params, cfg.adam_gd),
      rng_d(Rng::derive(seed, streams::kDiscriminator)),
      rng_g(Rng::derive(seed, streams::kGenerator)),
      rng_c(Rng::derive(seed, streams::kClassifier)) {
    require(cfg.batch > 0, "GameState: batch size must be > 0");
    require(!gen.params.empty(), "GameState: generator parameters missing");
    require(!dis.params.empty(), "GameState: discriminator parameters missing");
    if (cls) opt_c = AdamState(cls->params, cfg.adam_c);
}

GenBatch draw_gen_batch(std::size_t m, std::size_t latent_dim, std::size_t num_classes, Rng& rng) {
    GenBatch b;
    b.labels.resize(m);
    for (std::size_t i = 0; i < m; ++i)
        b.labels[i] = static_cast<int>(rng.uniform_index(num_classes));
    b.z = DenseArray({m, latent_dim});
    for (std::size_t i = 0; i < b.z.size(); ++i) b.z[i] = rng.normal();
    return b;
}

Dataset sample_generator(const Net& gen, std::size_t m, std::size_t latent_dim,
                         std::size_t num_classes, Rng& rng) {
    require(m > 0, "sample_generator: m must be > 0");
    const GenBatch b = draw_gen_batch(m, latent_dim, num_classes, rng);
    const DenseArray X = net_eval(gen, b.z, &b.labels, num_classes);
    Dataset out;
    out.reserve(m);
    for (std::size_t r = 0; r < m; ++r) {
        DenseArray f({X.cols()});
        for (std::size_t c = 0; c < X.cols(); ++c) f[c] = X.at(r, c);
        out.push_back({std::move(f), b.labels[r]});
    }
    return out;
}

double discriminator_step(GameState& state, const Dataset& real_batch, const Dataset& fake_batch,
                          double mu) {
    require(!real_batch.empty() && real_batch.size() == fake_batch.size(),
            "discriminator_step: real and fake batches must be the same nonzero size");
    const std::size_t nc = state.cfg.num_classes;

    GraphNet d = materialize(state.dis.spec, state.dis.params);
    const Var xr = Var::leaf(features_matrix(real_batch), "x_real");
    const Var xf = Var::leaf(features_matrix(fake_batch), "x_fake");
    const std::vector<int> yr = labels_of(real_batch);
    const std::vector<int> yf = labels_of(fake_batch);

    const Var sr = mlp_forward(d, xr, &yr, nc);
    const Var sf = mlp_forward(d, xf, &yf, nc);
    const Var objective = add(mean(safe_log(sr)), mean(safe_log(one_minus(sf))));
    check_finite(objective.scalar(), "discriminator objective");

    backward(scale(objective, -1.0));  // ascend
    adam_step(state.dis.params, d.gradients(state.dis.params), state.opt_d, mu);
    return objective.scalar();
}

StepLosses generator_step(GameState& state, double lambda, double mu) {
    const GenBatch batch = draw_gen_batch(state.cfg.batch, state.cfg.latent_dim,
                                          state.cfg.num_classes, state.rng_g);
    return generator_step_on_batch(state, lambda, mu, batch);
}

namespace {

struct GeneratorGraph {
    GraphNet g;
    Var root;
    StepLosses losses;
};

GeneratorGraph build_generator_graph(const GameState& state, double lambda,
                                     const GenBatch& batch) {
    require(lambda >= 0.0, "generator_step: lambda must be >= 0");
    const std::size_t nc = state.cfg.num_classes;

    GeneratorGraph out;
    out.g = materialize(state.gen.spec, state.gen.params);
    GraphNet d = materialize(state.dis.spec, state.dis.params);
    const Var z = Var::leaf(batch.z, "z");

    const Var xg = mlp_forward(out.g, z, &batch.labels, nc);
    const Var scores = mlp_forward(d, xg, &batch.labels, nc);
    const Var gan = gan_generator_loss(scores, state.cfg.non_saturating);
    out.losses.gan = gan.scalar();
    check_finite(out.losses.gan, "generator GAN loss");

    out.root = gan;
    if (state.cls && lambda > 0.0) {
        GraphNet c = materialize(state.cls->spec, state.cls->params);
        const Var reversed = gradient_reversal(xg, lambda);
        const Var closs = classifier_loss(c, state.cfg.cls_loss, reversed, batch.labels);
        out.losses.cls = closs.scalar();
        check_finite(out.losses.cls, "generator classifier loss");
        out.root = add(gan, closs);
    } else if (state.cls) {
        // lambda == 0: report the classifier loss without touching the graph,
        // keeping the update bit-identical to a plain cGAN generator step
        GraphNet c = materialize(state.cls->spec, state.cls->params);
        const Var detached = Var::leaf(xg.value(), "x_g");
        out.losses.cls = classifier_loss(c, state.cfg.cls_loss, detached, batch.labels).scalar();
    }
    return out;
}

}  // namespace

StepLosses generator_step_on_batch(GameState& state, double lambda, double mu,
                                   const GenBatch& batch) {
    GeneratorGraph graph = build_generator_graph(state, lambda, batch);
    backward(graph.root);
    adam_step(state.gen.params, graph.g.gradients(state.gen.params), state.opt_g, mu);
    return graph.losses;
}

ParameterStore generator_gradients(const GameState& state, double lambda, const GenBatch& batch) {
    GeneratorGraph graph = build_generator_graph(state, lambda, batch);
    backward(graph.root);
    return graph.g.gradients(state.gen.params);
}

double classifier_step(GameState& state, const BatchPlan& plan, const Dataset& real_data,
                       double mu) {
    require(!real_data.empty(), "classifier_step: real data must be nonempty");
    if (!state.cls) throw std::logic_error("classifier_step: no classifier in the game");
    const auto [n_real, n_init, n_cur] = plan.counts(state.cfg.batch);

    Dataset batch;
    batch.reserve(state.cfg.batch);
    for (const auto& s : draw_batch(real_data, n_real, state.rng_c)) batch.push_back(s);
    if (n_init > 0) {
        const Net g0{state.gen.spec, state.initial_gen};
        for (auto& s : sample_generator(g0, n_init, state.cfg.latent_dim, state.cfg.num_classes,
                                        state.rng_c))
            batch.push_back(std::move(s));
    }
    if (n_cur > 0) {
        for (auto& s : sample_generator(state.gen, n_cur, state.cfg.latent_dim,
                                        state.cfg.num_classes, state.rng_c))
            batch.push_back(std::move(s));
    }

    GraphNet c = materialize(state.cls->spec, state.cls->params);
    const Var x = Var::leaf(features_matrix(batch), "x_cls");
    const Var loss = classifier_loss(c, state.cfg.cls_loss, x, labels_of(batch));
    check_finite(loss.scalar(), "classifier loss");

    backward(loss);
    adam_step(state.cls->params, c.gradients(state.cls->params), state.opt_c, mu,
              state.cfg.weight_decay_c);
    return loss.scalar();
}

namespace {

// shared loop body for cGAN and three-player training
void run_game_iteration(GameState& state, const Dataset& data, double lambda, double mu_gd,
                        double mu_c, bool update_classifier, TrainTrace& trace) {
    const Dataset real = draw_batch(data, state.cfg.batch, state.rng_d);
    const Dataset fake = sample_generator(state.gen, state.cfg.batch, state.cfg.latent_dim,
                                          state.cfg.num_classes, state.rng_d);
    trace.d_objective.push_back(discriminator_step(state, real, fake, mu_gd));

    const StepLosses g = generator_step(state, lambda, mu_gd);
    trace.g_gan.push_back(g.gan);
    trace.g_cls.push_back(g.cls);

    if (update_classifier) {
        trace.c_loss.push_back(classifier_step(state, state.cfg.plan, data, mu_c));
    }
    trace.lambda.push_back(lambda);
    trace.mu_used.push_back(mu_gd);
    state.iter += 1;
}

[[noreturn]] void rethrow_at(std::int64_t iter, const std::exception& e) {
    throw std::runtime_error("iteration " + std::to_string(iter) + ": " + e.what());
}

}  // namespace

CganResult train_cgan(const GameConfig& cfg, Net gen, Net dis, const Dataset& data,
                      std::uint64_t seed, std::int64_t iterations) {
    require(iterations >= 0, "train_cgan: negative iteration count");
    GameState state(cfg, std::move(gen), std::move(dis), std::nullopt, seed);
    TrainTrace trace;
    for (std::int64_t i = 0; i < iterations; ++i) {
        try {
            run_game_iteration(state, data, 0.0, cfg.mu0_gd, cfg.mu0_c, false, trace);
        } catch (const std::runtime_error& e) {
            rethrow_at(i, e);
        }
    }
    return {std::move(state.gen), std::move(state.dis), std::move(trace)};
}

ThreePlayerResult train_three_player(const GameConfig& cfg, const Dataset& data, Net pretrained_gen,
                                     Net pretrained_dis, Net classifier_init, std::uint64_t seed,
                                     std::int64_t iterations, const GameObserver& observer) {
    require(iterations >= 0, "train_three_player: negative iteration count");
    require(!pretrained_gen.params.empty() && !pretrained_dis.params.empty(),
            "train_three_player: pretrained generator and discriminator are required");
    require(!classifier_init.params.empty(), "train_three_player: classifier init is required");

    GameState state(cfg, std::move(pretrained_gen), std::move(pretrained_dis),
                    std::move(classifier_init), seed);
    TrainTrace trace;
    for (std::int64_t i = 0; i < iterations; ++i) {
        const double p =
            iterations > 1 ? static_cast<double>(i) / static_cast<double>(iterations - 1) : 0.0;
        ScheduleParams sched{p, cfg.w_c, cfg.alpha, cfg.beta, cfg.mu0_gd};
        const double lambda = lambda_schedule(sched);
        const double mu_gd = lr_schedule(sched);
        sched.mu0 = cfg.mu0_c;
        const double mu_c = lr_schedule(sched);
        try {
            run_game_iteration(state, data, lambda, mu_gd, mu_c, !cfg.freeze_classifier, trace);
        } catch (const std::runtime_error& e) {
            rethrow_at(i, e);
        }
        if (observer) observer(state, i);
    }
    return {std::move(state.gen), std::move(state.dis), std::move(*state.cls),
            std::move(state.initial_gen), std::move(trace)};
}

ParameterStore init_acgan_discriminator(const AcganDiscriminator& d, std::uint64_t seed) {
    d.trunk.validate();
    ParameterStore params = init_xavier_sqrt2(d.trunk, seed);
    const std::size_t width = d.trunk.output_width();
    Rng rng(Rng::derive(seed, 101).next_u64());
    auto head = [&](std::size_t out) {
        const double stddev =
            std::sqrt(2.0) * std::sqrt(2.0 / static_cast<double>(width + out));
        DenseArray w({width, out});
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = rng.normal(0.0, stddev);
        return w;
    };
    params.add("Ws", head(1));
    params.add("bs", DenseArray::zeros({1}));
    params.add("Wc", head(d.num_classes));
    params.add("bc", DenseArray::zeros({d.num_classes}));
    return params;
}

AcganHeads acgan_forward(const AcganDiscriminator& d, const GraphNet& net, const Var& x) {
    // trunk leaves come first, then Ws, bs, Wc, bc
    const std::size_t trunk_leaves = 2 * (d.trunk.layer_sizes.size() - 1);
    GraphNet trunk{&d.trunk, {net.leaves.begin(), net.leaves.begin() + trunk_leaves}};
    Var h = trunk(x);
    h = d.trunk.hidden == Nonlinearity::kRelu ? relu(h) : tanh(h);
    const Var& ws = net.leaves[trunk_leaves];
    const Var& bs = net.leaves[trunk_leaves + 1];
    const Var& wc = net.leaves[trunk_leaves + 2];
    const Var& bc = net.leaves[trunk_leaves + 3];
    return {sigmoid(add(matmul(h, ws), bs)), add(matmul(h, wc), bc)};
}

AcganResult train_acgan(const GameConfig& cfg, Net gen, const AcganDiscriminator& dis,
                        ParameterStore dis_params, const Dataset& data, std::uint64_t seed,
                        std::int64_t iterations) {
    require(iterations >= 0, "train_acgan: negative iteration count");
    const std::size_t nc = cfg.num_classes;
    Rng rng_d = Rng::derive(seed, streams::kDiscriminator);
    Rng rng_g = Rng::derive(seed, streams::kGenerator);
    AdamState opt_g(gen.params, cfg.adam_gd);
    AdamState opt_d(dis_params, cfg.adam_gd);
    TrainTrace trace;

    for (std::int64_t i = 0; i < iterations; ++i) {
        try {
            // discriminator: ascend source objective, descend class loss on
            // real and fake
            {
                const Dataset real = draw_batch(data, cfg.batch, rng_d);
                const Dataset fake = sample_generator(gen, cfg.batch, cfg.latent_dim, nc, rng_d);
                GraphNet dnet = materialize(dis.trunk, dis_params);
                const Var xr = Var::leaf(features_matrix(real), "x_real");
                const Var xf = Var::leaf(features_matrix(fake), "x_fake");
                const AcganHeads hr = acgan_forward(dis, dnet, xr);
                const AcganHeads hf = acgan_forward(dis, dnet, xf);
                const Var source_obj =
                    add(mean(safe_log(hr.source)), mean(safe_log(one_minus(hf.source))));
                const Var class_loss = add(cross_entropy_loss(hr.class_logits, labels_of(real)),
                                           cross_entropy_loss(hf.class_logits, labels_of(fake)));
                check_finite(source_obj.scalar(), "ACGAN discriminator source objective");
                trace.d_objective.push_back(source_obj.scalar());
                backward(add(scale(source_obj, -1.0), class_loss));
                adam_step(dis_params, dnet.gradients(dis_params), opt_d, cfg.mu0_gd);
            }
            // generator: descend source objective plus class loss (ACGAN's
            // generator *minimizes* the classification loss)
            {
                const GenBatch batch = draw_gen_batch(cfg.batch, cfg.latent_dim, nc, rng_g);
                GraphNet gnet = materialize(gen.spec, gen.params);
                GraphNet dnet = materialize(dis.trunk, dis_params);
                const Var z = Var::leaf(batch.z, "z");
                const Var xg = mlp_forward(gnet, z, &batch.labels, nc);
                const AcganHeads h = acgan_forward(dis, dnet, xg);
                const Var gan = gan_generator_loss(h.source, cfg.non_saturating);
                const Var closs = cross_entropy_loss(h.class_logits, batch.labels);
                check_finite(gan.scalar(), "ACGAN generator loss");
                trace.g_gan.push_back(gan.scalar());
                trace.g_cls.push_back(closs.scalar());
                backward(add(gan, closs));
                adam_step(gen.params, gnet.gradients(gen.params), opt_g, cfg.mu0_gd);
            }
        } catch (const std::runtime_error& e) {
            rethrow_at(i, e);
        }
    }
    return {std::move(gen), dis, std::move(dis_params), std::move(trace)};
}

std::vector<int> acgan_classify(const AcganDiscriminator& d, const ParameterStore& params,
                                const DenseArray& X) {
    GraphNet net = materialize(d.trunk, params);
    const AcganHeads h = acgan_forward(d, net, Var::leaf(X, "x"));
    const DenseArray& logits = h.class_logits.value();
    std::vector<int> pred(logits.rows());
    for (std::size_t r = 0; r < logits.rows(); ++r) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < logits.cols(); ++c)
            if (logits.at(r, c) > logits.at(r, best)) best = c;
        pred[r] = static_cast<int>(best);
    }
    return pred;
}

ClassifierResult train_classifier(const GameConfig& cfg, const Dataset& data,
                                  const Net* augment_gen, double aug_fraction, Net cls_init,
                                  std::uint64_t seed, std::int64_t epochs,
                                  std::int64_t decay_period, double decay_factor) {
    require(!data.empty(), "train_classifier: empty dataset");
    require(epochs >= 0, "train_classifier: negative epoch count");
    require(aug_fraction >= 0.0 && aug_fraction < 1.0,
            "train_classifier: aug_fraction outside [0,1)");

    Net cls = std::move(cls_init);
    AdamState opt(cls.params, cfg.adam_c);
    Rng rng = Rng::derive(seed, streams::kClassifier);
    ClassifierResult result;

    const std::size_t m = cfg.batch;
    const std::size_t n_gen =
        augment_gen ? static_cast<std::size_t>(std::lround(aug_fraction * static_cast<double>(m)))
                    : 0;
    const std::size_t n_real = m - n_gen;
    const std::size_t batches_per_epoch = std::max<std::size_t>(1, data.size() / m);

    for (std::int64_t epoch = 0; epoch < epochs; ++epoch) {
        const double mu = step_decay(epoch, cfg.mu0_c, decay_period, decay_factor);
        double epoch_loss = 0.0;
        for (std::size_t b = 0; b < batches_per_epoch; ++b) {
            Dataset batch = draw_batch(data, n_real, rng);
            if (n_gen > 0) {
                for (auto& s :
                     sample_generator(*augment_gen, n_gen, cfg.latent_dim, cfg.num_classes, rng))
                    batch.push_back(std::move(s));
            }
            GraphNet c = materialize(cls.spec, cls.params);
            const Var x = Var::leaf(features_matrix(batch), "x");
            const Var loss = classifier_loss(c, cfg.cls_loss, x, labels_of(batch));
            check_finite(loss.scalar(), "classifier loss");
            epoch_loss += loss.scalar();
            backward(loss);
            adam_step(cls.params, c.gradients(cls.params), opt, mu, cfg.weight_decay_c);
        }
        result.loss_trace.push_back(epoch_loss / static_cast<double>(batches_per_epoch));
        result.train_acc_trace.push_back(classify_accuracy(cls, cfg.cls_loss, data));
    }
    result.cls = std::move(cls);
    return result;
}

DenseArray net_eval(const Net& net, const DenseArray& X, const std::vector<int>* labels,
                    std::size_t num_classes) {
    GraphNet g = materialize(net.spec, net.params);
    return mlp_forward(g, Var::leaf(X, "x"), labels, num_classes).value();
}

std::vector<double> classifier_scores(const Net& cls, ClassifierLoss kind, const DenseArray& X) {
    const DenseArray out = net_eval(cls, X, nullptr, 0);
    std::vector<double> s(out.rows());
    if (kind == ClassifierLoss::kHinge) {
        for (std::size_t r = 0; r < out.rows(); ++r) s[r] = out.at(r, 0);
    } else {
        for (std::size_t r = 0; r < out.rows(); ++r) s[r] = out.at(r, 1) - out.at(r, 0);
    }
    return s;
}

std::vector<int> classify(const Net& cls, ClassifierLoss kind, const DenseArray& X) {
    if (kind == ClassifierLoss::kCrossEntropy && cls.spec.output_width() > 2) {
        const DenseArray logits = net_eval(cls, X, nullptr, 0);
        std::vector<int> pred(logits.rows());
        for (std::size_t r = 0; r < logits.rows(); ++r) {
            std::size_t best = 0;
            for (std::size_t c = 1; c < logits.cols(); ++c)
                if (logits.at(r, c) > logits.at(r, best)) best = c;
            pred[r] = static_cast<int>(best);
        }
        return pred;
    }
    const std::vector<double> s = classifier_scores(cls, kind, X);
    std::vector<int> pred(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) pred[i] = s[i] > 0.0 ? 1 : 0;
    return pred;
}

double classify_accuracy(const Net& cls, ClassifierLoss kind, const Dataset& test) {
    if (test.empty()) throw std::invalid_argument("classify_accuracy: empty test set");
    const std::vector<int> pred = classify(cls, kind, features_matrix(test));
    std::size_t hits = 0;
    for (std::size_t i = 0; i < test.size(); ++i)
        if (pred[i] == test[i].label) ++hits;
    return static_cast<double>(hits) / static_cast<double>(test.size());
}

}  // namespace tpg
