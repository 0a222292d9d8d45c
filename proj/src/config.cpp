#include "tpg/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tpg {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

[[noreturn]] void fail(int line, const std::string& msg) {
    throw std::invalid_argument("config line " + std::to_string(line) + ": " + msg);
}

double to_double(const std::string& v, int line, const std::string& key) {
    double out = 0.0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size())
        fail(line, "expected a number for '" + key + "', got '" + v + "'");
    return out;
}

std::uint64_t to_u64(const std::string& v, int line, const std::string& key) {
    std::uint64_t out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size())
        fail(line, "expected an unsigned integer for '" + key + "', got '" + v + "'");
    return out;
}

std::int64_t to_i64(const std::string& v, int line, const std::string& key) {
    std::int64_t out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size())
        fail(line, "expected an integer for '" + key + "', got '" + v + "'");
    return out;
}

std::size_t to_size(const std::string& v, int line, const std::string& key) {
    return static_cast<std::size_t>(to_u64(v, line, key));
}

bool to_bool(const std::string& v, int line, const std::string& key) {
    if (v == "true") return true;
    if (v == "false") return false;
    fail(line, "expected true/false for '" + key + "', got '" + v + "'");
}

std::vector<std::size_t> to_size_list(const std::string& v, int line, const std::string& key) {
    std::vector<std::size_t> out;
    if (trim(v).empty()) return out;
    std::stringstream ss(v);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(to_size(trim(tok), line, key));
    return out;
}

std::string join_sizes(const std::vector<std::size_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(v[i]);
    }
    return s;
}

Nonlinearity to_act(const std::string& v) {
    if (v == "relu") return Nonlinearity::kRelu;
    if (v == "tanh") return Nonlinearity::kTanh;
    throw std::invalid_argument("unknown activation '" + v + "' (relu|tanh)");
}

bool valid_scenario(const std::string& s) {
    return s == "baseline" || s == "cgan" || s == "cgan-augmented" || s == "acgan" ||
           s == "three-player" || s == "frozen-classifier-game";
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, r.ptr);
}

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig c;
    std::stringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = raw;
        if (const std::size_t h = s.find('#'); h != std::string::npos) s = s.substr(0, h);
        s = trim(s);
        if (s.empty()) continue;
        const std::size_t eq = s.find('=');
        if (eq == std::string::npos) fail(line, "expected 'key = value'");
        const std::string key = trim(s.substr(0, eq));
        const std::string val = trim(s.substr(eq + 1));
        if (key.empty()) fail(line, "empty key");

        if (key == "scenario") c.scenario = val;
        else if (key == "seed") { c.seed = to_u64(val, line, key); c.has_seed = true; }
        else if (key == "eval_seed") { c.eval_seed = to_u64(val, line, key); c.has_eval_seed = true; }
        else if (key == "out_dir") c.out_dir = val;
        else if (key == "dataset_csv") c.dataset_csv = val;
        else if (key == "data_mean") c.data_mean = to_double(val, line, key);
        else if (key == "data_sigma") c.data_sigma = to_double(val, line, key);
        else if (key == "train_per_class") c.train_per_class = to_size(val, line, key);
        else if (key == "test_per_class") c.test_per_class = to_size(val, line, key);
        else if (key == "latent_dim") c.latent_dim = to_size(val, line, key);
        else if (key == "g_hidden") c.g_hidden = to_size_list(val, line, key);
        else if (key == "d_hidden") c.d_hidden = to_size_list(val, line, key);
        else if (key == "c_hidden") c.c_hidden = to_size_list(val, line, key);
        else if (key == "g_act") c.g_act = val;
        else if (key == "d_act") c.d_act = val;
        else if (key == "c_act") c.c_act = val;
        else if (key == "c_loss") c.c_loss = val;
        else if (key == "cgan_iters") c.cgan_iters = to_i64(val, line, key);
        else if (key == "game_iters") c.game_iters = to_i64(val, line, key);
        else if (key == "classifier_epochs") c.classifier_epochs = to_i64(val, line, key);
        else if (key == "batch") c.batch = to_size(val, line, key);
        else if (key == "c_batch") c.c_batch = to_size(val, line, key);
        else if (key == "mu0_gd") c.mu0_gd = to_double(val, line, key);
        else if (key == "mu0_c") c.mu0_c = to_double(val, line, key);
        else if (key == "beta1_gd") c.beta1_gd = to_double(val, line, key);
        else if (key == "beta2_gd") c.beta2_gd = to_double(val, line, key);
        else if (key == "beta1_c") c.beta1_c = to_double(val, line, key);
        else if (key == "beta2_c") c.beta2_c = to_double(val, line, key);
        else if (key == "adam_eps") c.adam_eps = to_double(val, line, key);
        else if (key == "weight_decay") c.weight_decay = to_double(val, line, key);
        else if (key == "lr_decay_period") c.lr_decay_period = to_i64(val, line, key);
        else if (key == "lr_decay_factor") c.lr_decay_factor = to_double(val, line, key);
        else if (key == "w_c") c.w_c = to_double(val, line, key);
        else if (key == "alpha") c.alpha = to_double(val, line, key);
        else if (key == "beta") c.beta = to_double(val, line, key);
        else if (key == "plan_real") c.plan_real = to_double(val, line, key);
        else if (key == "plan_initial") c.plan_initial = to_double(val, line, key);
        else if (key == "plan_current") c.plan_current = to_double(val, line, key);
        else if (key == "non_saturating") c.non_saturating = to_bool(val, line, key);
        else if (key == "aug_fraction") c.aug_fraction = to_double(val, line, key);
        else if (key == "tau") c.tau = to_double(val, line, key);
        else if (key == "raster_min") c.raster_min = to_double(val, line, key);
        else if (key == "raster_max") c.raster_max = to_double(val, line, key);
        else if (key == "raster_resolution") c.raster_resolution = to_size(val, line, key);
        else fail(line, "unknown key '" + key + "'");
    }
    if (!c.has_seed) throw std::invalid_argument("config: missing required key 'seed'");
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

void ExperimentConfig::validate() const {
    auto bad = [](const std::string& msg) { throw std::invalid_argument("config: " + msg); };
    if (!valid_scenario(scenario)) bad("unknown scenario '" + scenario + "'");
    if (!(data_sigma > 0.0)) bad("data_sigma must be > 0");
    if (train_per_class < 1) bad("train_per_class must be >= 1");
    if (test_per_class < 1) bad("test_per_class must be >= 1");
    if (latent_dim < 1) bad("latent_dim must be >= 1");
    (void)to_act(g_act);
    (void)to_act(d_act);
    (void)to_act(c_act);
    if (c_loss != "hinge" && c_loss != "xent") bad("c_loss must be hinge or xent");
    if (cgan_iters < 0 || game_iters < 0 || classifier_epochs < 0) bad("negative iteration count");
    if (batch < 1) bad("batch must be >= 1");
    if (!(mu0_gd > 0.0) || !(mu0_c > 0.0)) bad("learning rates must be > 0");
    for (double b : {beta1_gd, beta2_gd, beta1_c, beta2_c})
        if (!(b >= 0.0 && b < 1.0)) bad("Adam betas must lie in [0,1)");
    if (!(adam_eps > 0.0)) bad("adam_eps must be > 0");
    if (weight_decay < 0.0) bad("weight_decay must be >= 0");
    if (lr_decay_period < 1) bad("lr_decay_period must be >= 1");
    if (!(lr_decay_factor > 0.0 && lr_decay_factor < 1.0)) bad("lr_decay_factor outside (0,1)");
    if (!(w_c > 0.0)) bad("w_c must be > 0");
    if (!(alpha > 0.0)) bad("alpha must be > 0");
    if (!(beta > 0.0)) bad("beta must be > 0");
    BatchPlan{plan_real, plan_initial, plan_current}.validate();
    if (!(aug_fraction >= 0.0 && aug_fraction < 1.0)) bad("aug_fraction outside [0,1)");
    if (!(tau > 0.0 && tau < 1.0)) bad("tau outside (0,1)");
    if (!(raster_min < raster_max)) bad("raster_min must be < raster_max");
    if (raster_resolution < 2) bad("raster_resolution must be >= 2");
}

std::uint64_t ExperimentConfig::effective_eval_seed() const {
    if (has_eval_seed) return eval_seed;
    return Rng::derive(seed, streams::kEval).next_u64();
}

GameConfig ExperimentConfig::game_config() const {
    GameConfig g;
    g.latent_dim = latent_dim;
    g.num_classes = 2;
    g.batch = batch;
    g.non_saturating = non_saturating;
    g.freeze_classifier = scenario == "frozen-classifier-game";
    g.cls_loss = c_loss == "hinge" ? ClassifierLoss::kHinge : ClassifierLoss::kCrossEntropy;
    g.adam_gd = {beta1_gd, beta2_gd, adam_eps};
    g.adam_c = {beta1_c, beta2_c, adam_eps};
    g.mu0_gd = mu0_gd;
    g.mu0_c = mu0_c;
    g.weight_decay_c = weight_decay;
    g.w_c = w_c;
    g.alpha = alpha;
    g.beta = beta;
    g.plan = {plan_real, plan_initial, plan_current};
    return g;
}

GameConfig ExperimentConfig::classifier_config() const {
    GameConfig g = game_config();
    g.batch = resolved_c_batch();
    return g;
}

GaussianClassSpec ExperimentConfig::data_spec() const {
    return GaussianClassSpec::symmetric_pair(data_mean, data_sigma);
}

MlpSpec ExperimentConfig::generator_spec() const {
    MlpSpec s;
    s.layer_sizes.push_back(latent_dim + 2);
    for (std::size_t h : g_hidden) s.layer_sizes.push_back(h);
    s.layer_sizes.push_back(2);
    s.hidden = to_act(g_act);
    s.head = OutputHead::kLinear;
    return s;
}

MlpSpec ExperimentConfig::discriminator_spec() const {
    MlpSpec s;
    s.layer_sizes.push_back(2 + 2);
    for (std::size_t h : d_hidden) s.layer_sizes.push_back(h);
    s.layer_sizes.push_back(1);
    s.hidden = to_act(d_act);
    s.head = OutputHead::kSigmoid;
    return s;
}

MlpSpec ExperimentConfig::classifier_spec() const {
    MlpSpec s;
    s.layer_sizes.push_back(2);
    for (std::size_t h : c_hidden) s.layer_sizes.push_back(h);
    s.layer_sizes.push_back(c_loss == "hinge" ? 1 : 2);
    s.hidden = to_act(c_act);
    s.head = OutputHead::kLinear;
    return s;
}

std::string echo_config(const ExperimentConfig& c) {
    std::string out;
    auto kv = [&out](const std::string& k, const std::string& v) { out += k + " = " + v + "\n"; };
    kv("scenario", c.scenario);
    kv("seed", std::to_string(c.seed));
    kv("eval_seed", std::to_string(c.effective_eval_seed()));
    kv("out_dir", c.out_dir);
    kv("dataset_csv", c.dataset_csv);
    kv("data_mean", format_double(c.data_mean));
    kv("data_sigma", format_double(c.data_sigma));
    kv("train_per_class", std::to_string(c.train_per_class));
    kv("test_per_class", std::to_string(c.test_per_class));
    kv("latent_dim", std::to_string(c.latent_dim));
    kv("g_hidden", join_sizes(c.g_hidden));
    kv("d_hidden", join_sizes(c.d_hidden));
    kv("c_hidden", join_sizes(c.c_hidden));
    kv("g_act", c.g_act);
    kv("d_act", c.d_act);
    kv("c_act", c.c_act);
    kv("c_loss", c.c_loss);
    kv("cgan_iters", std::to_string(c.cgan_iters));
    kv("game_iters", std::to_string(c.game_iters));
    kv("classifier_epochs", std::to_string(c.classifier_epochs));
    kv("batch", std::to_string(c.batch));
    kv("c_batch", std::to_string(c.resolved_c_batch()));
    kv("mu0_gd", format_double(c.mu0_gd));
    kv("mu0_c", format_double(c.mu0_c));
    kv("beta1_gd", format_double(c.beta1_gd));
    kv("beta2_gd", format_double(c.beta2_gd));
    kv("beta1_c", format_double(c.beta1_c));
    kv("beta2_c", format_double(c.beta2_c));
    kv("adam_eps", format_double(c.adam_eps));
    kv("weight_decay", format_double(c.weight_decay));
    kv("lr_decay_period", std::to_string(c.lr_decay_period));
    kv("lr_decay_factor", format_double(c.lr_decay_factor));
    kv("w_c", format_double(c.w_c));
    kv("alpha", format_double(c.alpha));
    kv("beta", format_double(c.beta));
    kv("plan_real", format_double(c.plan_real));
    kv("plan_initial", format_double(c.plan_initial));
    kv("plan_current", format_double(c.plan_current));
    kv("non_saturating", c.non_saturating ? "true" : "false");
    kv("aug_fraction", format_double(c.aug_fraction));
    kv("tau", format_double(c.tau));
    kv("raster_min", format_double(c.raster_min));
    kv("raster_max", format_double(c.raster_max));
    kv("raster_resolution", std::to_string(c.raster_resolution));
    return out;
}

}  // namespace tpg
