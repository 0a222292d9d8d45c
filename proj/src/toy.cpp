#include "tpg/toy.hpp"

#include <cmath>
#include <stdexcept>

namespace tpg {

void GaussianClassSpec::validate() const {
    if (classes.empty()) throw std::invalid_argument("GaussianClassSpec: no classes");
    double prior_sum = 0.0;
    for (const auto& c : classes) {
        if (!(c.sigma > 0.0)) throw std::invalid_argument("GaussianClassSpec: sigma must be > 0");
        if (!(c.prior >= 0.0)) throw std::invalid_argument("GaussianClassSpec: negative prior");
        prior_sum += c.prior;
    }
    if (std::abs(prior_sum - 1.0) > 1e-9)
        throw std::invalid_argument("GaussianClassSpec: priors sum to " + std::to_string(prior_sum));
}

GaussianClassSpec GaussianClassSpec::symmetric_pair(double mu, double sigma) {
    return GaussianClassSpec{{{{-mu, -mu}, sigma, 0.5}, {{mu, mu}, sigma, 0.5}}};
}

Dataset sample_mixture(const GaussianClassSpec& spec, std::size_t n_per_class, std::uint64_t seed) {
    spec.validate();
    if (n_per_class < 1) throw std::invalid_argument("sample_mixture: n_per_class must be >= 1");
    Rng rng(seed);
    Dataset out;
    out.reserve(spec.classes.size() * n_per_class);
    for (std::size_t c = 0; c < spec.classes.size(); ++c) {
        const GaussianClass& g = spec.classes[c];
        for (std::size_t i = 0; i < n_per_class; ++i) {
            DenseArray f({2});
            f[0] = rng.normal(g.mean[0], g.sigma);
            f[1] = rng.normal(g.mean[1], g.sigma);
            out.push_back({std::move(f), static_cast<int>(c)});
        }
    }
    return out;
}

std::vector<double> analytic_posterior(const GaussianClassSpec& spec,
                                       const std::array<double, 2>& point) {
    spec.validate();
    std::vector<double> logp(spec.classes.size());
    double lmax = -HUGE_VAL;
    for (std::size_t c = 0; c < spec.classes.size(); ++c) {
        const GaussianClass& g = spec.classes[c];
        const double dx = point[0] - g.mean[0];
        const double dy = point[1] - g.mean[1];
        logp[c] = std::log(g.prior) - (dx * dx + dy * dy) / (2.0 * g.sigma * g.sigma);
        lmax = std::max(lmax, logp[c]);
    }
    double denom = 0.0;
    for (double& l : logp) {
        l = std::exp(l - lmax);
        denom += l;
    }
    for (double& l : logp) l /= denom;
    return logp;
}

double posterior_margin(const GaussianClassSpec& spec, const std::array<double, 2>& point) {
    if (spec.classes.size() != 2)
        throw std::invalid_argument("posterior_margin: toy scope is two classes, got " +
                                    std::to_string(spec.classes.size()));
    const std::vector<double> p = analytic_posterior(spec, point);
    return std::abs(p[0] - p[1]);
}

double overlap_score(const Dataset& samples, const GaussianClassSpec& spec, double tau) {
    if (samples.empty()) throw std::invalid_argument("overlap_score: empty sample set");
    if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("overlap_score: tau outside (0,1)");
    std::size_t hits = 0;
    for (const auto& s : samples) {
        if (s.features.size() != 2)
            throw std::invalid_argument("overlap_score: samples must be 2D");
        if (posterior_margin(spec, {s.features[0], s.features[1]}) < tau) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(samples.size());
}

std::array<double, 2> SurfaceRaster::cell_center(std::size_t row, std::size_t col) const {
    const double dx = (bounds.xmax - bounds.xmin) / static_cast<double>(resolution);
    const double dy = (bounds.ymax - bounds.ymin) / static_cast<double>(resolution);
    return {bounds.xmin + (static_cast<double>(col) + 0.5) * dx,
            bounds.ymax - (static_cast<double>(row) + 0.5) * dy};
}

SurfaceRaster rasterize_surface(const ScoreFn& score, const RasterBounds& bounds,
                                std::size_t resolution) {
    if (resolution < 2) throw std::invalid_argument("rasterize_surface: resolution must be >= 2");
    SurfaceRaster r;
    r.bounds = bounds;
    r.resolution = resolution;
    r.cell_class.resize(resolution * resolution);
    r.cell_score.resize(resolution * resolution);
    for (std::size_t row = 0; row < resolution; ++row)
        for (std::size_t col = 0; col < resolution; ++col) {
            const double s = score(r.cell_center(row, col));
            const std::size_t i = row * resolution + col;
            r.cell_score[i] = s;
            r.cell_class[i] = s > 0.0 ? 1 : (s < 0.0 ? 0 : -1);
        }
    return r;
}

SurfaceRaster rasterize_surface(const Net& cls, ClassifierLoss kind, const RasterBounds& bounds,
                                std::size_t resolution) {
    return rasterize_surface(
        [&](const std::array<double, 2>& p) {
            DenseArray X({1, 2}, {p[0], p[1]});
            return classifier_scores(cls, kind, X)[0];
        },
        bounds, resolution);
}

double boundary_angle(const std::array<double, 2>& weights) {
    const double norm = std::hypot(weights[0], weights[1]);
    if (norm == 0.0) throw std::invalid_argument("boundary_angle: zero weight vector");
    const double kInvSqrt2 = 0.7071067811865475244;
    double c = std::abs(weights[0] * kInvSqrt2 + weights[1] * kInvSqrt2) / norm;
    c = std::min(c, 1.0);
    return std::acos(c) * 180.0 / 3.141592653589793238462643383279502884;
}

double boundary_angle(const Net& linear_cls) {
    const DenseArray& w = linear_cls.params.at("W0");
    if (w.size() != 2)
        throw std::invalid_argument("boundary_angle: classifier is not a 2D linear model");
    return boundary_angle(std::array<double, 2>{w[0], w[1]});
}

}  // namespace tpg
