#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "tpg/games.hpp"

namespace tpg {

// One isotropic 2D Gaussian class component.
struct GaussianClass {
    std::array<double, 2> mean{0.0, 0.0};
    double sigma = 1.0;
    double prior = 0.5;
};

struct GaussianClassSpec {
    std::vector<GaussianClass> classes;

    void validate() const;  // sigma > 0, priors sum to 1
    // the two-Gaussian layout used throughout: means +-(mu,mu), equal priors
    static GaussianClassSpec symmetric_pair(double mu, double sigma);
};

Dataset sample_mixture(const GaussianClassSpec& spec, std::size_t n_per_class, std::uint64_t seed);

// p(c|x) proportional to prior_c * exp(-|x-mu_c|^2 / (2 sigma_c^2))
std::vector<double> analytic_posterior(const GaussianClassSpec& spec,
                                       const std::array<double, 2>& point);

// |p(c1|x) - p(c2|x)|; two-class specs only. 0 = maximally ambiguous.
double posterior_margin(const GaussianClassSpec& spec, const std::array<double, 2>& point);

// fraction of samples with posterior_margin < tau
double overlap_score(const Dataset& samples, const GaussianClassSpec& spec, double tau);

struct RasterBounds {
    double xmin = -3.0, xmax = 3.0;
    double ymin = -3.0, ymax = 3.0;
};

// Predicted-class field over a grid. Cells are stored row-major, rows
// top-to-bottom (y decreasing), matching image output. Zero-score cells get
// class -1 (tie).
struct SurfaceRaster {
    RasterBounds bounds;
    std::size_t resolution = 0;  // cells per axis
    std::vector<int> cell_class;
    std::vector<double> cell_score;

    std::array<double, 2> cell_center(std::size_t row, std::size_t col) const;
};

// signed two-class score at a point
using ScoreFn = std::function<double(const std::array<double, 2>&)>;

SurfaceRaster rasterize_surface(const ScoreFn& score, const RasterBounds& bounds,
                                std::size_t resolution);
SurfaceRaster rasterize_surface(const Net& cls, ClassifierLoss kind, const RasterBounds& bounds,
                                std::size_t resolution);

// Angle in degrees between a 2D linear classifier's weight vector and the
// Bayes-optimal boundary normal (1,1)/sqrt(2) of the symmetric pair spec.
// Orientation-insensitive.
double boundary_angle(const std::array<double, 2>& weights);
double boundary_angle(const Net& linear_cls);

}  // namespace tpg
