#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tpg/games.hpp"
#include "tpg/toy.hpp"

namespace tpg {

// CSV datasets: header `x1,...,xk,label`, one sample per row. Labels are
// reindexed densely in first-appearance order; label_map[dense id] gives the
// original value.
struct LoadedDataset {
    Dataset samples;
    std::vector<long long> label_map;
};

LoadedDataset load_dataset_csv(const std::string& path);
LoadedDataset parse_dataset_csv(const std::string& text, const std::string& name);

// 17 significant decimal digits; save-then-load reproduces every value
// bit-exactly
void save_dataset_csv(const Dataset& data, const std::string& path);

// Checkpoints persist named parameter stores as text, one line per array:
//   <store>/<param> <d1,d2,...> <hex float> <hex float> ...
// Hex float literals make load(save(x)) bit-exact.
using NamedStores = std::vector<std::pair<std::string, ParameterStore>>;

void save_checkpoint(const NamedStores& stores, const std::string& path);
NamedStores load_checkpoint(const std::string& path);

// Plain-text PPM (P3) of a class raster. palette maps class id to RGB; tie
// cells carry class -1, so include a -1 entry when ties can occur. A sibling
// .csv holds the raw signed scores.
struct Rgb {
    int r = 0, g = 0, b = 0;
};

void write_raster_ppm(const SurfaceRaster& raster, const std::string& path,
                      const std::map<int, Rgb>& palette);

}  // namespace tpg
