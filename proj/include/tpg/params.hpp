#pragma once

#include <string>
#include <utility>
#include <vector>

#include "tpg/dense_array.hpp"

namespace tpg {

// Named, shaped parameter arrays for one network. Insertion-ordered; names
// unique. Doubles as a gradient map (same names, same shapes).
class ParameterStore {
public:
    using Entry = std::pair<std::string, DenseArray>;

    void add(std::string name, DenseArray value);
    bool contains(const std::string& name) const;
    DenseArray& at(const std::string& name);
    const DenseArray& at(const std::string& name) const;

    std::size_t count() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    std::vector<Entry>& entries() { return entries_; }
    const std::vector<Entry>& entries() const { return entries_; }

    // total scalar count across all arrays
    std::size_t scalar_count() const;

    bool same_layout(const ParameterStore& other) const;
    bool bit_identical(const ParameterStore& other) const;

private:
    std::vector<Entry> entries_;
};

}  // namespace tpg
