#include "tpg/params.hpp"

#include <stdexcept>

namespace tpg {

void ParameterStore::add(std::string name, DenseArray value) {
    if (contains(name)) throw std::invalid_argument("ParameterStore: duplicate name '" + name + "'");
    entries_.emplace_back(std::move(name), std::move(value));
}

bool ParameterStore::contains(const std::string& name) const {
    for (const auto& [n, v] : entries_)
        if (n == name) return true;
    return false;
}

DenseArray& ParameterStore::at(const std::string& name) {
    for (auto& [n, v] : entries_)
        if (n == name) return v;
    throw std::out_of_range("ParameterStore: no parameter '" + name + "'");
}

const DenseArray& ParameterStore::at(const std::string& name) const {
    for (const auto& [n, v] : entries_)
        if (n == name) return v;
    throw std::out_of_range("ParameterStore: no parameter '" + name + "'");
}

std::size_t ParameterStore::scalar_count() const {
    std::size_t n = 0;
    for (const auto& [name, v] : entries_) n += v.size();
    return n;
}

bool ParameterStore::same_layout(const ParameterStore& other) const {
    if (entries_.size() != other.entries_.size()) return false;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].first != other.entries_[i].first) return false;
        if (entries_[i].second.shape() != other.entries_[i].second.shape()) return false;
    }
    return true;
}

bool ParameterStore::bit_identical(const ParameterStore& other) const {
    if (!same_layout(other)) return false;
    for (std::size_t i = 0; i < entries_.size(); ++i)
        if (!entries_[i].second.bit_identical(other.entries_[i].second)) return false;
    return true;
}

}  // namespace tpg
