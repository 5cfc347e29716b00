#include "emgrl/diff/params.hpp"

#include <cmath>
#include <stdexcept>

namespace emgrl::diff {

Block& ParamSet::add(const std::string& name, std::size_t rows, std::size_t cols) {
    if (name.empty()) throw std::invalid_argument("ParamSet::add: empty block name");
    if (rows == 0 || cols == 0) throw std::invalid_argument("ParamSet::add: zero-sized block '" + name + "'");
    auto [it, inserted] = blocks_.try_emplace(name, rows, cols);
    if (!inserted) throw std::invalid_argument("ParamSet::add: duplicate block '" + name + "'");
    return it->second;
}

void ParamSet::add_linear(const std::string& prefix, std::size_t in, std::size_t out, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    Block& w = add(prefix + ".w", out, in);
    for (double& x : w.values()) x = rng.uniform(-bound, bound);
    Block& b = add(prefix + ".b", out, 1);
    for (double& x : b.values()) x = rng.uniform(-bound, bound);
}

Block& ParamSet::at(const std::string& name) {
    auto it = blocks_.find(name);
    if (it == blocks_.end()) throw std::out_of_range("ParamSet: no block named '" + name + "'");
    return it->second;
}

const Block& ParamSet::at(const std::string& name) const {
    auto it = blocks_.find(name);
    if (it == blocks_.end()) throw std::out_of_range("ParamSet: no block named '" + name + "'");
    return it->second;
}

std::vector<std::string> ParamSet::names() const {
    std::vector<std::string> out;
    out.reserve(blocks_.size());
    for (const auto& [name, _] : blocks_) out.push_back(name);
    return out;
}

std::size_t ParamSet::scalar_count() const noexcept {
    std::size_t n = 0;
    for (const auto& [_, b] : blocks_) n += b.size();
    return n;
}

ParamSet ParamSet::zeros_like() const {
    ParamSet out;
    for (const auto& [name, b] : blocks_) out.add(name, b.rows(), b.cols());
    return out;
}

void ParamSet::fill(double value) {
    for (auto& [_, b] : blocks_)
        for (double& x : b.values()) x = value;
}

void ParamSet::merge(const ParamSet& other, const std::string& prefix) {
    for (const auto& [name, b] : other.blocks_) {
        Block& dst = add(prefix + name, b.rows(), b.cols());
        std::copy(b.values().begin(), b.values().end(), dst.values().begin());
    }
}

ParamSet ParamSet::extract(const std::string& prefix) const {
    ParamSet out;
    for (const auto& [name, b] : blocks_) {
        if (name.size() > prefix.size() && name.compare(0, prefix.size(), prefix) == 0) {
            Block& dst = out.add(name.substr(prefix.size()), b.rows(), b.cols());
            std::copy(b.values().begin(), b.values().end(), dst.values().begin());
        }
    }
    return out;
}

}  // namespace emgrl::diff
