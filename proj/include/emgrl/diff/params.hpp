#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "emgrl/rng.hpp"

namespace emgrl::diff {

using Vec = std::vector<double>;

/// Dense row-major parameter block. Shape is fixed at construction.
class Block {
public:
    Block() = default;
    Block(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), values_(rows * cols, 0.0) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return values_.size(); }

    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }
    const Vec& vec() const noexcept { return values_; }

    double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

    bool operator==(const Block&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    Vec values_;
};

/// Named parameter blocks. Iteration order is the lexicographic key order,
/// which keeps serialization and optimizer state deterministic.
class ParamSet {
public:
    /// Adds a zero-filled block. Throws if the name already exists.
    Block& add(const std::string& name, std::size_t rows, std::size_t cols);

    /// Adds `<prefix>.w` (out x in) and `<prefix>.b` (out x 1), both uniform in
    /// [-1/sqrt(in), 1/sqrt(in)].
    void add_linear(const std::string& prefix, std::size_t in, std::size_t out, Rng& rng);

    bool contains(const std::string& name) const { return blocks_.count(name) != 0; }
    Block& at(const std::string& name);
    const Block& at(const std::string& name) const;

    std::vector<std::string> names() const;
    std::size_t block_count() const noexcept { return blocks_.size(); }
    std::size_t scalar_count() const noexcept;

    /// Same keys and shapes, all zero.
    ParamSet zeros_like() const;
    void fill(double value);

    /// Copies every block of `other` under `prefix + name`.
    void merge(const ParamSet& other, const std::string& prefix = "");
    /// Blocks whose names start with `prefix`, with the prefix stripped.
    ParamSet extract(const std::string& prefix) const;

    auto begin() const { return blocks_.begin(); }
    auto end() const { return blocks_.end(); }
    auto begin() { return blocks_.begin(); }
    auto end() { return blocks_.end(); }

    bool operator==(const ParamSet&) const = default;

private:
    std::map<std::string, Block> blocks_;
};

}  // namespace emgrl::diff
