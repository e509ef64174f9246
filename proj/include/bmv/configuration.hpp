#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "bmv/measure.hpp"

namespace bmv {

/// Genealogical label: a finite sequence of positive child indices.
/// The empty sequence is the root. Child i of label k is k with i appended.
class Label {
  public:
    Label() = default;
    explicit Label(std::vector<std::uint32_t> path) : path_(std::move(path)) {}

    static Label root() { return Label{}; }

    Label child(std::uint32_t i) const {
        auto p = path_;
        p.push_back(i);
        return Label(std::move(p));
    }

    const std::vector<std::uint32_t>& path() const { return path_; }
    std::size_t depth() const { return path_.size(); }

    /// Strict prefix order: k precedes k' iff k is a proper prefix of k'.
    bool precedes(const Label& other) const {
        if (path_.size() >= other.path_.size()) return false;
        return std::equal(path_.begin(), path_.end(), other.path_.begin());
    }

    bool operator==(const Label& o) const { return path_ == o.path_; }
    bool operator<(const Label& o) const { return path_ < o.path_; }

    std::string to_string() const {
        if (path_.empty()) return "*";
        std::string s;
        for (std::size_t i = 0; i < path_.size(); ++i) {
            if (i) s += '.';
            s += std::to_string(path_[i]);
        }
        return s;
    }

    /// Stable 64-bit hash, used for deriving RNG stream keys.
    std::uint64_t stable_hash() const {
        std::uint64_t h = 0x9e3779b97f4a7c15ULL;
        for (auto v : path_) {
            h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
            h *= 0xbf58476d1ce4e5b9ULL;
            h ^= h >> 31;
        }
        return h;
    }

  private:
    std::vector<std::uint32_t> path_;
};

/// An element of E: finitely many particles (label, position) whose labels
/// form an antichain under the prefix order.
class Configuration {
  public:
    Configuration() = default;
    explicit Configuration(int dim) : dim_(dim) {}

    int dim() const { return dim_; }
    const std::map<Label, Vec>& particles() const { return particles_; }
    std::size_t size() const { return particles_.size(); }
    bool empty() const { return particles_.empty(); }

    void insert(const Label& k, Vec position) {
        if (static_cast<int>(position.size()) != dim_)
            throw std::invalid_argument("Configuration: position dimension mismatch");
        for (const auto& [k2, _] : particles_) {
            if (k.precedes(k2) || k2.precedes(k) || k == k2)
                throw std::invalid_argument("Configuration: label violates antichain (" +
                                            k.to_string() + " vs " + k2.to_string() + ")");
        }
        particles_.emplace(k, std::move(position));
    }

    void erase(const Label& k) { particles_.erase(k); }

    /// Replace particle k by its children k1..kl at the given position.
    /// l = 0 just removes the particle. Preserves the antichain property.
    void branch(const Label& k, std::uint32_t offspring, const Vec& position) {
        auto it = particles_.find(k);
        if (it == particles_.end()) throw std::invalid_argument("Configuration: no such particle");
        particles_.erase(it);
        for (std::uint32_t i = 1; i <= offspring; ++i) particles_.emplace(k.child(i), position);
    }

    bool contains(const Label& k) const { return particles_.count(k) != 0; }
    const Vec& position(const Label& k) const { return particles_.at(k); }
    Vec& position(const Label& k) { return particles_.at(k); }

  private:
    int dim_ = 1;
    std::map<Label, Vec> particles_;
};

/// Spatial marginal: one unit-weight atom per particle, labels forgotten.
inline AtomicMeasure config_to_measure(const Configuration& e) {
    AtomicMeasure m(e.dim());
    for (const auto& [k, x] : e.particles()) m.add_atom(x, 1.0);
    return m;
}

/// d_E(e1,e2) = sum over common labels of (|x-y| /\ 1) + #(K1 symmetric-difference K2).
inline double d_E(const Configuration& e1, const Configuration& e2) {
    if (e1.dim() != e2.dim())
        throw std::invalid_argument("d_E: dimension mismatch");
    double sum = 0.0;
    std::size_t common = 0;
    for (const auto& [k, x] : e1.particles()) {
        auto it = e2.particles().find(k);
        if (it != e2.particles().end()) {
            ++common;
            sum += std::min(euclidean_dist(x, it->second), 1.0);
        }
    }
    sum += static_cast<double>(e1.size() - common) + static_cast<double>(e2.size() - common);
    return sum;
}

}  // namespace bmv
