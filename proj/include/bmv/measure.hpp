#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace bmv {

using Vec = std::vector<double>;

/// Finite nonnegative measure on R^d stored as weighted atoms.
/// Coincident atoms may be kept separate; every operation is invariant
/// under merge/split of equal-position atoms.
struct Atom {
    Vec position;
    double weight = 0.0;
};

class AtomicMeasure {
  public:
    AtomicMeasure() = default;
    explicit AtomicMeasure(int dim) : dim_(dim) {}
    AtomicMeasure(int dim, std::vector<Atom> atoms);

    /// Convenience for d=1.
    static AtomicMeasure from_1d(std::vector<std::pair<double, double>> pos_weight);

    int dim() const { return dim_; }
    const std::vector<Atom>& atoms() const { return atoms_; }
    std::size_t size() const { return atoms_.size(); }
    bool empty() const { return atoms_.empty(); }

    void add_atom(Vec position, double weight);

    double total_mass() const;
    /// <m, |x|>
    double first_abs_moment() const;
    /// <m, |x|^2>
    double second_moment() const;
    /// <m, x_i> for coordinate i.
    double coordinate_moment(std::size_t i) const;

    double integrate(const std::function<double(const Vec&)>& phi) const;

    /// Drops zero-weight atoms. Equal-position atoms are left as-is.
    AtomicMeasure normalized() const;

    /// Scales all weights.
    AtomicMeasure scaled(double factor) const;

    /// Superposition of two measures on the same space.
    friend AtomicMeasure operator+(const AtomicMeasure& a, const AtomicMeasure& b);

  private:
    int dim_ = 1;
    std::vector<Atom> atoms_;
};

// Line-oriented format: one atom per line "w x1 ... xd", '#' comments.
// Dimension is inferred from the first atom line.
AtomicMeasure read_measure(std::istream& in);
AtomicMeasure read_measure_file(const std::string& path);
void write_measure(std::ostream& out, const AtomicMeasure& m);
void write_measure_file(const std::string& path, const AtomicMeasure& m);

double euclidean_norm(const Vec& v);
double euclidean_dist(const Vec& a, const Vec& b);

}  // namespace bmv
