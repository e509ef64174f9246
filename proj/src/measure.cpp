#include "bmv/measure.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bmv {

AtomicMeasure::AtomicMeasure(int dim, std::vector<Atom> atoms) : dim_(dim), atoms_(std::move(atoms)) {
    for (const auto& a : atoms_) {
        if (static_cast<int>(a.position.size()) != dim_)
            throw std::invalid_argument("AtomicMeasure: atom dimension mismatch");
        if (!(a.weight >= 0.0) || !std::isfinite(a.weight))
            throw std::invalid_argument("AtomicMeasure: weight must be finite and nonnegative");
        for (double c : a.position)
            if (!std::isfinite(c)) throw std::invalid_argument("AtomicMeasure: non-finite position");
    }
}

AtomicMeasure AtomicMeasure::from_1d(std::vector<std::pair<double, double>> pos_weight) {
    AtomicMeasure m(1);
    for (auto& [x, w] : pos_weight) m.add_atom({x}, w);
    return m;
}

void AtomicMeasure::add_atom(Vec position, double weight) {
    if (static_cast<int>(position.size()) != dim_)
        throw std::invalid_argument("AtomicMeasure: atom dimension mismatch");
    if (!(weight >= 0.0) || !std::isfinite(weight))
        throw std::invalid_argument("AtomicMeasure: weight must be finite and nonnegative");
    atoms_.push_back({std::move(position), weight});
}

double AtomicMeasure::total_mass() const {
    double s = 0.0;
    for (const auto& a : atoms_) s += a.weight;
    return s;
}

double AtomicMeasure::first_abs_moment() const {
    double s = 0.0;
    for (const auto& a : atoms_) s += a.weight * euclidean_norm(a.position);
    return s;
}

double AtomicMeasure::second_moment() const {
    double s = 0.0;
    for (const auto& a : atoms_) {
        double n = euclidean_norm(a.position);
        s += a.weight * n * n;
    }
    return s;
}

double AtomicMeasure::coordinate_moment(std::size_t i) const {
    double s = 0.0;
    for (const auto& a : atoms_) s += a.weight * a.position.at(i);
    return s;
}

double AtomicMeasure::integrate(const std::function<double(const Vec&)>& phi) const {
    double s = 0.0;
    for (const auto& a : atoms_) s += a.weight * phi(a.position);
    return s;
}

AtomicMeasure AtomicMeasure::normalized() const {
    AtomicMeasure out(dim_);
    for (const auto& a : atoms_)
        if (a.weight > 0.0) out.atoms_.push_back(a);
    return out;
}

AtomicMeasure AtomicMeasure::scaled(double factor) const {
    AtomicMeasure out(dim_);
    for (const auto& a : atoms_) out.atoms_.push_back({a.position, a.weight * factor});
    return out;
}

AtomicMeasure operator+(const AtomicMeasure& a, const AtomicMeasure& b) {
    if (a.dim_ != b.dim_ && !a.empty() && !b.empty())
        throw std::invalid_argument("AtomicMeasure: dimension mismatch in sum");
    AtomicMeasure out(a.empty() ? b.dim_ : a.dim_);
    out.atoms_ = a.atoms_;
    out.atoms_.insert(out.atoms_.end(), b.atoms_.begin(), b.atoms_.end());
    return out;
}

AtomicMeasure read_measure(std::istream& in) {
    std::string line;
    int dim = -1;
    std::vector<Atom> atoms;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ss(line);
        double w;
        if (!(ss >> w)) continue;  // blank or comment-only line
        Vec x;
        double c;
        while (ss >> c) x.push_back(c);
        if (dim < 0) dim = static_cast<int>(x.size());
        if (dim == 0 || static_cast<int>(x.size()) != dim)
            throw std::runtime_error("measure file: bad atom line " + std::to_string(lineno));
        atoms.push_back({std::move(x), w});
    }
    return AtomicMeasure(dim < 0 ? 1 : dim, std::move(atoms));
}

AtomicMeasure read_measure_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open measure file: " + path);
    return read_measure(in);
}

void write_measure(std::ostream& out, const AtomicMeasure& m) {
    out.precision(17);
    for (const auto& a : m.atoms()) {
        out << a.weight;
        for (double c : a.position) out << ' ' << c;
        out << '\n';
    }
}

void write_measure_file(const std::string& path, const AtomicMeasure& m) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    write_measure(out, m);
}

double euclidean_norm(const Vec& v) {
    double s = 0.0;
    for (double c : v) s += c * c;
    return std::sqrt(s);
}

double euclidean_dist(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

}  // namespace bmv
