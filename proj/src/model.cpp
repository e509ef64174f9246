#include "bmv/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace bmv {

MeasureContext MeasureContext::from(const AtomicMeasure& m) {
    MeasureContext ctx;
    ctx.mass = m.total_mass();
    ctx.first_moment.assign(m.dim(), 0.0);
    for (const auto& a : m.atoms())
        for (int i = 0; i < m.dim(); ++i) ctx.first_moment[i] += a.weight * a.position[i];
    ctx.second_moment = m.second_moment();
    ctx.measure = &m;
    return ctx;
}

double ModelSpec::eval_gamma(double t, const Vec& x, const MeasureContext& m, const Vec& a) const {
    double g = gamma(t, x, m, a);
    if (!(g >= 0.0) || g > gamma_bar * (1.0 + 1e-12))
        throw std::runtime_error("ModelSpec: gamma outside [0, gamma_bar]");
    return g;
}

std::vector<double> ModelSpec::eval_offspring(double t, const Vec& x, const MeasureContext& m,
                                              const Vec& a) const {
    auto pmf = offspring(t, x, m, a);
    if (pmf.size() > kMaxOffspring + 1)
        throw std::runtime_error("ModelSpec: offspring support exceeds cap");
    double sum = 0.0, m1 = 0.0, m2 = 0.0;
    for (std::size_t l = 0; l < pmf.size(); ++l) {
        if (pmf[l] < -1e-15) throw std::runtime_error("ModelSpec: negative offspring probability");
        sum += pmf[l];
        m1 += static_cast<double>(l) * pmf[l];
        m2 += static_cast<double>(l * l) * pmf[l];
    }
    if (std::abs(sum - 1.0) > 1e-12) throw std::runtime_error("ModelSpec: offspring pmf does not sum to 1");
    if (m1 > M1 * (1.0 + 1e-12) || m2 > M2 * (1.0 + 1e-12))
        throw std::runtime_error("ModelSpec: offspring moments exceed declared M1/M2");
    return pmf;
}

double ModelSpec::branching_rate(double t, const Vec& x, const MeasureContext& m,
                                 const Vec& a) const {
    double g = eval_gamma(t, x, m, a);
    if (g == 0.0) return 0.0;
    auto pmf = eval_offspring(t, x, m, a);
    double s = 0.0;
    for (std::size_t l = 0; l < pmf.size(); ++l)
        s += (static_cast<double>(l) - 1.0) * pmf[l];
    return g * s;
}

namespace {

std::vector<double> parse_params(std::istringstream& ss) {
    std::vector<double> out;
    double v;
    while (ss >> v) out.push_back(v);
    return out;
}

[[noreturn]] void bad_family(const std::string& what, const std::string& name) {
    throw std::invalid_argument("unknown " + what + " family: " + name);
}

}  // namespace

ModelSpec make_model(const std::string& drift_spec, const std::string& sigma_spec,
                     const std::string& gamma_spec, const std::string& offspring_spec, int dim,
                     double gamma_bar) {
    ModelSpec spec;
    spec.dim = dim;
    spec.gamma_bar = gamma_bar;

    {
        std::istringstream ss(drift_spec);
        std::string name;
        ss >> name;
        auto p = parse_params(ss);
        if (name == "zero") {
            spec.drift = [dim](double, const Vec&, const MeasureContext&, const Vec&) {
                return Vec(dim, 0.0);
            };
            spec.lipschitz.b = 0.0;
        } else if (name == "constant") {
            double c = p.at(0);
            spec.drift = [dim, c](double, const Vec&, const MeasureContext&, const Vec&) {
                return Vec(dim, c);
            };
            spec.lipschitz.b = 0.0;
        } else if (name == "affine") {
            double k = p.at(0), c = p.size() > 1 ? p[1] : 0.0;
            spec.drift = [k, c](double, const Vec& x, const MeasureContext&, const Vec&) {
                Vec out(x.size());
                for (std::size_t i = 0; i < x.size(); ++i) out[i] = k * x[i] + c;
                return out;
            };
            spec.lipschitz.b = std::abs(k);
            spec.bounded_coefficients = (k == 0.0);  // linear-growth family
        } else if (name == "action") {
            spec.drift = [dim](double, const Vec&, const MeasureContext&, const Vec& a) {
                Vec out(dim, 0.0);
                for (int i = 0; i < dim && i < static_cast<int>(a.size()); ++i) out[i] = a[i];
                return out;
            };
            spec.lipschitz.b = 1.0;
        } else if (name == "mass_coupled") {
            double k = p.at(0), c = p.size() > 1 ? p[1] : 0.0, q = p.size() > 2 ? p[2] : 0.0;
            spec.drift = [k, c, q](double, const Vec& x, const MeasureContext& m, const Vec&) {
                Vec out(x.size());
                for (std::size_t i = 0; i < x.size(); ++i) out[i] = k * x[i] + c + q * m.mass;
                return out;
            };
            spec.lipschitz.b = std::abs(k);
            spec.bounded_coefficients = false;
        } else {
            bad_family("drift", name);
        }
    }

    {
        std::istringstream ss(sigma_spec);
        std::string name;
        ss >> name;
        auto p = parse_params(ss);
        double s = (name == "constant") ? p.at(0) : 0.0;
        if (name != "zero" && name != "constant") bad_family("sigma", name);
        spec.sigma = [dim, s](double, const Vec&, const MeasureContext&, const Vec&) {
            Mat out(static_cast<std::size_t>(dim) * dim, 0.0);
            for (int i = 0; i < dim; ++i) out[static_cast<std::size_t>(i) * dim + i] = s;
            return out;
        };
        spec.lipschitz.sigma = 0.0;
    }

    {
        std::istringstream ss(gamma_spec);
        std::string name;
        ss >> name;
        auto p = parse_params(ss);
        double g = (name == "constant") ? p.at(0) : 0.0;
        if (name != "zero" && name != "constant") bad_family("gamma", name);
        if (g > gamma_bar)
            throw std::invalid_argument("make_model: constant gamma exceeds gamma_bar");
        spec.gamma = [g](double, const Vec&, const MeasureContext&, const Vec&) { return g; };
        spec.lipschitz.gamma = 0.0;
    }

    {
        std::istringstream ss(offspring_spec);
        std::string name;
        ss >> name;
        auto p = parse_params(ss);
        std::vector<double> pmf;
        if (name == "death") {
            pmf = {1.0};
        } else if (name == "identity") {
            pmf = {0.0, 1.0};
        } else if (name == "binary") {
            pmf = {0.0, 0.0, 1.0};
        } else if (name == "pmf") {
            pmf = p;
        } else {
            bad_family("offspring", name);
        }
        if (pmf.size() > kMaxOffspring + 1)
            throw std::invalid_argument("make_model: offspring support exceeds cap");
        double m1 = 0.0, m2 = 0.0;
        for (std::size_t l = 0; l < pmf.size(); ++l) {
            m1 += static_cast<double>(l) * pmf[l];
            m2 += static_cast<double>(l * l) * pmf[l];
        }
        spec.M1 = m1;
        spec.M2 = m2;
        spec.offspring = [pmf](double, const Vec&, const MeasureContext&, const Vec&) {
            return pmf;
        };
        spec.lipschitz.offspring = 0.0;
    }

    return spec;
}

}  // namespace bmv
