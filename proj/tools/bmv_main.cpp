// Command-line front end: metric evaluation, branching-diffusion
// simulation, value/DPP estimation, and the registered check suites.
// Every run writes a manifest next to its results; outputs are
// deterministic given the manifest.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "bmv/calculus.hpp"
#include "bmv/config_file.hpp"
#include "bmv/control.hpp"
#include "bmv/diagnostics.hpp"
#include "bmv/metrics.hpp"
#include "bmv/suite.hpp"
#include "bmv/transport.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

using bmv::Vec;
using ordered_json = nlohmann::ordered_json;

struct GlobalOpts {
    std::uint64_t seed = 0;
    int threads = 1;  // accepted knob; results are thread-count independent
    std::string out_dir = ".";
    std::string format = "json";
};

std::string join_path(const std::string& dir, const std::string& name) {
    if (dir.empty() || dir == ".") return name;
    return dir.back() == '/' ? dir + name : dir + "/" + name;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << text << "\n";
}

void emit(const GlobalOpts& g, bmv::RunManifest manifest, const std::string& result_name,
          const std::string& result_json) {
    std::string result_path = join_path(g.out_dir, result_name);
    write_text(result_path, result_json);
    manifest.tool_version = kVersion;
    manifest.master_seed = g.seed;
    manifest.output_paths.push_back(result_path);
    write_text(join_path(g.out_dir, manifest.subcommand + "_manifest.json"), manifest.to_json());
    std::cout << result_json << "\n";
}

bmv::ModelSpec load_model(const bmv::ConfigFile& cfg) {
    auto dim = static_cast<int>(cfg.get_int_or("model", "dim", 1));
    double gamma_bar = cfg.get_double_or("model", "gamma_bar", 1.0);
    auto model = bmv::make_model(cfg.get_or("model", "drift", "zero"),
                                 cfg.get_or("model", "sigma", "zero"),
                                 cfg.get_or("model", "gamma", "zero"),
                                 cfg.get_or("model", "offspring", "identity"), dim, gamma_bar);
    cfg.finish();
    return model;
}

std::vector<double> parse_doubles(const std::string& s) {
    std::istringstream ss(s);
    std::vector<double> out;
    double v;
    while (ss >> v) out.push_back(v);
    if (!ss.eof()) throw std::runtime_error("malformed number list: '" + s + "'");
    return out;
}

bmv::Policy load_policy(const bmv::ConfigFile& cfg) {
    auto family = bmv::policy_family_from_string(cfg.get_or("policy", "family", "constant"));
    auto state_dim = static_cast<int>(cfg.get_int_or("policy", "state_dim", 1));
    auto action_dim = static_cast<int>(cfg.get_int_or("policy", "action_dim", 1));
    double lo = cfg.get_double_or("policy", "a_lo", -1.0);
    double hi = cfg.get_double_or("policy", "a_hi", 1.0);
    std::vector<double> params = parse_doubles(cfg.get_or("policy", "params", ""));
    if (params.empty())
        params.assign(bmv::Policy::param_count_for(family, state_dim, action_dim), 0.0);
    cfg.finish();
    return bmv::Policy(family, state_dim, action_dim, Vec(action_dim, lo), Vec(action_dim, hi),
                       std::move(params));
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

int cmd_metric(const GlobalOpts& g, const std::string& file1, const std::string& file2,
               const std::string& which, bool lambda_auto, double radius, std::size_t nodes,
               bool grid_requested) {
    auto m1 = bmv::read_measure_file(file1);
    auto m2 = bmv::read_measure_file(file2);
    auto idx = bmv::LambdaIndex::for_dim(m1.dim());
    (void)lambda_auto;  // lambda always follows the dimension rule

    bmv::QuadratureScheme scheme = bmv::QuadratureScheme::grid(radius, nodes);
    if (!grid_requested && m1.dim() == 1 && idx.lambda == 4)
        scheme = bmv::QuadratureScheme::closed_form();

    ordered_json j;
    if (which == "w1") {
        j["value"] = bmv::truncated_w1(m1, m2);
        j["scheme"] = "exact_transport";
        j["tail_bound"] = 0.0;
    } else {
        auto res = which == "sobolev" ? bmv::sobolev_neg_norm(m1, m2, idx, scheme)
                                      : bmv::rho_F(m1, m2, idx, scheme);
        j["value"] = res.value;
        j["scheme"] = res.scheme;
        j["tail_bound"] = res.tail_bound;
        if (which == "rhoF" && m1.dim() == 1)
            j["constant_C"] = bmv::domination_constant(idx);
    }
    j["lambda"] = idx.lambda;

    bmv::RunManifest man;
    man.subcommand = "metric";
    man.resolved_config = {{"metric", which},
                           {"radius", fmt_double(radius)},
                           {"nodes", std::to_string(nodes)}};
    man.input_digests[file1] = bmv::file_digest(file1);
    man.input_digests[file2] = bmv::file_digest(file2);
    emit(g, std::move(man), "metric_result.json", j.dump(2));
    return 0;
}

int cmd_simulate(const GlobalOpts& g, const std::string& model_file,
                 const std::string& policy_file, double t0, double T, double dt,
                 std::size_t replicas) {
    auto model_cfg = bmv::ConfigFile::parse_file(model_file);
    auto init_spec = model_cfg.get_or("model", "init", "");
    auto model = load_model(model_cfg);
    auto policy = load_policy(bmv::ConfigFile::parse_file(policy_file));

    bmv::AtomicMeasure nu(model.dim);
    if (init_spec.empty()) {
        nu.add_atom(Vec(model.dim, 0.0), 1.0);
    } else {
        auto vals = parse_doubles(init_spec);  // positions of unit atoms, d=1
        for (double x : vals) nu.add_atom({x}, 1.0);
    }

    bmv::SimConfig cfg;
    cfg.t0 = t0;
    cfg.T = T;
    cfg.dt = dt;
    cfg.replicas = replicas;
    cfg.seed = g.seed;

    bmv::CountTracker counts;
    class MomentTracker : public bmv::StepObserver {
      public:
        void on_state(std::size_t, double time, const std::vector<bmv::Configuration>&,
                      const bmv::AtomicMeasure& mu_hat) override {
            times.push_back(time);
            masses.push_back(mu_hat.total_mass());
            first.push_back(mu_hat.dim() >= 1 ? mu_hat.coordinate_moment(0) : 0.0);
        }
        std::vector<double> times, masses, first;
    } moments;
    std::size_t events = 0;
    class EventCounter : public bmv::StepObserver {
      public:
        explicit EventCounter(std::size_t& n) : n_(n) {}
        void on_state(std::size_t, double, const std::vector<bmv::Configuration>&,
                      const bmv::AtomicMeasure&) override {}
        void on_event(std::size_t, double, std::size_t, const bmv::Label&,
                      std::uint32_t) override {
            ++n_;
        }

      private:
        std::size_t& n_;
    } event_counter(events);

    std::vector<bmv::StepObserver*> obs{&counts, &moments, &event_counter};
    bmv::simulate(model, policy, bmv::fixed_sampler(nu), cfg, obs);

    ordered_json j;
    j["t0"] = t0;
    j["T"] = T;
    j["dt"] = dt;
    j["replicas"] = replicas;
    j["steps"] = cfg.steps();
    j["events"] = events;
    j["terminal_mass"] = moments.masses.back();
    j["terminal_first_moment"] = moments.first.back();
    auto ms = counts.mass_at_step(cfg.steps());
    j["terminal_mass_stderr"] = ms.stderr;

    bmv::RunManifest man;
    man.subcommand = "simulate";
    man.resolved_config = {{"t0", fmt_double(t0)},     {"T", fmt_double(T)},
                           {"dt", fmt_double(dt)},     {"replicas", std::to_string(replicas)},
                           {"model", model_file},      {"policy", policy_file}};
    man.input_digests[model_file] = bmv::file_digest(model_file);
    man.input_digests[policy_file] = bmv::file_digest(policy_file);

    if (g.format == "csv") {
        std::ostringstream csv;
        csv << "time,mass,first_moment\n";
        for (std::size_t i = 0; i < moments.times.size(); ++i)
            csv << fmt_double(moments.times[i]) << "," << fmt_double(moments.masses[i]) << ","
                << fmt_double(moments.first[i]) << "\n";
        std::string csv_path = join_path(g.out_dir, "simulate_series.csv");
        write_text(csv_path, csv.str());
        man.output_paths.push_back(csv_path);
    }
    emit(g, std::move(man), "simulate_result.json", j.dump(2));
    return 0;
}

bmv::Policy value_prototype(const std::string& family, int dim, double a_lo, double a_hi) {
    auto fam = bmv::policy_family_from_string(family);
    auto n = bmv::Policy::param_count_for(fam, dim, dim);
    return bmv::Policy(fam, dim, dim, Vec(dim, a_lo), Vec(dim, a_hi),
                       std::vector<double>(n, 0.0));
}

int cmd_value(const GlobalOpts& g, const std::string& nu_file, double t, double T, double dt,
              std::size_t replicas, const std::string& family, int restarts, int iters,
              double a_lo, double a_hi) {
    auto nu = bmv::read_measure_file(nu_file);
    auto model = bmv::make_model("action", "zero", "zero", "identity", nu.dim(), 1.0);
    auto cost = bmv::CostSpec::lq();

    bmv::SimConfig sim;
    sim.dt = dt;
    sim.replicas = replicas;
    sim.seed = g.seed;
    bmv::OptimBudget budget;
    budget.restarts = restarts;
    budget.max_iters = iters;

    auto res = bmv::approximate_value(model, cost, nu, t, T, value_prototype(family, nu.dim(), a_lo, a_hi),
                                      sim, budget);
    ordered_json j;
    j["value"] = res.value;
    j["stderr"] = res.stderr;
    j["converged"] = res.converged;
    j["simplex_diameter"] = res.simplex_diameter;
    j["best_params"] = res.best_policy.params();
    j["restart_values"] = res.restart_values;

    bmv::RunManifest man;
    man.subcommand = "value";
    man.resolved_config = {{"t", fmt_double(t)},       {"T", fmt_double(T)},
                           {"dt", fmt_double(dt)},     {"replicas", std::to_string(replicas)},
                           {"family", family},         {"restarts", std::to_string(restarts)},
                           {"iters", std::to_string(iters)}};
    man.input_digests[nu_file] = bmv::file_digest(nu_file);
    emit(g, std::move(man), "value_result.json", j.dump(2));
    return 0;
}

int cmd_dpp(const GlobalOpts& g, const std::string& nu_file, double t, double split, double T,
            double dt, std::size_t replicas, const std::string& family, int restarts, int iters,
            double a_lo, double a_hi) {
    auto nu = bmv::read_measure_file(nu_file);
    auto model = bmv::make_model("action", "zero", "zero", "identity", nu.dim(), 1.0);
    auto cost = bmv::CostSpec::lq();

    bmv::SimConfig sim;
    sim.dt = dt;
    sim.replicas = replicas;
    sim.seed = g.seed;
    bmv::OptimBudget budget;
    budget.restarts = restarts;
    budget.max_iters = iters;

    auto rep = bmv::check_dpp(model, cost, nu, t, split, T,
                              value_prototype(family, nu.dim(), a_lo, a_hi), sim, budget);
    ordered_json j;
    j["lhs"] = rep.lhs;
    j["rhs"] = rep.rhs;
    j["gap"] = rep.gap;
    j["eps_mc"] = rep.eps_mc;
    j["eps_opt"] = rep.eps_opt;
    j["tolerance"] = rep.tolerance;
    j["holds"] = rep.holds;

    bmv::RunManifest man;
    man.subcommand = "dpp";
    man.resolved_config = {{"t", fmt_double(t)},         {"split_time", fmt_double(split)},
                           {"T", fmt_double(T)},         {"dt", fmt_double(dt)},
                           {"replicas", std::to_string(replicas)}, {"family", family}};
    man.input_digests[nu_file] = bmv::file_digest(nu_file);
    emit(g, std::move(man), "dpp_result.json", j.dump(2));
    return rep.holds ? 0 : 1;
}

int cmd_suite(const GlobalOpts& g, const std::string& name, const std::string& result_stem) {
    auto rep = bmv::run_suite(name, g.seed);
    bmv::RunManifest man;
    man.subcommand = result_stem;
    man.resolved_config = {{"suite", name}, {"seed", std::to_string(g.seed)}};
    emit(g, std::move(man), result_stem + "_" + name + ".json", rep.to_json());
    return rep.passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"branching McKean-Vlasov toolkit"};
    app.require_subcommand(1);
    GlobalOpts g;
    app.add_option("--seed", g.seed, "master seed");
    app.add_option("--threads", g.threads, "worker count (no effect on results)")
        ->check(CLI::PositiveNumber);
    app.add_option("--out-dir", g.out_dir, "output directory");
    app.add_option("--format", g.format, "json|csv")
        ->check(CLI::IsMember({"json", "csv"}));

    // metric
    auto* metric = app.add_subcommand("metric", "distance between two measure files");
    std::string file1, file2, which = "rhoF";
    bool lambda_auto = false;
    double radius = 50.0;
    std::size_t nodes = 20000;
    metric->add_option("measure1", file1)->required();
    metric->add_option("measure2", file2)->required();
    metric->add_option("--metric", which)->check(CLI::IsMember({"rhoF", "w1", "sobolev"}));
    metric->add_flag("--lambda-auto", lambda_auto, "derive lambda from the dimension (default)");
    auto* radius_opt = metric->add_option("--radius", radius, "frequency truncation radius");
    auto* nodes_opt = metric->add_option("--nodes", nodes, "quadrature nodes per axis");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "run the branching diffusion");
    std::string model_file, policy_file;
    double t0 = 0.0, T = 1.0, dt = 1e-2;
    std::size_t replicas = 100;
    simulate->add_option("--model", model_file)->required();
    simulate->add_option("--policy", policy_file)->required();
    simulate->add_option("--t0", t0);
    simulate->add_option("--T", T);
    simulate->add_option("--dt", dt);
    simulate->add_option("--replicas", replicas);

    // value / dpp
    auto* value = app.add_subcommand("value", "approximate the value function");
    auto* dpp = app.add_subcommand("dpp", "dynamic programming consistency check");
    std::string nu_file, family = "constant";
    double vt = 0.0, vT = 1.0, vdt = 1e-2, split = 0.5, a_lo = -2.0, a_hi = 2.0;
    std::size_t vreplicas = 4000;
    int restarts = 2, iters = 40;
    for (auto* cmd : {value, dpp}) {
        cmd->add_option("--nu", nu_file)->required();
        cmd->add_option("--t", vt);
        cmd->add_option("--T", vT);
        cmd->add_option("--dt", vdt);
        cmd->add_option("--replicas", vreplicas);
        cmd->add_option("--family", family)
            ->check(CLI::IsMember({"constant", "affine_clamped", "tanh_features"}));
        cmd->add_option("--restarts", restarts);
        cmd->add_option("--iters", iters);
        cmd->add_option("--a-lo", a_lo);
        cmd->add_option("--a-hi", a_hi);
    }
    dpp->add_option("--split-time", split);

    // check / suite
    auto* check = app.add_subcommand("check", "run a registered check battery");
    std::string check_suite;
    check->add_option("--suite", check_suite)
        ->required()
        ->check(CLI::IsMember({"ito", "hamiltonian", "aux", "lfd"}));
    auto* suite = app.add_subcommand("suite", "run a named suite (or 'all')");
    std::string suite_name;
    suite->add_option("name", suite_name)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (metric->parsed())
            return cmd_metric(g, file1, file2, which, lambda_auto, radius, nodes,
                              radius_opt->count() > 0 || nodes_opt->count() > 0);
        if (simulate->parsed()) return cmd_simulate(g, model_file, policy_file, t0, T, dt, replicas);
        if (value->parsed())
            return cmd_value(g, nu_file, vt, vT, vdt, vreplicas, family, restarts, iters, a_lo,
                             a_hi);
        if (dpp->parsed())
            return cmd_dpp(g, nu_file, vt, split, vT, vdt, vreplicas, family, restarts, iters,
                           a_lo, a_hi);
        if (check->parsed()) return cmd_suite(g, check_suite, "check");
        if (suite->parsed()) return cmd_suite(g, suite_name, "suite");
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
