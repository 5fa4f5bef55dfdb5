#include "cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <yaml-cpp/yaml.h>

#include <weakval/weakval.hpp>

namespace weakval::cli {

namespace {

const std::vector<std::string> config_keys{"subcommand", "angle",       "K",          "k_grid",
                                           "visibility", "depol",       "rate_K",     "rate_wv",
                                           "duration_K", "duration_wv", "seed",       "workers",
                                           "out"};

std::vector<double> parse_grid(const std::string& s) {
    std::vector<double> grid;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            grid.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw cli_error(usage, "bad strength grid entry '" + item + "'");
        }
    }
    if (grid.empty()) throw cli_error(usage, "empty strength grid");
    return grid;
}

void load_yaml(const std::filesystem::path& path, RunConfig& cfg) {
    YAML::Node root;
    try {
        root = YAML::LoadFile(path.string());
    } catch (const YAML::BadFile&) {
        throw cli_error(io_failure, "cannot read config file " + path.string());
    } catch (const YAML::Exception& e) {
        throw cli_error(malformed_config, std::string("config: ") + e.what());
    }
    if (root.IsNull()) return;
    if (!root.IsMap()) throw cli_error(malformed_config, "config must be a mapping");
    try {
        for (const auto& kv : root) {
            const auto key = kv.first.as<std::string>();
            if (std::find(config_keys.begin(), config_keys.end(), key) == config_keys.end())
                throw cli_error(malformed_config, "unknown config key '" + key + "'");
        }
        if (root["subcommand"]) cfg.subcommand = root["subcommand"].as<std::string>();
        if (root["angle"]) cfg.angle_deg = root["angle"].as<double>();
        if (root["K"]) cfg.K = root["K"].as<double>();
        if (root["k_grid"]) cfg.K_grid = root["k_grid"].as<std::vector<double>>();
        if (root["visibility"]) cfg.params.visibility = root["visibility"].as<double>();
        if (root["depol"]) cfg.params.depol = root["depol"].as<double>();
        if (root["rate_K"]) cfg.plan.unpostselected_rate = root["rate_K"].as<double>();
        if (root["rate_wv"]) cfg.plan.postselected_rate = root["rate_wv"].as<double>();
        if (root["duration_K"]) cfg.plan.duration_K = root["duration_K"].as<double>();
        if (root["duration_wv"]) cfg.plan.duration_wv = root["duration_wv"].as<double>();
        if (root["seed"]) cfg.plan.seed = root["seed"].as<std::uint64_t>();
        if (root["workers"]) cfg.workers = root["workers"].as<unsigned>();
        if (root["out"]) cfg.out = root["out"].as<std::string>();
    } catch (const YAML::Exception& e) {
        throw cli_error(malformed_config, std::string("config: ") + e.what());
    }
}

void check_range(const RunConfig& cfg) {
    auto bad = [](const std::string& what) { throw cli_error(out_of_range, what); };
    if (!(cfg.angle_deg >= 0.0 && cfg.angle_deg < 360.0)) bad("angle must lie in [0, 360)");
    auto check_k = [&](double k) {
        if (!(k > -1.0 && k <= 1.0)) bad("strength K must lie in (-1, 1]");
    };
    if (cfg.K) check_k(*cfg.K);
    for (double k : cfg.K_grid) check_k(k);
    if (!(cfg.params.visibility >= 0.0 && cfg.params.visibility <= 1.0)) bad("visibility must lie in [0, 1]");
    if (!(cfg.params.depol >= 0.0 && cfg.params.depol <= 1.0)) bad("depol must lie in [0, 1]");
    for (double x : {cfg.plan.unpostselected_rate, cfg.plan.postselected_rate, cfg.plan.duration_K,
                     cfg.plan.duration_wv})
        if (!(std::isfinite(x) && x >= 0.0)) bad("rates and durations must be >= 0");
    if (cfg.workers == 0) bad("workers must be >= 1");
}

std::filesystem::path output_path(const RunConfig& cfg, const char* default_name) {
    if (!cfg.out.empty()) return cfg.out;
    const char* dir = std::getenv("WEAKVAL_OUT_DIR");
    return std::filesystem::path(dir && *dir ? dir : ".") / default_name;
}

/// Files are removed again unless commit() is reached.
class OutputSet {
public:
    std::ofstream open(const std::filesystem::path& p) {
        std::ofstream f(p);
        if (!f) throw cli_error(io_failure, "cannot write " + p.string());
        paths_.push_back(p);
        return f;
    }
    void close(std::ofstream& f, const std::filesystem::path& p) {
        f.close();
        if (!f) throw cli_error(io_failure, "error writing " + p.string());
    }
    void commit() { paths_.clear(); }
    ~OutputSet() {
        std::error_code ec;
        for (const auto& p : paths_) std::filesystem::remove(p, ec);
    }

private:
    std::vector<std::filesystem::path> paths_;
};

Polarization input_state(const RunConfig& cfg) { return Polarization::from_degrees(cfg.angle_deg); }

std::string describe(const RunConfig& cfg) {
    std::ostringstream os;
    os << "# angle_deg=" << format_real(cfg.angle_deg) << " visibility=" << format_real(cfg.params.visibility)
       << " depol=" << format_real(cfg.params.depol) << " seed=" << cfg.plan.seed;
    if (cfg.K) os << " K=" << format_real(*cfg.K);
    return os.str();
}

int gate_verify(const RunConfig& cfg, std::ostream& out) {
    std::mt19937_64 rng(cfg.plan.seed);
    std::normal_distribution<double> n;
    double worst_infidelity = 0.0, worst_success = 0.0;
    for (double g : {M_SQRT1_2, 0.75, 0.8, 0.9, 1.0}) {
        const auto meter = MeterSetting::from_gamma(g);
        for (int i = 0; i < 20; ++i) {
            const Polarization psi = Polarization::normalized(cplx(n(rng), n(rng)), cplx(n(rng), n(rng)));
            const TwoQubitState s = run_device(psi, meter);
            worst_infidelity = std::max(worst_infidelity, 1.0 - local_phase_fidelity(ideal_output(psi, meter), s.amplitudes));
            worst_success = std::max(worst_success, std::abs(s.success_prob - 1.0 / 9.0));
        }
    }
    out << describe(cfg) << '\n'
        << "max_infidelity " << format_real(worst_infidelity) << '\n'
        << "max_success_error " << format_real(worst_success) << '\n';
    return worst_infidelity > 1e-10 || worst_success > 1e-10 ? gate_check_failed : ok;
}

int povm(const RunConfig& cfg, std::ostream& out) {
    const Povm p = povm_elements(MeterSetting::from_strength(cfg.K.value_or(1.0)));
    out << describe(cfg) << '\n';
    for (const auto& [name, m] : {std::pair{"Pi_H", p.pi_H}, std::pair{"Pi_V", p.pi_V}}) {
        out << name << '\n';
        for (int r = 0; r < 2; ++r) out << format_real(m(r, 0).real()) << ' ' << format_real(m(r, 1).real()) << '\n';
    }
    return ok;
}

int weak_value(const RunConfig& cfg, std::ostream& out) {
    const double K = cfg.K.value_or(0.006);
    if (K == 0.0) throw cli_error(degenerate, "the weak value is undefined at K = 0");
    const Polarization psi = input_state(cfg);
    const bool ideal = cfg.params.visibility == 1.0 && cfg.params.depol == 0.0;
    const double wv = ideal ? weak_value_analytic(psi, MeterSetting::from_strength(K), PostselectState::A())
                            : model_weak_value(imperfect_channel(cfg.params), psi, K);
    out << describe(cfg) << '\n' << format_real(wv) << '\n';
    return ok;
}

int fig2(const RunConfig& cfg, std::ostream& out) {
    const std::vector<double> grid = cfg.K_grid.empty() ? (cfg.K ? std::vector{*cfg.K} : default_k_grid()) : cfg.K_grid;
    const Polarization psi = input_state(cfg);
    const auto rows = run_fig2(cfg.plan, psi, cfg.params, grid, cfg.workers);

    const auto csv = output_path(cfg, "fig2.csv");
    auto meta = csv;
    meta.replace_extension(".json");
    OutputSet files;
    auto f = files.open(csv);
    write_fig2_csv(f, rows);
    files.close(f, csv);
    auto j = fig2_metadata(cfg.plan, psi, cfg.params, grid);
    j["angle_deg"] = cfg.angle_deg;
    auto m = files.open(meta);
    m << j.dump(2) << '\n';
    files.close(m, meta);
    files.commit();
    out << csv.string() << '\n' << meta.string() << '\n';
    return ok;
}

int tomo(const RunConfig& cfg, std::ostream& out) {
    const ChiMatrix chi = process_tomography(imperfect_channel(cfg.params));
    const auto csv = output_path(cfg, "chi.csv");
    auto meta = csv;
    meta.replace_extension(".json");
    OutputSet files;
    auto f = files.open(csv);
    write_chi_csv(f, chi);
    files.close(f, csv);
    nlohmann::json j;
    j["model"] = {{"visibility", cfg.params.visibility}, {"depol", cfg.params.depol}};
    j["layout"] = "16 rows, re/im interleaved, Pauli index 4i+j over {I,X,Y,Z}";
    j["trace"] = chi.trace().real();
    j["rank"] = chi.rank();
    j["version"] = version;
    auto m = files.open(meta);
    m << j.dump(2) << '\n';
    files.close(m, meta);
    files.commit();
    out << csv.string() << '\n' << meta.string() << '\n';
    return ok;
}

} // namespace

std::vector<double> default_k_grid() { return {0.006, 0.05, 0.125, 0.25, 0.5, 0.75, 1.0}; }

RunConfig parse_config(const std::vector<std::string>& args) {
    CLI::App app{"Weak-value experiment simulator", "weakval"};
    app.require_subcommand(1);
    std::string config_file, k_grid, out;
    double angle = 0, K = 0, vis = 0, depol = 0, rate_K = 0, rate_wv = 0, dur_K = 0, dur_wv = 0;
    std::uint64_t seed = 0;
    unsigned workers = 1;

    std::vector<CLI::App*> subs;
    for (const char* name : {"gate-verify", "povm", "weak-value", "fig2", "tomo"}) subs.push_back(app.add_subcommand(name));
    subs[0]->description("Compare Fock propagation with the two-qubit gate model");
    subs[1]->description("Print the meter POVM elements at strength K");
    subs[2]->description("Print the A-postselected weak value of S1");
    subs[3]->description("Simulate the counting experiment over a strength grid");
    subs[4]->description("Process tomography of the device model");

    std::vector<CLI::Option*> opts;
    for (auto* sub : subs) {
        sub->add_option("--config", config_file, "YAML file; flags override its values");
        sub->add_option("--angle", angle, "input state angle in degrees (default 42)");
        sub->add_option("--K", K, "measurement strength");
        sub->add_option("--k-grid", k_grid, "comma-separated strengths");
        sub->add_option("--visibility", vis, "mode-matching visibility (default 1)");
        sub->add_option("--depol", depol, "white-noise weight (default 0)");
        sub->add_option("--rate-K", rate_K, "unpostselected rate, 1/s (default 44.6)");
        sub->add_option("--rate-wv", rate_wv, "postselected rate, 1/s (default 0.52)");
        sub->add_option("--duration-K", dur_K, "calibration run, s (default 100)");
        sub->add_option("--duration-wv", dur_wv, "postselected run, s (default 1000)");
        sub->add_option("--seed", seed, "master seed (default 0)");
        sub->add_option("--workers", workers, "threads for fig2 (default 1)");
        sub->add_option("--out", out, "output file (default in $WEAKVAL_OUT_DIR or .)");
    }

    std::vector<std::string> argv(args.rbegin(), args.rend());
    try {
        app.parse(argv);
    } catch (const CLI::CallForHelp&) {
        throw cli_error(ok, app.help());
    } catch (const CLI::ParseError& e) {
        throw cli_error(usage, e.what());
    }

    CLI::App* sub = app.get_subcommands().front();
    auto given = [&](const char* flag) { return sub->count(flag) > 0; };

    RunConfig cfg;
    if (given("--config")) load_yaml(config_file, cfg);
    if (!cfg.subcommand.empty() && cfg.subcommand != sub->get_name())
        throw cli_error(conflicting_values, "config file is for subcommand '" + cfg.subcommand + "'");
    cfg.subcommand = sub->get_name();
    if (given("--angle")) cfg.angle_deg = angle;
    if (given("--K")) cfg.K = K;
    if (given("--k-grid")) cfg.K_grid = parse_grid(k_grid);
    if (given("--visibility")) cfg.params.visibility = vis;
    if (given("--depol")) cfg.params.depol = depol;
    if (given("--rate-K")) cfg.plan.unpostselected_rate = rate_K;
    if (given("--rate-wv")) cfg.plan.postselected_rate = rate_wv;
    if (given("--duration-K")) cfg.plan.duration_K = dur_K;
    if (given("--duration-wv")) cfg.plan.duration_wv = dur_wv;
    if (given("--seed")) cfg.plan.seed = seed;
    if (given("--workers")) cfg.workers = workers;
    if (given("--out")) cfg.out = out;

    if (cfg.K && !cfg.K_grid.empty()) throw cli_error(conflicting_values, "give either K or a strength grid, not both");
    if (!cfg.K_grid.empty() && cfg.subcommand != "fig2")
        throw cli_error(conflicting_values, "a strength grid only applies to fig2");
    check_range(cfg);
    return cfg;
}

int execute(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        if (cfg.subcommand == "gate-verify") return gate_verify(cfg, out);
        if (cfg.subcommand == "povm") return povm(cfg, out);
        if (cfg.subcommand == "weak-value") return weak_value(cfg, out);
        if (cfg.subcommand == "fig2") return fig2(cfg, out);
        if (cfg.subcommand == "tomo") return tomo(cfg, out);
        throw cli_error(usage, "unknown subcommand '" + cfg.subcommand + "'");
    } catch (const cli_error&) {
        throw;
    } catch (const weakval::error& e) {
        err << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
        switch (e.code()) {
        case errc::weak_value_unbounded:
        case errc::divergence:
        case errc::indeterminate_strength:
        case errc::postselection_impossible:
            return degenerate;
        case errc::invalid_argument:
            return out_of_range;
        default:
            return library_failure;
        }
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return io_failure;
    }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    try {
        return execute(parse_config(args), out, err);
    } catch (const cli_error& e) {
        (e.code == ok ? out : err) << (e.code == ok ? "" : "error: ") << e.what() << '\n';
        return e.code;
    }
}

} // namespace weakval::cli
