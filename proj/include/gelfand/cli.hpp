// Batch experiment runner behind the `gelfand` tool. Configs are flat
// `key = value` text; every output embeds the resolved config, its FNV-1a
// hash and the seed, so a run can be repeated from its own output.
#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gelfand/levy.hpp"
#include "gelfand/transform.hpp"
#include "gelfand/verify.hpp"

namespace gelfand::cli {

inline constexpr const char* format_version = "gelfand-csv/1";

inline const std::vector<std::string>& commands() {
    static const std::vector<std::string> c{"decompose",        "spherical",        "transform",
                                            "simulate",         "verify-lk",        "verify-generator",
                                            "verify-semigroup", "calibrate-plancherel", "bi-invariance"};
    return c;
}

/// Usage or config problem; maps to exit code 1.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Every recognized key with its default. Lists are comma separated.
inline const std::map<std::string, std::string>& default_config() {
    static const std::map<std::string, std::string> d{
        {"command", ""},
        {"seed", "1"},
        {"n_paths", "10000"},
        {"dt", "0.01"},
        {"t", "1"},
        {"s", "0.5"},
        {"t_list", "0.1,0.05,0.025"},
        {"steps", "8"},
        {"lambdas", "0.5,1,2"},
        {"radii", "0.1,1,3"},
        {"quadrature.n_points", "256"},
        {"model.drift", "0,0"},
        {"model.a11", "0"},
        {"model.a12", "0"},
        {"model.a22", "0"},
        {"model.jump_intensity", "0"},
        {"model.jump_law", "none"},
        {"model.jump_radius", "1"},
        {"model.jump_point", "1,0"},
        {"model.jump_angles", "0,1.5707963267948966"},
        {"model.jump_weights", "0.75,0.25"},
        {"test.center", "0.3,1.2"},
        {"test.radius", "2"},
        {"radial.width", "1"},
        {"radial.cutoff", "7"},
        {"spectral.step", "0.05"},
        {"max_radius", "3"},
        {"output", "out.csv"},
    };
    return d;
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

/// Parses `key = value` lines; `#` starts a comment.
inline std::map<std::string, std::string> parse_config_text(const std::string& text) {
    std::map<std::string, std::string> out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto h = line.find('#'); h != std::string::npos) line.resize(h);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        if (!default_config().contains(key)) throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        out[key] = trim(line.substr(eq + 1));
    }
    return out;
}

inline std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str());
}

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

/// Fully resolved configuration.
struct ExperimentConfig {
    std::map<std::string, std::string> values;

    static ExperimentConfig resolve(const std::map<std::string, std::string>& overrides) {
        ExperimentConfig c{default_config()};
        for (const auto& [k, v] : overrides) {
            if (!c.values.contains(k)) throw ConfigError("unknown key '" + k + "'");
            c.values[k] = v;
        }
        return c;
    }

    const std::string& get(const std::string& key) const { return values.at(key); }

    double number(const std::string& key) const {
        const std::string& v = get(key);
        try {
            std::size_t used = 0;
            const double x = std::stod(v, &used);
            if (used != v.size()) throw std::invalid_argument(v);
            return x;
        } catch (const std::exception&) {
            throw ConfigError("key '" + key + "': '" + v + "' is not a number");
        }
    }

    std::uint64_t unsigned_integer(const std::string& key) const {
        const std::string& v = get(key);
        try {
            std::size_t used = 0;
            if (!v.empty() && v[0] == '-') throw std::invalid_argument(v);
            const auto x = std::stoull(v, &used);
            if (used != v.size()) throw std::invalid_argument(v);
            return x;
        } catch (const std::exception&) {
            throw ConfigError("key '" + key + "': '" + v + "' is not a nonnegative integer");
        }
    }

    std::vector<double> list(const std::string& key) const {
        std::vector<double> out;
        std::stringstream ss(get(key));
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item.empty()) continue;
            try {
                std::size_t used = 0;
                out.push_back(std::stod(item, &used));
                if (used != item.size()) throw std::invalid_argument(item);
            } catch (const std::exception&) {
                throw ConfigError("key '" + key + "': '" + item + "' is not a number");
            }
        }
        return out;
    }

    std::string command() const { return get("command"); }
    std::uint64_t seed() const { return unsigned_integer("seed"); }

    /// Sorted `key = value` lines; the hash input and the embedded record.
    /// The output path is left out: where a result is written does not
    /// change what it is.
    std::string canonical() const {
        std::ostringstream os;
        for (const auto& [k, v] : values) {
            if (k != "output") os << k << " = " << v << "\n";
        }
        return os.str();
    }

    std::string hash_hex() const {
        std::ostringstream os;
        os << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(canonical());
        return os.str();
    }

    LevyModel model() const {
        LevyModel m;
        const auto b = list("model.drift");
        if (b.size() != 2) throw ConfigError("key 'model.drift': expected two entries");
        m.b = {b[0], b[1]};
        const double a12 = number("model.a12");
        m.a = {number("model.a11"), a12, a12, number("model.a22")};
        m.jump_intensity = number("model.jump_intensity");
        const std::string law = get("model.jump_law");
        const double radius = number("model.jump_radius");
        if (law == "none") {
            m.jump_intensity = 0.0;
        } else if (law == "point") {
            const auto w = list("model.jump_point");
            if (w.size() != 2) throw ConfigError("key 'model.jump_point': expected two entries");
            m.jump_law = PointMassJump{{w[0], w[1], 0.0}};
        } else if (law == "isotropic") {
            m.jump_law = IsotropicShellJump{radius};
        } else if (law == "mixture") {
            m.jump_law = AngularMixtureJump{radius, list("model.jump_angles"), list("model.jump_weights")};
        } else if (law == "anisotropic") {
            m.jump_law = default_anisotropic_law(radius);
        } else {
            throw ConfigError("key 'model.jump_law': unknown law '" + law +
                              "' (none, point, isotropic, mixture, anisotropic)");
        }
        if (law != "none" && !(m.jump_intensity > 0.0)) {
            throw ConfigError("key 'model.jump_intensity': must be > 0 when a jump law is set");
        }
        try {
            m.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        return m;
    }

    QuadratureSpec quadrature() const {
        QuadratureSpec q{static_cast<int>(unsigned_integer("quadrature.n_points")), true};
        try {
            q.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        return q;
    }
};

/// Numeric table with a documented header; cells are printed with 17
/// significant digits so they round-trip exactly.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

inline std::string format_number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x == 0.0 ? 0.0 : x); // no "-0"
    return buf;
}

inline std::string render_csv(const Table& table, const ExperimentConfig& cfg) {
    std::ostringstream os;
    os << "# format: " << format_version << "\n";
    os << "# seed: " << cfg.seed() << "\n";
    os << "# config_hash: " << cfg.hash_hex() << "\n";
    std::istringstream lines(cfg.canonical());
    std::string line;
    while (std::getline(lines, line)) os << "# config: " << line << "\n";
    for (std::size_t i = 0; i < table.columns.size(); ++i) os << (i ? "," : "") << table.columns[i];
    os << "\n";
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_number(row[i]);
        os << "\n";
    }
    return os.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot write output file '" + path + "'");
    f << content;
    if (!f) throw ConfigError("write failed for '" + path + "'");
}

inline void emit_csv(const Table& table, const ExperimentConfig& cfg, const std::string& path) {
    write_file(path, render_csv(table, cfg));
}

inline Table report_table(const VerificationReport& rep) {
    Table t{{"lambda", "t", "empirical_re", "empirical_im", "std_err", "predicted", "z_score"}, {}};
    for (const auto& r : rep.rows) {
        t.rows.push_back({r.lambda, r.t, r.empirical.real(), r.empirical.imag(), r.std_err, r.predicted, r.z_score});
    }
    return t;
}

inline Table spectral_table(const SpectralGrid& g) {
    Table t{{"lambda", "value_re", "value_im"}, {}};
    for (std::size_t i = 0; i < g.lambdas.size(); ++i) t.rows.push_back({g.lambdas[i], g.values[i].real(), g.values[i].imag()});
    return t;
}

inline Table path_table(const PathSample& p) {
    Table t{{"time", "x", "y"}, {}};
    const auto pts = project_path(p);
    for (std::size_t i = 0; i < pts.size(); ++i) t.rows.push_back({p.times[i], pts[i].x, pts[i].y});
    return t;
}

struct RunResult {
    Table table;
    std::size_t gates_passed = 0;
    std::size_t gates_failed = 0;
    nlohmann::json extra = nlohmann::json::object();
};

namespace detail {

inline RunResult run_decompose(const ExperimentConfig& c) {
    const std::size_t n = c.unsigned_integer("n_paths");
    const double rmax = c.number("max_radius");
    RunResult res;
    res.table.columns = {"a", "b", "c", "d", "theta_u", "A", "n_x", "cartan_x1", "cartan_x2", "cartan_k",
                         "iwasawa_error", "cartan_error"};
    auto eng = RngHandle{c.seed(), 0}.engine(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = rmax * u(eng), phi = 2.0 * std::numbers::pi * u(eng), th = 2.0 * std::numbers::pi * u(eng);
        const GroupElement g = multiply(exp_alg(p_vector(r, phi)), rotation(th));
        const IwasawaCoords w = iwasawa_decompose(g);
        const CartanDecomposition cd = cartan_decompose(g);
        const double ie = iwasawa_reconstruct(w).frobenius_distance(g);
        const double ce = product(exp_alg(cd.X), cd.k).frobenius_distance(g);
        res.table.rows.push_back({g.a, g.b, g.c, g.d, w.theta_u, w.A, w.n_x, cd.X.x1, cd.X.x2, rotation_angle(cd.k), ie, ce});
        (ie < 1e-10 && ce < 1e-10 ? res.gates_passed : res.gates_failed)++;
    }
    return res;
}

inline RunResult run_spherical(const ExperimentConfig& c) {
    const auto q = c.quadrature();
    RunResult res;
    res.table.columns = {"lambda", "r", "omega_re", "omega_im"};
    for (double l : c.list("lambdas")) {
        for (double r : c.list("radii")) {
            const cplx w = spherical_function_radial(l, r, q);
            res.table.rows.push_back({l, r, w.real(), w.imag()});
        }
    }
    return res;
}

inline RadialFunction radial_from(const ExperimentConfig& c) {
    const double width = c.number("radial.width"), cutoff = c.number("radial.cutoff");
    if (!(width > 0.0) || !(cutoff > 0.0)) throw ConfigError("keys 'radial.width' and 'radial.cutoff' must be > 0");
    return gaussian_bump(width, cutoff);
}

inline RunResult run_transform(const ExperimentConfig& c, unsigned threads) {
    const RadialFunction f = radial_from(c);
    RunResult res;
    const auto lambdas = c.list("lambdas");
    SpectralGrid g;
    g.lambdas = lambdas;
    g.values = parallel_map<cplx>(lambdas.size(), threads, [&](std::size_t i) {
        return spherical_transform_radial(f, lambdas[i], c.quadrature());
    });
    res.table = spectral_table(g);
    return res;
}

inline RunResult run_calibrate(const ExperimentConfig& c, unsigned threads) {
    TransformOptions opt;
    opt.q = c.quadrature();
    opt.lambda_step = c.number("spectral.step");
    opt.threads = threads;
    if (!(opt.lambda_step > 0.0)) throw ConfigError("key 'spectral.step' must be > 0");
    const auto cal = calibrate_plancherel(radial_from(c), opt);
    RunResult res;
    res.table = spectral_table(cal.grid);
    res.extra["plancherel_C"] = cal.calibration.C;
    res.extra["plancherel_C_times_2pi"] = cal.calibration.C * 2.0 * std::numbers::pi;
    return res;
}

inline RunResult run_simulate(const ExperimentConfig& c) {
    const LevyModel m = c.model();
    const double t = c.number("t"), dt = c.number("dt");
    if (!(t > 0.0)) throw ConfigError("key 't' must be > 0");
    if (!(dt > 0.0) || dt > t) throw ConfigError("key 'dt' must satisfy 0 < dt <= t");
    RunResult res;
    res.table = path_table(simulate_interlaced(m, t, dt, RngHandle{c.seed(), 0}));
    return res;
}

inline RunResult run_verify_lk(const ExperimentConfig& c, unsigned threads) {
    const LevyModel m = c.model();
    ExponentSpec spec = ExponentSpec::from_model(m);
    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    const double t = c.number("t"), dt = c.number("dt");
    if (t < 0.0) throw ConfigError("key 't' must be >= 0");
    if (!(dt > 0.0)) throw ConfigError("key 'dt' must be > 0");
    const auto lambdas = c.list("lambdas");
    const auto rep = verify_lk_mc(spec, lambdas, t, c.unsigned_integer("n_paths"), dt, c.seed(), c.quadrature(), threads);
    RunResult res;
    res.table = report_table(rep);
    res.gates_passed = rep.passed() ? 1 : 0;
    res.gates_failed = rep.passed() ? 0 : 1;
    res.extra["rows_beyond_3"] = rep.failed_rows();
    res.extra["transform_convention"] = rep.metadata.transform_convention;
    return res;
}

inline PlaneBump bump_from(const ExperimentConfig& c) {
    const auto ctr = c.list("test.center");
    if (ctr.size() != 2 || !(ctr[1] > 0.0)) throw ConfigError("key 'test.center': expected x,y with y > 0");
    const double r = c.number("test.radius");
    if (!(r > 0.0)) throw ConfigError("key 'test.radius' must be > 0");
    return {{ctr[0], ctr[1]}, r};
}

inline RunResult run_verify_generator(const ExperimentConfig& c, unsigned threads) {
    const LevyModel m = c.model();
    HuntOptions opt;
    opt.n_paths = c.unsigned_integer("n_paths");
    opt.seed = c.seed();
    opt.steps = static_cast<int>(c.unsigned_integer("steps"));
    opt.threads = threads;
    if (opt.steps < 1) throw ConfigError("key 'steps' must be >= 1");
    GeneratorReport<double> rep;
    try {
        rep = hunt_generator_check(m, bump_from(c), c.list("t_list"), opt);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    RunResult res;
    res.table.columns = {"t", "estimate", "std_err", "predicted", "abs_error", "raw", "raw_std_err"};
    for (const auto& r : rep.rows) res.table.rows.push_back({r.t, r.estimate, r.std_err, r.predicted, r.abs_error, r.raw, r.raw_se});
    for (double ratio : rep.error_ratios) (ratio >= 1.5 && ratio <= 2.5 ? res.gates_passed : res.gates_failed)++;
    res.extra["error_ratios"] = rep.error_ratios;
    res.extra["extrapolated"] = rep.extrapolated;
    res.extra["extrapolated_std_err"] = rep.extrapolated_se;
    return res;
}

inline RunResult run_verify_semigroup(const ExperimentConfig& c, unsigned threads) {
    const LevyModel m = c.model();
    const double s = c.number("s"), t = c.number("t");
    if (s < 0.0 || t < 0.0) throw ConfigError("keys 's' and 't' must be >= 0");
    const auto r = t_semigroup_check(m, bump_from(c), s, t, c.unsigned_integer("n_paths"), c.seed(), c.quadrature(),
                                     c.number("dt"), threads);
    RunResult res;
    res.table.columns = {"s", "t", "lhs", "rhs", "std_err", "z_score", "abs_diff"};
    res.table.rows.push_back({s, t, r.lhs, r.rhs, r.std_err, r.z_score, r.abs_diff});
    (std::abs(r.z_score) <= 3.0 ? res.gates_passed : res.gates_failed)++;
    return res;
}

inline RunResult run_bi_invariance(const ExperimentConfig& c, unsigned threads) {
    const LevyModel m = c.model();
    const std::size_t n = c.unsigned_integer("n_paths");
    if (n < 1000) throw ConfigError("key 'n_paths' must be >= 1000 for bi-invariance");
    const double t = c.number("t");
    if (!(t > 0.0)) throw ConfigError("key 't' must be > 0");
    const auto samples = sample_endpoints(m, t, std::min(c.number("dt"), t), n, c.seed(), threads);
    const auto r = bi_invariance_test(samples, RngHandle{c.seed(), n});
    RunResult res;
    res.table.columns = {"statistic", "p_value", "invariant", "used"};
    res.table.rows.push_back({r.statistic, r.p_value, r.invariant ? 1.0 : 0.0, static_cast<double>(r.used)});
    res.extra["invariant"] = r.invariant;
    return res;
}

} // namespace detail

/// Runs the configured command. Throws ConfigError for usage problems.
inline RunResult run_experiment(const ExperimentConfig& c, unsigned threads = 1) {
    const std::string cmd = c.command();
    if (cmd == "decompose") return detail::run_decompose(c);
    if (cmd == "spherical") return detail::run_spherical(c);
    if (cmd == "transform") return detail::run_transform(c, threads);
    if (cmd == "calibrate-plancherel") return detail::run_calibrate(c, threads);
    if (cmd == "simulate") return detail::run_simulate(c);
    if (cmd == "verify-lk") return detail::run_verify_lk(c, threads);
    if (cmd == "verify-generator") return detail::run_verify_generator(c, threads);
    if (cmd == "verify-semigroup") return detail::run_verify_semigroup(c, threads);
    if (cmd == "bi-invariance") return detail::run_bi_invariance(c, threads);
    throw ConfigError(cmd.empty() ? "no command given" : "unknown command '" + cmd + "'");
}

struct Invocation {
    std::map<std::string, std::string> overrides; ///< already merged: file, then flags
    std::optional<std::string> out;
    unsigned threads = 1;
    bool quiet = false;
};

/// Full run: resolve, execute, write CSV and a JSON summary next to it.
/// Returns the process exit code (0 ok, 1 usage/config, 2 gate failed).
inline int run(const Invocation& inv, std::ostream& out, std::ostream& err) {
    const auto start = std::chrono::steady_clock::now();
    try {
        auto overrides = inv.overrides;
        if (inv.out) overrides["output"] = *inv.out;
        const ExperimentConfig cfg = ExperimentConfig::resolve(overrides);
        const RunResult res = run_experiment(cfg, inv.threads);
        const std::string path = cfg.get("output");
        emit_csv(res.table, cfg, path);
        nlohmann::json summary{
            {"command", cfg.command()},
            {"seed", cfg.seed()},
            {"config_hash", cfg.hash_hex()},
            {"gates", {{"passed", res.gates_passed}, {"failed", res.gates_failed}}},
            {"wall_time_s", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()},
        };
        for (const auto& [k, v] : res.extra.items()) summary["details"][k] = v;
        write_file(path + ".json", summary.dump(2) + "\n");
        if (!inv.quiet) out << summary.dump(2) << "\n";
        return res.gates_failed > 0 ? 2 : 0;
    } catch (const ConfigError& e) {
        err << "gelfand: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        err << "gelfand: " << e.what() << "\n";
        return 1;
    }
}

} // namespace gelfand::cli
