#include "swiptnet/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "swiptnet/special_functions.hpp"

namespace swiptnet::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

[[noreturn]] void fail(const std::string& msg) { throw config_error(msg); }

[[noreturn]] void fail_at(int line, const std::string& msg) {
    std::ostringstream os;
    os << "line " << line << ": " << msg;
    throw config_error(os.str());
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

// ---------------------------------------------------------------------------
// Raw INI scanning: "section.key" -> value plus bookkeeping for typo checks.
// ---------------------------------------------------------------------------

struct RawEntry {
    std::string value;
    int line = 0;
    bool used = false;
};

constexpr const char* kSections[] = {"network", "swipt", "power", "rates",
                                     "sweep",   "sim",   "series", "pso"};

bool known_section(const std::string& name) {
    for (const char* s : kSections)
        if (name == s) return true;
    return false;
}

struct RawConfig {
    std::map<std::string, RawEntry> entries;
    bool has_section[8] = {};

    bool section_present(const std::string& name) const {
        for (std::size_t i = 0; i < 8; ++i)
            if (name == kSections[i]) return has_section[i];
        return false;
    }
};

RawConfig scan(const std::string& text) {
    RawConfig raw;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']') fail_at(lineno, "unterminated section header");
            section = trim(t.substr(1, t.size() - 2));
            if (!known_section(section))
                fail_at(lineno, "unknown section '" + section + "'");
            for (std::size_t i = 0; i < 8; ++i)
                if (section == kSections[i]) raw.has_section[i] = true;
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) fail_at(lineno, "expected key = value");
        if (section.empty()) fail_at(lineno, "key outside any section");
        const std::string key = trim(t.substr(0, eq));
        if (key.empty()) fail_at(lineno, "empty key");
        const std::string full = section + "." + key;
        if (raw.entries.count(full)) fail_at(lineno, "duplicate key '" + full + "'");
        raw.entries[full] = RawEntry{trim(t.substr(eq + 1)), lineno, false};
    }
    return raw;
}

// Typed readers; every accepted key is marked used so leftovers can be
// reported as typos afterwards.
class Reader {
public:
    explicit Reader(RawConfig& raw) : raw_(raw) {}

    std::optional<std::string> text(const std::string& key) {
        const auto it = raw_.entries.find(key);
        if (it == raw_.entries.end()) return std::nullopt;
        it->second.used = true;
        line_ = it->second.line;
        return it->second.value;
    }

    void number(const std::string& key, double& out) {
        if (const auto v = text(key)) out = to_double(*v);
    }
    void number_opt(const std::string& key, std::optional<double>& out) {
        if (const auto v = text(key)) out = to_double(*v);
    }
    void integer(const std::string& key, int& out) {
        if (const auto v = text(key)) out = static_cast<int>(to_int(*v));
    }
    void integer_u64(const std::string& key, std::uint64_t& out) {
        if (const auto v = text(key)) {
            const long long n = to_int(*v);
            if (n < 0) fail_at(line_, "value must be >= 0");
            out = static_cast<std::uint64_t>(n);
        }
    }
    void boolean(const std::string& key, bool& out) {
        const auto v = text(key);
        if (!v) return;
        if (*v == "true" || *v == "1")
            out = true;
        else if (*v == "false" || *v == "0")
            out = false;
        else
            fail_at(line_, "expected true/false");
    }
    void pair(const std::string& key, double& x, double& y) {
        const auto v = text(key);
        if (!v) return;
        std::istringstream is(*v);
        double a, b;
        if (!(is >> a >> b)) fail_at(line_, "expected two numbers");
        std::string rest;
        if (is >> rest) fail_at(line_, "expected exactly two numbers");
        x = a;
        y = b;
    }

    int line() const { return line_; }

private:
    double to_double(const std::string& s) {
        const char* c = s.c_str();
        char* end = nullptr;
        const double v = std::strtod(c, &end);
        if (end == c || *end != '\0' || !std::isfinite(v))
            fail_at(line_, "expected a finite number, got '" + s + "'");
        return v;
    }
    long long to_int(const std::string& s) {
        const char* c = s.c_str();
        char* end = nullptr;
        const long long v = std::strtoll(c, &end, 10);
        if (end == c || *end != '\0') fail_at(line_, "expected an integer, got '" + s + "'");
        return v;
    }

    RawConfig& raw_;
    int line_ = 0;
};

constexpr const char* kLinkNames[] = {"a1", "a2", "b1", "b2", "12", "ab"};

const char* sweep_variables[] = {"snr_db", "alpha", "beta", "mu", "rate", "p_th_dbm"};

bool known_sweep_variable(const std::string& v) {
    for (const char* s : sweep_variables)
        if (v == s) return true;
    return false;
}

// ---------------------------------------------------------------------------
// Output helpers.
// ---------------------------------------------------------------------------

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("cannot write output file '" + path + "'");
    return out;
}

void write_rows(const std::string& path, const std::string& header,
                const std::vector<std::string>& rows) {
    std::ofstream out = open_output(path);
    out << header << "\n";
    for (const std::string& r : rows) out << r << "\n";
    if (!out) fail("failed while writing '" + path + "'");
}

std::string join_row(const std::vector<std::string>& fields) {
    std::string row;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) row += ',';
        row += csv_escape(fields[i]);
    }
    return row;
}

// Runs fn(0..n-1), spreading indices over up to `workers` threads; the first
// exception wins and is rethrown on the caller's thread.
void for_each_index(int n, int workers, const std::function<void(int)>& fn) {
    if (workers <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    const int threads = std::min(workers, n);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
                try {
                    fn(i);
                } catch (...) {
                    const std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (std::thread& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

struct NodeEval {
    std::array<double, 4> op{kNaN, kNaN, kNaN, kNaN};
    int terms = 0;
    std::string status = "ok";
};

NodeEval evaluate_nodes(const ExperimentConfig& cfg, const model::PowerParams& power) {
    NodeEval ev;
    const std::array<model::Node, 4> nodes = {model::Node::pu_a, model::Node::pu_b,
                                              model::Node::su_1, model::Node::su_2};
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        try {
            const analytic::NodeOutage out =
                k < 2 ? analytic::outage_primary(nodes[k], cfg.net, cfg.swipt, power,
                                                 cfg.rates, cfg.series)
                      : analytic::outage_secondary(nodes[k], cfg.net, cfg.swipt, power,
                                                   cfg.rates, cfg.series);
            ev.op[k] = out.probability;
            for (int l = 0; l < out.links; ++l) {
                ev.terms = std::max(ev.terms, out.link[l].lin.terms);
                ev.terms = std::max(ev.terms, out.link[l].sat.terms);
            }
        } catch (const math::convergence_error&) {
            if (ev.status == "ok") ev.status = "series-unconverged";
        }
    }
    return ev;
}

}  // namespace

// ---------------------------------------------------------------------------
// Unit conversions.
// ---------------------------------------------------------------------------

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double watts_to_dbm(double watts) {
    if (!(watts > 0.0)) fail("power must be > 0 W to express in dBm");
    return 10.0 * std::log10(watts) + 30.0;
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double linear_to_db(double linear) {
    if (!(linear > 0.0)) fail("ratio must be > 0 to express in dB");
    return 10.0 * std::log10(linear);
}

// ---------------------------------------------------------------------------
// Configuration.
// ---------------------------------------------------------------------------

model::PowerParams ExperimentConfig::power() const {
    model::PowerParams p;
    for (std::size_t i = 0; i < 4; ++i)
        p.sigma2[i] = dbm_to_watts(node_noise_dbm[i].value_or(noise_dbm));
    for (std::size_t i = 0; i < 2; ++i)
        p.sigma2_conv[i] = dbm_to_watts(conv_noise_dbm[i].value_or(noise_dbm));
    const double ptx = dbm_to_watts(noise_dbm) * db_to_linear(snr_db);
    p.p_a = p_a_watts.value_or(ptx);
    p.p_b = p_b_watts.value_or(ptx);
    return p;
}

ExperimentConfig parse_config_text(const std::string& text) {
    RawConfig raw = scan(text);
    Reader read(raw);
    ExperimentConfig cfg;

    read.pair("network.pu_a", cfg.net.position[0].x, cfg.net.position[0].y);
    read.pair("network.pu_b", cfg.net.position[1].x, cfg.net.position[1].y);
    read.pair("network.su_1", cfg.net.position[2].x, cfg.net.position[2].y);
    read.pair("network.su_2", cfg.net.position[3].x, cfg.net.position[3].y);
    read.number("network.path_loss_exponent", cfg.net.path_loss_exponent);
    for (std::size_t l = 0; l < 6; ++l) {
        read.number(std::string("network.m_") + kLinkNames[l], cfg.net.fading[l].m);
        read.number_opt(std::string("network.omega_") + kLinkNames[l],
                        cfg.net.fading[l].omega);
    }

    read.number("swipt.alpha", cfg.swipt.alpha);
    read.number("swipt.beta", cfg.swipt.beta);
    read.number("swipt.mu_1", cfg.swipt.mu[0]);
    read.number("swipt.mu_2", cfg.swipt.mu[1]);
    read.number("swipt.eta_1", cfg.swipt.eta[0]);
    read.number("swipt.eta_2", cfg.swipt.eta[1]);
    {
        std::optional<double> p_th_dbm;
        read.number_opt("swipt.p_th_dbm", p_th_dbm);
        if (p_th_dbm) cfg.swipt.p_th = dbm_to_watts(*p_th_dbm);
    }

    read.number("power.snr_db", cfg.snr_db);
    read.number_opt("power.p_a_watts", cfg.p_a_watts);
    read.number_opt("power.p_b_watts", cfg.p_b_watts);
    read.number("power.noise_dbm", cfg.noise_dbm);
    const char* node_keys[] = {"power.noise_pu_a_dbm", "power.noise_pu_b_dbm",
                               "power.noise_su_1_dbm", "power.noise_su_2_dbm"};
    for (std::size_t i = 0; i < 4; ++i) read.number_opt(node_keys[i], cfg.node_noise_dbm[i]);
    read.number_opt("power.conv_noise_1_dbm", cfg.conv_noise_dbm[0]);
    read.number_opt("power.conv_noise_2_dbm", cfg.conv_noise_dbm[1]);

    read.number("rates.pu_a", cfg.rates.pu_a);
    read.number("rates.pu_b", cfg.rates.pu_b);
    read.number("rates.su_1", cfg.rates.su_1);
    read.number("rates.su_2", cfg.rates.su_2);

    cfg.has_sweep = raw.section_present("sweep");
    if (const auto v = read.text("sweep.variable")) {
        if (!known_sweep_variable(*v))
            fail_at(read.line(), "unknown sweep variable '" + *v + "'");
        cfg.sweep.variable = *v;
    }
    read.number("sweep.start", cfg.sweep.start);
    read.number("sweep.stop", cfg.sweep.stop);
    read.number("sweep.step", cfg.sweep.step);
    if (const auto v = read.text("sweep.metric")) {
        if (*v != "throughput" && *v != "energy_efficiency")
            fail_at(read.line(), "metric must be throughput or energy_efficiency");
        cfg.sweep.metric = *v;
    }

    read.integer_u64("sim.trials", cfg.sim.trials);
    read.integer_u64("sim.seed", cfg.sim.seed);
    read.integer("sim.workers", cfg.sim.workers);
    read.boolean("sim.exact_af_gain", cfg.sim.exact_af_gain);
    read.boolean("sim.include_bc_noise", cfg.sim.include_bc_noise);

    read.integer("series.s_max", cfg.series.s_max);
    read.integer("series.u_max", cfg.series.u_max);
    read.number("series.rel_stop", cfg.series.rel_stop);

    read.integer("pso.population", cfg.pso.swarm.population);
    read.integer("pso.iterations", cfg.pso.swarm.iterations);
    read.number("pso.inertia", cfg.pso.swarm.inertia);
    read.number("pso.cognitive", cfg.pso.swarm.cognitive);
    read.number("pso.social", cfg.pso.swarm.social);
    read.integer_u64("pso.seed", cfg.pso.swarm.seed);
    if (const auto v = read.text("pso.objective")) {
        if (*v != "throughput" && *v != "energy_efficiency")
            fail_at(read.line(), "objective must be throughput or energy_efficiency");
        cfg.pso.objective = *v;
    }
    read.number("pso.alpha_lo", cfg.pso.swarm.bounds[0].lo);
    read.number("pso.alpha_hi", cfg.pso.swarm.bounds[0].hi);
    read.number("pso.beta_lo", cfg.pso.swarm.bounds[1].lo);
    read.number("pso.beta_hi", cfg.pso.swarm.bounds[1].hi);
    read.number("pso.mu_lo", cfg.pso.swarm.bounds[2].lo);
    read.number("pso.mu_hi", cfg.pso.swarm.bounds[2].hi);
    read.boolean("pso.mu_floor", cfg.pso.mu_floor);

    for (const auto& [key, entry] : raw.entries)
        if (!entry.used) fail_at(entry.line, "unknown key '" + key + "'");

    if (cfg.sim.trials < 1) fail("sim.trials must be >= 1");
    if (cfg.sim.workers < 1) fail("sim.workers must be >= 1");
    if (cfg.series.s_max < 1 || cfg.series.u_max < 1 || !(cfg.series.rel_stop > 0.0))
        fail("series controls must be positive");

    // Surface bad model parameters and inconsistent sweeps at load time, not
    // halfway through a run.
    try {
        model::validate(cfg.net);
        model::validate(cfg.swipt);
        model::validate(cfg.rates);
        model::validate(cfg.power());
        if (cfg.has_sweep) {
            if (!(cfg.sweep.step > 0.0)) fail("sweep.step must be > 0");
            if (cfg.sweep.stop < cfg.sweep.start) fail("sweep.stop must be >= sweep.start");
            if (cfg.sweep.variable == "snr_db" && (cfg.p_a_watts || cfg.p_b_watts))
                fail("sweeping snr_db conflicts with absolute power overrides");
            for (const double v : {cfg.sweep.start, cfg.sweep.stop}) {
                ExperimentConfig probe = cfg;
                apply_sweep_value(probe, v);
                model::validate(probe.swipt);
                model::validate(probe.rates);
                model::validate(probe.power());
            }
        }
    } catch (const config_error&) {
        throw;
    } catch (const std::exception& e) {
        fail(e.what());
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot read config file '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config_text(text.str());
}

std::vector<double> sweep_points(const SweepSpec& sweep) {
    if (!(sweep.step > 0.0)) fail("sweep.step must be > 0");
    if (sweep.stop < sweep.start) fail("sweep.stop must be >= sweep.start");
    const double span = (sweep.stop - sweep.start) / sweep.step;
    const int count = static_cast<int>(std::floor(span + 1e-9)) + 1;
    if (count > 100000) fail("sweep has more than 100000 points");
    std::vector<double> points(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) points[static_cast<std::size_t>(i)] = sweep.start + i * sweep.step;
    return points;
}

void apply_sweep_value(ExperimentConfig& cfg, double value) {
    const std::string& var = cfg.sweep.variable;
    if (var == "snr_db") {
        if (cfg.p_a_watts || cfg.p_b_watts)
            fail("sweeping snr_db conflicts with absolute power overrides");
        cfg.snr_db = value;
    } else if (var == "alpha") {
        cfg.swipt.alpha = value;
    } else if (var == "beta") {
        cfg.swipt.beta = value;
    } else if (var == "mu") {
        cfg.swipt.mu = {value, value};
    } else if (var == "rate") {
        cfg.rates.pu_a = cfg.rates.pu_b = cfg.rates.su_1 = cfg.rates.su_2 = value;
    } else if (var == "p_th_dbm") {
        cfg.swipt.p_th = dbm_to_watts(value);
    } else {
        fail("unknown sweep variable '" + var + "'");
    }
}

std::string format_field(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string quoted = "\"";
    for (const char c : field) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    quoted += '"';
    return quoted;
}

void write_metadata(const ExperimentConfig& cfg, const std::string& subcommand,
                    const std::string& out_path) {
    std::ofstream out = open_output(out_path + ".meta");
    const auto fmt = [](double v) { return format_field(v); };

    out << "[run]\nsubcommand = " << subcommand << "\n\n";

    out << "[network]\n";
    const char* node_names[] = {"pu_a", "pu_b", "su_1", "su_2"};
    for (std::size_t i = 0; i < 4; ++i)
        out << node_names[i] << " = " << fmt(cfg.net.position[i].x) << " "
            << fmt(cfg.net.position[i].y) << "\n";
    out << "path_loss_exponent = " << fmt(cfg.net.path_loss_exponent) << "\n";
    for (std::size_t l = 0; l < 6; ++l) {
        out << "m_" << kLinkNames[l] << " = " << fmt(cfg.net.fading[l].m) << "\n";
        if (cfg.net.fading[l].omega)
            out << "omega_" << kLinkNames[l] << " = " << fmt(*cfg.net.fading[l].omega)
                << "\n";
    }

    out << "\n[swipt]\n";
    out << "alpha = " << fmt(cfg.swipt.alpha) << "\n";
    out << "beta = " << fmt(cfg.swipt.beta) << "\n";
    out << "mu_1 = " << fmt(cfg.swipt.mu[0]) << "\n";
    out << "mu_2 = " << fmt(cfg.swipt.mu[1]) << "\n";
    out << "eta_1 = " << fmt(cfg.swipt.eta[0]) << "\n";
    out << "eta_2 = " << fmt(cfg.swipt.eta[1]) << "\n";
    out << "p_th_dbm = " << fmt(watts_to_dbm(cfg.swipt.p_th)) << "\n";

    out << "\n[power]\n";
    out << "snr_db = " << fmt(cfg.snr_db) << "\n";
    if (cfg.p_a_watts) out << "p_a_watts = " << fmt(*cfg.p_a_watts) << "\n";
    if (cfg.p_b_watts) out << "p_b_watts = " << fmt(*cfg.p_b_watts) << "\n";
    out << "noise_dbm = " << fmt(cfg.noise_dbm) << "\n";
    const char* noise_keys[] = {"noise_pu_a_dbm", "noise_pu_b_dbm", "noise_su_1_dbm",
                                "noise_su_2_dbm"};
    for (std::size_t i = 0; i < 4; ++i)
        if (cfg.node_noise_dbm[i])
            out << noise_keys[i] << " = " << fmt(*cfg.node_noise_dbm[i]) << "\n";
    for (std::size_t i = 0; i < 2; ++i)
        if (cfg.conv_noise_dbm[i])
            out << "conv_noise_" << (i + 1) << "_dbm = " << fmt(*cfg.conv_noise_dbm[i])
                << "\n";

    out << "\n[rates]\n";
    out << "pu_a = " << fmt(cfg.rates.pu_a) << "\n";
    out << "pu_b = " << fmt(cfg.rates.pu_b) << "\n";
    out << "su_1 = " << fmt(cfg.rates.su_1) << "\n";
    out << "su_2 = " << fmt(cfg.rates.su_2) << "\n";

    if (cfg.has_sweep) {
        out << "\n[sweep]\n";
        out << "variable = " << cfg.sweep.variable << "\n";
        out << "start = " << fmt(cfg.sweep.start) << "\n";
        out << "stop = " << fmt(cfg.sweep.stop) << "\n";
        out << "step = " << fmt(cfg.sweep.step) << "\n";
        out << "metric = " << cfg.sweep.metric << "\n";
    }

    out << "\n[sim]\n";
    out << "trials = " << cfg.sim.trials << "\n";
    out << "seed = " << cfg.sim.seed << "\n";
    out << "workers = " << cfg.sim.workers << "\n";
    out << "exact_af_gain = " << (cfg.sim.exact_af_gain ? "true" : "false") << "\n";
    out << "include_bc_noise = " << (cfg.sim.include_bc_noise ? "true" : "false") << "\n";

    out << "\n[series]\n";
    out << "s_max = " << cfg.series.s_max << "\n";
    out << "u_max = " << cfg.series.u_max << "\n";
    out << "rel_stop = " << fmt(cfg.series.rel_stop) << "\n";

    out << "\n[pso]\n";
    out << "population = " << cfg.pso.swarm.population << "\n";
    out << "iterations = " << cfg.pso.swarm.iterations << "\n";
    out << "inertia = " << fmt(cfg.pso.swarm.inertia) << "\n";
    out << "cognitive = " << fmt(cfg.pso.swarm.cognitive) << "\n";
    out << "social = " << fmt(cfg.pso.swarm.social) << "\n";
    out << "seed = " << cfg.pso.swarm.seed << "\n";
    out << "objective = " << cfg.pso.objective << "\n";
    out << "alpha_lo = " << fmt(cfg.pso.swarm.bounds[0].lo) << "\n";
    out << "alpha_hi = " << fmt(cfg.pso.swarm.bounds[0].hi) << "\n";
    out << "beta_lo = " << fmt(cfg.pso.swarm.bounds[1].lo) << "\n";
    out << "beta_hi = " << fmt(cfg.pso.swarm.bounds[1].hi) << "\n";
    out << "mu_lo = " << fmt(cfg.pso.swarm.bounds[2].lo) << "\n";
    out << "mu_hi = " << fmt(cfg.pso.swarm.bounds[2].hi) << "\n";
    out << "mu_floor = " << (cfg.pso.mu_floor ? "true" : "false") << "\n";

    if (!out) fail("failed while writing '" + out_path + ".meta'");
}

// ---------------------------------------------------------------------------
// Runners.
// ---------------------------------------------------------------------------

void run_outage_sweep(const ExperimentConfig& cfg, const std::string& out_path) {
    if (!cfg.has_sweep) fail("outage-sweep requires a [sweep] section");
    const std::vector<double> points = sweep_points(cfg.sweep);
    const bool parallel = cfg.sim.workers > 1 && points.size() > 1;
    std::vector<std::string> rows(points.size());

    const auto compute = [&](int i) {
        ExperimentConfig local = cfg;
        apply_sweep_value(local, points[static_cast<std::size_t>(i)]);
        const model::PowerParams power = local.power();
        const NodeEval ev = evaluate_nodes(local, power);

        mc::SimSpec spec = local.sim;
        spec.workers = parallel ? 1 : cfg.sim.workers;
        const mc::SimResult sim = mc::simulate(local.net, local.swipt, power, local.rates, spec);

        rows[static_cast<std::size_t>(i)] = join_row(
            {format_field(points[static_cast<std::size_t>(i)]), format_field(ev.op[0]),
             format_field(ev.op[1]), format_field(ev.op[2]), format_field(ev.op[3]),
             format_field(sim.op_pu_a), format_field(sim.op_pu_b),
             format_field(sim.op_su_1), format_field(sim.op_su_2),
             format_field(sim.se_pu_a), format_field(sim.se_pu_b),
             format_field(sim.se_su_1), format_field(sim.se_su_2),
             std::to_string(ev.terms), ev.status});
    };
    for_each_index(static_cast<int>(points.size()), cfg.sim.workers, compute);

    write_rows(out_path,
               "sweep_value,op_pu_a_analytic,op_pu_b_analytic,op_su_1_analytic,"
               "op_su_2_analytic,op_pu_a_mc,op_pu_b_mc,op_su_1_mc,op_su_2_mc,"
               "stderr_pu_a,stderr_pu_b,stderr_su_1,stderr_su_2,series_terms_used,status",
               rows);
    write_metadata(cfg, "outage-sweep", out_path);
}

void run_metric_sweep(const ExperimentConfig& cfg, const std::string& out_path) {
    if (!cfg.has_sweep) fail("metric-sweep requires a [sweep] section");
    const bool want_ee = cfg.sweep.metric == "energy_efficiency";
    const std::vector<double> points = sweep_points(cfg.sweep);
    const bool parallel = cfg.sim.workers > 1 && points.size() > 1;
    std::vector<std::string> rows(points.size());

    const auto compute = [&](int i) {
        ExperimentConfig local = cfg;
        apply_sweep_value(local, points[static_cast<std::size_t>(i)]);
        const model::PowerParams power = local.power();

        double analytic_value = kNaN;
        std::string status = "ok";
        try {
            analytic_value =
                want_ee ? analytic::energy_efficiency(local.net, local.swipt, power,
                                                      local.rates, local.series)
                        : analytic::throughput(local.net, local.swipt, power, local.rates,
                                               local.series);
        } catch (const math::convergence_error&) {
            status = "series-unconverged";
        } catch (const std::domain_error&) {
            status = "undefined";
        }

        mc::SimSpec spec = local.sim;
        spec.workers = parallel ? 1 : cfg.sim.workers;
        const mc::SimResult sim = mc::simulate(local.net, local.swipt, power, local.rates, spec);
        const double mc_value = want_ee ? sim.energy_efficiency : sim.throughput;

        rows[static_cast<std::size_t>(i)] =
            join_row({format_field(points[static_cast<std::size_t>(i)]),
                      format_field(analytic_value), format_field(mc_value), status});
    };
    for_each_index(static_cast<int>(points.size()), cfg.sim.workers, compute);

    write_rows(out_path, "sweep_value,metric_analytic,metric_mc,status", rows);
    write_metadata(cfg, "metric-sweep", out_path);
}

void run_mu_critical(const ExperimentConfig& cfg, const std::string& out_path) {
    std::vector<double> points;
    std::vector<std::string> labels;
    if (cfg.has_sweep) {
        if (cfg.sweep.variable == "mu")
            fail("mu-critical cannot sweep mu; it solves for mu");
        points = sweep_points(cfg.sweep);
        for (const double v : points) labels.push_back(format_field(v));
    } else {
        points.push_back(kNaN);
        labels.push_back("");
    }
    std::vector<std::string> rows(points.size());

    const auto compute = [&](int i) {
        ExperimentConfig local = cfg;
        if (cfg.has_sweep) apply_sweep_value(local, points[static_cast<std::size_t>(i)]);
        const model::PowerParams power = local.power();
        double mu_star = kNaN, outage = kNaN, target = kNaN, gap = kNaN;
        std::string status = "ok";
        try {
            const analytic::CriticalMuResult got = analytic::critical_mu(
                local.net, local.swipt, power, local.rates, local.series);
            mu_star = got.mu;
            outage = got.outage;
            target = got.target;
            gap = got.outage - got.target;
        } catch (const analytic::no_feasible_mu&) {
            status = "no-feasible-mu";
        } catch (const math::convergence_error&) {
            status = "series-unconverged";
        }
        rows[static_cast<std::size_t>(i)] =
            join_row({labels[static_cast<std::size_t>(i)], format_field(mu_star),
                      format_field(outage), format_field(target), format_field(gap),
                      status});
    };
    for_each_index(static_cast<int>(points.size()), cfg.sim.workers, compute);

    write_rows(out_path, "sweep_value,mu_star,outage_at_mu_star,target_outage,gap,status",
               rows);
    write_metadata(cfg, "mu-critical", out_path);
}

void run_optimize(const ExperimentConfig& cfg, const std::string& out_path) {
    const model::PowerParams power = cfg.power();
    pso::PsoConfig swarm = cfg.pso.swarm;
    if (cfg.pso.mu_floor)
        swarm = pso::with_mu_floor(swarm, cfg.net, cfg.swipt, power, cfg.rates, cfg.series);
    const pso::Metric metric = cfg.pso.objective == "energy_efficiency"
                                   ? pso::Metric::energy_efficiency
                                   : pso::Metric::throughput;
    const pso::OptimizationResult got = pso::pso_maximize(
        pso::network_objective(metric, cfg.net, cfg.swipt, power, cfg.rates, cfg.series),
        swarm);

    std::vector<std::string> rows;
    rows.reserve(got.trace.size());
    for (std::size_t i = 0; i < got.trace.size(); ++i) {
        rows.push_back(join_row({std::to_string(i + 1), format_field(got.trace[i]),
                                 format_field(got.position_trace[i][0]),
                                 format_field(got.position_trace[i][1]),
                                 format_field(got.position_trace[i][2])}));
    }
    write_rows(out_path, "iteration,best_value,best_alpha,best_beta,best_mu", rows);
    write_metadata(cfg, "optimize", out_path);
}

}  // namespace swiptnet::cli
