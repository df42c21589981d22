// pdlab: command-line driver for the kicked-spin engines.

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "pdlab/pdlab.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using pdlab::config::Config;
using pdlab::config::ConfigError;
using pdlab::io::CsvTable;

namespace {

constexpr int exit_config = 2;
constexpr int exit_numerical = 3;

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    std::string out;
    char buf[3];
    for (unsigned i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", md[i]);
        out += buf;
    }
    return out;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// Reads keys off a Config while recording the resolved value of each, so the
// manifest lists defaults as well as given values. Every key a command reads
// is an allowed key; anything else in the config is rejected by finish().
class Params {
public:
    explicit Params(const Config& c) : cfg_(c) {
        allowed_ = {"command", "output", "output_dir", "workers"};
    }

    double num(const std::string& k, double fallback) { return note(k, cfg_.number(k, fallback)); }
    long integer(const std::string& k, long fallback) { return note(k, cfg_.integer(k, fallback)); }
    bool flag(const std::string& k, bool fallback) { return note(k, cfg_.boolean(k, fallback)); }
    std::string text(const std::string& k, const std::string& fallback) { return note(k, cfg_.str(k, fallback)); }
    std::string text(const std::string& k) { return note(k, cfg_.str(k)); }
    std::vector<double> list(const std::string& k, std::vector<double> fallback) {
        return note(k, cfg_.list(k, std::move(fallback)));
    }
    std::vector<double> list(const std::string& k) { return note(k, cfg_.list(k)); }

    int twice_l(const std::string& k, int fallback) {
        const int t = cfg_.has(k) ? cfg_.twice_l(k) : fallback;
        note(k, 0.5 * t);
        return t;
    }
    std::vector<int> twice_l_list(const std::string& k) {
        const auto v = cfg_.twice_l_list(k);
        std::vector<double> ls;
        for (int t : v) ls.push_back(0.5 * t);
        note(k, ls);
        return v;
    }

    /// Model parameters shared by every engine.
    pdlab::ModelParams model(int default_N = 1) {
        pdlab::ModelParams p;
        p.J = num("J", 1.0);
        p.h = num("h", 0.1);
        p.K = num("K", 0.3);
        p.tau = num("tau", 0.6);
        p.phi = num("phi", std::numbers::pi);
        p.twice_l = twice_l("l", 2);
        p.N = static_cast<int>(integer("N", default_N));
        try {
            p.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(cfg_.source(), 0, "", e.what());
        }
        return p;
    }

    /// Positive integer with a range check reported against the key.
    long positive(const std::string& k, long fallback) {
        const long v = integer(k, fallback);
        if (v < 1) throw cfg_.error(k, "must be >= 1");
        return v;
    }

    unsigned workers() {
        const long w = cfg_.integer("workers", pdlab::default_workers());
        if (w < 1) throw cfg_.error("workers", "must be >= 1");
        return static_cast<unsigned>(w);
    }

    void finish() const { cfg_.reject_unknown(allowed_); }
    [[nodiscard]] const json& resolved() const noexcept { return resolved_; }
    [[nodiscard]] const Config& config() const noexcept { return cfg_; }
    ConfigError error(const std::string& k, const std::string& what) const { return cfg_.error(k, what); }

private:
    template <class T>
    T note(const std::string& k, T v) {
        allowed_.insert(k);
        resolved_[k] = v;
        return v;
    }

    const Config& cfg_;
    std::set<std::string> allowed_;
    json resolved_ = json::object();
};

// Output location and manifest writer for one command invocation.
class Run {
public:
    Run(std::string command, const Params& params, const Config& cfg)
        : command_(std::move(command)), params_(params), start_(std::chrono::steady_clock::now()) {
        const char* env = std::getenv("PDLAB_OUTPUT_DIR");
        dir_ = env && *env ? env : cfg.str("output_dir", ".");
        stem_ = cfg.str("output", command_);
    }

    void set_engine(std::string e) { engine_ = std::move(e); }
    void set_seed(std::uint64_t s) { seed_ = s; }

    /// Writes `<stem><suffix>.csv` and its manifest.
    void emit(const CsvTable& table, const std::string& suffix = "", json result = json::object()) {
        fs::create_directories(dir_);
        const fs::path csv = fs::path(dir_) / (stem_ + suffix + ".csv");
        const std::string body = table.str();
        {
            std::ofstream f(csv, std::ios::binary);
            if (!f) throw std::runtime_error("cannot write " + csv.string());
            f << body;
        }
        json m;
        m["command"] = command_;
        m["engine"] = engine_;
        m["params"] = params_.resolved();
        m["seed"] = seed_ ? json(*seed_) : json(nullptr);
        m["version"] = pdlab::version;
        m["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        m["outputs"] = json::array({json{{"file", csv.filename().string()}, {"rows", table.rows()}, {"sha256", sha256_hex(body)}}});
        if (!result.empty()) m["result"] = std::move(result);
        std::ofstream f(csv.string() + ".manifest.json");
        f << m.dump(2) << '\n';
        std::cout << csv.string() << '\n';
    }

private:
    std::string command_;
    const Params& params_;
    std::chrono::steady_clock::time_point start_;
    std::string dir_;
    std::string stem_;
    std::string engine_ = "none";
    std::optional<std::uint64_t> seed_;
};

using Command = std::function<void(Params&, Run&)>;

CsvTable trajectory_table(const pdlab::TrajectoryRecord& rec, double l) {
    CsvTable t(rec.has_errors() ? std::vector<std::string>{"n", "t", "O_over_l", "sigma"}
                                : std::vector<std::string>{"n", "t", "O_over_l"});
    for (std::size_t i = 0; i < rec.size(); ++i) {
        const double n = static_cast<double>(rec.times[i]);
        if (rec.has_errors())
            t.row({n, n * rec.meta.params.tau, rec.values[i], rec.errors[i]});
        else
            t.row({n, n * rec.meta.params.tau, rec.values[i] / l});
    }
    return t;
}

void ed_evolve(Params& P, Run& run) {
    const auto p = P.model(20);
    const long n_max = P.positive("n_max", 1000);
    const bool stop = P.flag("stop_at_zero", false);
    P.finish();
    run.set_engine("ed");
    const pdlab::fock::FockBasis basis(p.N, p.twice_l);
    const auto u = pdlab::floquet::build_floquet(basis, p);
    const auto rec = pdlab::floquet::evolve_stroboscopic(u, pdlab::floquet::QuantumState::fully_up(basis), n_max, stop);
    const auto z = pdlab::floquet::first_zero(rec);
    run.emit(trajectory_table(rec, p.l()), "",
             json{{"dimension", basis.dimension()}, {"t_star", z ? json(*z) : json(nullptr)}});
}

void ed_tstar_scan(Params& P, Run& run) {
    auto p = P.model(1);
    const auto ls = P.twice_l_list("ls");
    const auto Ns = P.list("Ns");
    const long n_max = P.positive("n_max", 100000);
    P.finish();
    run.set_engine("ed");
    CsvTable t({"l", "N", "dimension", "t_star"});
    for (int tl : ls)
        for (double Nd : Ns) {
            p.twice_l = tl;
            p.N = static_cast<int>(Nd);
            const pdlab::fock::FockBasis basis(p.N, p.twice_l);
            const auto u = pdlab::floquet::build_floquet(basis, p);
            const auto rec = pdlab::floquet::evolve_stroboscopic(u, pdlab::floquet::QuantumState::fully_up(basis), n_max, true);
            const auto z = pdlab::floquet::first_zero(rec);
            t.row_text({pdlab::io::format_double(p.l()), std::to_string(p.N), std::to_string(basis.dimension()),
                        z ? std::to_string(*z) : std::string()});
        }
    run.emit(t);
}

void ed_rstat(Params& P, Run& run) {
    auto p = P.model(1);
    const auto ls = P.twice_l_list("ls");
    const auto Ns = P.list("Ns");
    const auto Ks = P.list("Ks");
    P.finish();
    if (Ns.size() != ls.size()) throw P.error("Ns", "needs one N per entry of ls");
    run.set_engine("ed");
    CsvTable t({"l", "N", "K", "dimension_even", "r_even"});
    for (std::size_t i = 0; i < ls.size(); ++i) {
        p.twice_l = ls[i];
        p.N = static_cast<int>(Ns[i]);
        const pdlab::fock::FockBasis basis(p.N, p.twice_l);
        for (double K : Ks) {
            p.K = K;
            const auto u = pdlab::floquet::build_floquet(basis, p);
            const double r = pdlab::floquet::level_spacing_ratio_even(u);
            t.row({p.l(), static_cast<double>(p.N), K, static_cast<double>(u.block(1)->block.dimension()), r});
        }
    }
    run.emit(t);
}

void oracle_compare(Params& P, Run& run) {
    const auto p = P.model(2);
    const long n_max = P.positive("n_max", 200);
    const std::string model = P.text("model", "spin");
    P.finish();
    if (model != "spin" && model != "pauli") throw P.error("model", "must be spin or pauli");
    run.set_engine("ed+oracle");
    const pdlab::fock::FockBasis basis(p.N, p.twice_l);
    const auto ed = pdlab::floquet::evolve_stroboscopic(pdlab::floquet::build_floquet(basis, p),
                                                        pdlab::floquet::QuantumState::fully_up(basis), n_max);
    const auto orc = model == "spin" ? pdlab::oracle::full_floquet_evolve(p, n_max) : pdlab::oracle::pauli_floquet_evolve(p, n_max);
    CsvTable t({"n", "O_ed", "O_oracle", "abs_diff"});
    double worst = 0.0;
    for (std::size_t i = 0; i < ed.size(); ++i) {
        const double d = std::abs(ed.values[i] - orc.values[i]);
        worst = std::max(worst, d);
        t.row({static_cast<double>(ed.times[i]), ed.values[i], orc.values[i], d});
    }
    run.emit(t, "", json{{"max_abs_diff", worst}});
}

void gpe_evolve(Params& P, Run& run) {
    const auto p = P.model(1);
    const long n_max = P.positive("n_max", 1000);
    const double eps = P.num("eps", 0.0);
    const int steps = static_cast<int>(P.positive("steps", pdlab::gpe::default_steps_per_period));
    P.finish();
    run.set_engine("gpe");
    const auto tr = pdlab::gpe::gpe_trajectory(p, pdlab::gpe::GpeState::perturbed(p.twice_l, eps), n_max, steps);
    CsvTable t({"n", "t", "sz", "O_over_l"});
    for (std::size_t i = 0; i < tr.sz.size(); ++i) {
        const double n = static_cast<double>(i);
        t.row({n, n * p.tau, tr.sz[i], tr.record.values[i] / p.l()});
    }
    run.emit(t, "", json{{"max_norm_drift", tr.max_norm_drift}});
}

void gpe_rabi_scan(Params& P, Run& run) {
    auto p = P.model(1);
    const auto ls = P.twice_l_list("ls");
    const auto Ks = P.list("Ks");
    const long samples = P.positive("samples", 1L << 14);
    const long max_samples = P.positive("max_samples", 1L << 22);
    const double eps = P.num("eps", 0.0);
    const int steps = static_cast<int>(P.positive("steps", pdlab::gpe::default_steps_per_period));
    const unsigned workers = P.workers();
    P.finish();
    if (samples < static_cast<long>(pdlab::gpe::min_rabi_samples)) throw P.error("samples", "must be >= 4096");
    run.set_engine("gpe");
    struct Item {
        int tl;
        double K;
        pdlab::gpe::RabiDiagnostics d;
    };
    std::vector<Item> items;
    for (int tl : ls)
        for (double K : Ks) items.push_back({tl, K, {}});
    pdlab::parallel_for(items.size(), workers, [&](std::size_t i) {
        auto q = p;
        q.twice_l = items[i].tl;
        q.K = items[i].K;
        items[i].d = pdlab::gpe::rabi_adaptive(pdlab::gpe::PeriodMap(q, steps), pdlab::gpe::GpeState::perturbed(q.twice_l, eps),
                                               static_cast<std::size_t>(samples), static_cast<std::size_t>(max_samples));
    });
    CsvTable t({"l", "K", "samples", "omega_peak", "omega_rabi", "delta_O", "delta_O_over_l"});
    for (const auto& it : items) {
        const double l = 0.5 * it.tl;
        const auto cell = [](const std::optional<double>& v) { return v ? pdlab::io::format_double(*v) : std::string(); };
        t.row_text({pdlab::io::format_double(l), pdlab::io::format_double(it.K), std::to_string(it.d.length),
                    cell(it.d.omega_peak), cell(it.d.omega_rabi), pdlab::io::format_double(it.d.amplitude),
                    pdlab::io::format_double(it.d.amplitude / l)});
    }
    run.emit(t);
}

void gpe_lyapunov_scan(Params& P, Run& run) {
    auto p = P.model(100);
    const auto Ks = P.list("Ks");
    const long periods = P.positive("periods", 20000);
    const double d0 = P.num("d0", 1e-10);
    const double eps = P.num("eps", 0.0);
    const int steps = static_cast<int>(P.positive("steps", pdlab::gpe::default_steps_per_period));
    const unsigned workers = P.workers();
    P.finish();
    run.set_engine("gpe");
    std::vector<pdlab::gpe::LyapunovResult> res(Ks.size());
    pdlab::parallel_for(Ks.size(), workers, [&](std::size_t i) {
        auto q = p;
        q.K = Ks[i];
        res[i] = pdlab::gpe::lyapunov(pdlab::gpe::PeriodMap(q, steps), pdlab::gpe::GpeState::perturbed(q.twice_l, eps), periods, d0);
    });
    CsvTable t({"K", "lambda_per_period", "lambda_per_time", "breakdown_time"});
    for (std::size_t i = 0; i < Ks.size(); ++i) {
        const double bt = res[i].per_time > 0.0 ? pdlab::gpe::breakdown_time(res[i].per_time, p.N)
                                                : std::numeric_limits<double>::infinity();
        t.row_text({pdlab::io::format_double(Ks[i]), pdlab::io::format_double(res[i].per_period),
                    pdlab::io::format_double(res[i].per_time), std::isfinite(bt) ? pdlab::io::format_double(bt) : ""});
    }
    run.emit(t);
}

struct DtwaSetup {
    pdlab::dtwa::DtwaOptions opt;
    bool auto_steps;
};

DtwaSetup dtwa_options(Params& P) {
    DtwaSetup s;
    s.opt.seed = static_cast<std::uint64_t>(P.integer("seed", 1));
    s.opt.n_r = static_cast<int>(P.integer("n_r", 800));
    if (s.opt.n_r < 2) throw P.error("n_r", "must be >= 2");
    const std::string steps = P.text("steps", "auto");
    s.auto_steps = steps == "auto";
    if (!s.auto_steps) {
        try {
            s.opt.steps = std::stoi(steps);
        } catch (const std::exception&) {
            throw P.error("steps", "must be 'auto' or a positive integer");
        }
        if (s.opt.steps < 1) throw P.error("steps", "must be >= 1");
    }
    s.opt.include_self = P.flag("include_self", false);
    s.opt.workers = P.workers();
    return s;
}

int resolve_steps(const DtwaSetup& s, const pdlab::ModelParams& p) {
    if (!s.auto_steps) return s.opt.steps;
    return pdlab::dtwa::select_steps(p, s.opt.seed, 16, 5, 1e-8, 4, 4096, s.opt.include_self).steps;
}

void dtwa_evolve(Params& P, Run& run) {
    const auto p = P.model(50);
    const long n_max = P.positive("n_max", 1000);
    auto s = dtwa_options(P);
    P.finish();
    run.set_engine("dtwa");
    run.set_seed(s.opt.seed);
    s.opt.steps = resolve_steps(s, p);
    const auto rec = pdlab::dtwa::dtwa_order_parameter(p, n_max, s.opt);
    run.emit(trajectory_table(rec, p.l()), "", json{{"steps_per_period", s.opt.steps}});
}

void dtwa_decay_scan(Params& P, Run& run) {
    auto p = P.model(50);
    const auto ls = P.twice_l_list("ls");
    const long n_max = P.positive("n_max", 20000);
    auto s = dtwa_options(P);
    P.finish();
    run.set_engine("dtwa");
    run.set_seed(s.opt.seed);
    CsvTable t({"l", "steps", "A", "delta", "delta_err", "r2", "fit_first", "fit_last", "t_star", "t_d", "t_d_err"});
    std::vector<std::string> tcols{"n"};
    for (int tl : ls) {
        tcols.push_back("O_over_l_" + std::to_string(tl));
        tcols.push_back("sigma_" + std::to_string(tl));
    }
    CsvTable traj(tcols);
    std::vector<pdlab::TrajectoryRecord> recs;
    std::vector<double> lv, dv, tdv;
    for (int tl : ls) {
        p.twice_l = tl;
        auto o = s.opt;
        o.steps = resolve_steps(s, p);
        recs.push_back(pdlab::dtwa::dtwa_order_parameter(p, n_max, o));
        const auto& rec = recs.back();
        const double l = p.l();
        std::vector<std::string> row{pdlab::io::format_double(l), std::to_string(o.steps)};
        try {
            const auto f = pdlab::analysis::fit_exponential_decay(rec);
            for (double v : {f.A, f.delta, f.delta_err, f.line.r2}) row.push_back(pdlab::io::format_double(v));
            row.push_back(std::to_string(f.first));
            row.push_back(std::to_string(f.last));
            if (f.delta > 0.0) {
                lv.push_back(l);
                dv.push_back(f.delta);
            }
        } catch (const std::domain_error&) {
            for (int k = 0; k < 6; ++k) row.emplace_back();
        }
        const auto td = pdlab::analysis::decay_time(rec);
        if (td) {
            row.push_back(std::to_string(td->t_star));
            row.push_back(pdlab::io::format_double(td->t_d));
            row.push_back(pdlab::io::format_double(td->t_d_err));
            tdv.push_back(td->t_d);
        } else {
            row.insert(row.end(), 3, std::string());
        }
        t.row_text(row);
    }
    for (long n = 0; n <= n_max; ++n) {
        std::vector<double> row{static_cast<double>(n)};
        for (const auto& rec : recs) {
            row.push_back(rec.values[static_cast<std::size_t>(n)]);
            row.push_back(rec.errors[static_cast<std::size_t>(n)]);
        }
        traj.row(row);
    }
    json result = json::object();
    CsvTable pl({"quantity", "prefactor", "exponent", "exponent_err", "r2"});
    auto power = [&](const char* name, const std::vector<double>& ys, double code) {
        if (ys.size() < 2 || ys.size() != lv.size()) return;
        const auto f = pdlab::analysis::fit_power_law(lv, ys);
        result[name] = {{"prefactor", f.prefactor}, {"exponent", f.exponent}, {"exponent_err", f.exponent_err}, {"r2", f.line.r2}};
        pl.row({code, f.prefactor, f.exponent, f.exponent_err, f.line.r2});
    };
    power("delta_vs_l", dv, 0.0);
    power("t_d_vs_l", tdv, 1.0);
    run.emit(t, "", result);
    run.emit(traj, "_traj");
    run.emit(pl, "_powerlaw", json{{"quantity_codes", {{"0", "delta_vs_l"}, {"1", "t_d_vs_l"}}}});
}

void classical_evolve(Params& P, Run& run) {
    const auto p = P.model(50);
    const long n_max = P.positive("n_max", 4000);
    const int steps = static_cast<int>(P.positive("steps", 1000));
    P.finish();
    run.set_engine("classical");
    const auto rec = pdlab::classical::classical_trajectory(p, n_max, steps);
    CsvTable t({"n", "t", "O_normalized"});
    for (std::size_t i = 0; i < rec.size(); ++i) {
        const double n = static_cast<double>(rec.times[i]);
        t.row({n, n * p.tau, rec.values[i]});
    }
    run.emit(t);
}

void fit(Params& P, Run& run) {
    const std::string input = P.text("input");
    const std::string kind = P.text("kind", "exp-decay");
    const std::string xcol = P.text("x", "n");
    const std::string ycol = P.text("y", "O_over_l");
    const std::string ecol = P.text("err", "");
    const double tau = P.num("tau", 0.6);
    const long cut = P.integer("numerator_cut", -1);
    P.finish();
    run.set_engine("analysis");
    const auto data = pdlab::io::read_csv(input);
    const auto xs = data.column(xcol);
    const auto ys = data.column(ycol);
    json result;
    CsvTable t({"x", "y", "residual"});
    if (kind == "power-law") {
        const auto f = pdlab::analysis::fit_power_law(xs, ys);
        result = {{"prefactor", f.prefactor}, {"exponent", f.exponent}, {"exponent_err", f.exponent_err}, {"r2", f.line.r2}};
        for (std::size_t i = 0; i < xs.size(); ++i) t.row({xs[i], ys[i], f.line.residuals[i]});
    } else if (kind == "exp-decay" || kind == "decay-time") {
        pdlab::TrajectoryRecord rec;
        rec.meta.params.tau = tau;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (ecol.empty())
                rec.push(static_cast<long>(xs[i]), ys[i]);
            else
                rec.push(static_cast<long>(xs[i]), ys[i], data.column(ecol)[i]);
        }
        if (kind == "exp-decay") {
            const auto f = pdlab::analysis::fit_exponential_decay(rec);
            result = {{"A", f.A}, {"delta", f.delta}, {"delta_err", f.delta_err}, {"r2", f.line.r2},
                      {"window", {f.first, f.last}}, {"residual_norm", f.line.residual_norm}};
            for (std::size_t i = 0; i < f.line.points; ++i) {
                const std::size_t k = static_cast<std::size_t>(f.first) + i;
                const auto idx = static_cast<std::size_t>(std::find(rec.times.begin(), rec.times.end(), static_cast<long>(k)) - rec.times.begin());
                t.row({xs[idx], ys[idx], f.line.residuals[i]});
            }
        } else {
            const auto d = pdlab::analysis::decay_time(rec, cut >= 0 ? std::optional<long>(cut) : std::nullopt);
            if (!d) throw pdlab::NumericalAbort("decay-time: no crossing within the series");
            result = {{"t_d", d->t_d}, {"t_d_err", d->t_d_err}, {"t_star", d->t_star}};
        }
    } else {
        throw P.error("kind", "must be exp-decay, power-law or decay-time");
    }
    run.emit(t, "", result);
}

void crossings(Params& P, Run& run) {
    const std::string input = P.text("input");
    const std::string group = P.text("group", "l");
    const std::string xcol = P.text("x", "K");
    const std::string ycol = P.text("y", "delta_O_over_l");
    P.finish();
    run.set_engine("analysis");
    const auto data = pdlab::io::read_csv(input);
    const auto g = data.column(group), xs = data.column(xcol), ys = data.column(ycol);
    std::map<double, pdlab::analysis::Curve> curves;
    for (std::size_t i = 0; i < g.size(); ++i) {
        curves[g[i]].x.push_back(xs[i]);
        curves[g[i]].y.push_back(ys[i]);
    }
    CsvTable t({"l_low", "l_high", "x_star"});
    for (const auto& c : pdlab::analysis::crossing_points(curves))
        t.row_text({pdlab::io::format_double(c.l_low), pdlab::io::format_double(c.l_high),
                    c.x_star ? pdlab::io::format_double(*c.x_star) : std::string()});
    run.emit(t);
}

const std::map<std::string, Command>& commands() {
    static const std::map<std::string, Command> table{
        {"ed-evolve", ed_evolve},
        {"ed-tstar-scan", ed_tstar_scan},
        {"ed-rstat", ed_rstat},
        {"oracle-compare", oracle_compare},
        {"gpe-evolve", gpe_evolve},
        {"gpe-rabi-scan", gpe_rabi_scan},
        {"gpe-lyapunov-scan", gpe_lyapunov_scan},
        {"dtwa-evolve", dtwa_evolve},
        {"dtwa-decay-scan", dtwa_decay_scan},
        {"classical-evolve", classical_evolve},
        {"fit", fit},
        {"crossings", crossings},
    };
    return table;
}

int execute(Config cfg, const std::vector<std::string>& overrides, std::string command) {
    for (const auto& o : overrides) cfg.add(o, 0);
    if (command.empty()) {
        if (!cfg.has("command")) throw ConfigError(cfg.source(), 0, "command", "missing required key");
        command = cfg.str("command");
    } else if (cfg.has("command") && cfg.str("command") != command) {
        throw cfg.error("command", "conflicts with the command given on the command line");
    }
    const auto it = commands().find(command);
    if (it == commands().end()) throw cfg.error("command", "unknown command '" + command + "'");
    Params params(cfg);
    Run run(command, params, cfg);
    it->second(params, run);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pdlab: period-doubling engines for kicked spin models"};
    app.require_subcommand(1);
    std::string config_path;
    std::vector<std::string> run_overrides;
    auto* run_cmd = app.add_subcommand("run", "Run the command named in a config file");
    run_cmd->add_option("config", config_path, "key=value config file")->required();
    run_cmd->add_option("overrides", run_overrides, "key=value overrides");

    std::map<std::string, std::vector<std::string>> direct;
    for (const auto& [name, fn] : commands()) {
        auto* sub = app.add_subcommand(name, "Run " + name + " with key=value parameters");
        sub->add_option("params", direct[name], "key=value parameters");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : exit_config;
    }

    try {
        if (run_cmd->parsed()) return execute(Config::load(config_path), run_overrides, "");
        for (auto* sub : app.get_subcommands())
            if (sub->parsed()) return execute(Config("<command line>"), direct[sub->get_name()], sub->get_name());
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const pdlab::NumericalAbort& e) {
        std::cerr << "numerical abort: " << e.what() << '\n';
        return exit_numerical;
    } catch (const std::length_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_config;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
