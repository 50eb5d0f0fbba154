#include "rfncsc/cli_io.hpp"

#include <bit>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include "rfncsc/metrics.hpp"

namespace rfncsc {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr char kMagic[8] = {'R', 'F', 'N', 'T', 'R', 'C', 'E', '1'};
constexpr std::uint32_t kCodeF32 = 1;
constexpr std::uint32_t kCodeF64 = 2;

template <typename U>
void put_le(std::string& buf, U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i)
        buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

template <typename U>
U get_le(const unsigned char* p) {
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(p[i]) << (8 * i);
    return v;
}

// Tracks consumed keys so leftovers can be reported as unknown.
class Section {
  public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail("must be an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    template <typename T>
    void get(const std::string& key, T& out) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw Error(ErrorKind::Config, path_ + "." + key + ": " + e.what());
        }
    }

    template <typename T>
    void get_opt(const std::string& key, std::optional<T>& out) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        if (j_.at(key).is_null()) {
            out.reset();
            return;
        }
        T v{};
        get(key, v);
        out = v;
    }

    const json& raw(const std::string& key) {
        seen_.insert(key);
        return j_.at(key);
    }

    void finish() const {
        for (const auto& item : j_.items())
            if (!seen_.count(item.key())) fail("unknown key '" + item.key() + "'");
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw Error(ErrorKind::Config, path_ + ": " + msg);
    }

  private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

double parse_q(const json& v, const std::string& path) {
    if (v.is_string() && (v == "inf" || v == "infinity"))
        return std::numeric_limits<double>::infinity();
    if (v.is_number()) return v.get<double>();
    throw Error(ErrorKind::Config, path + ": expected a number or \"inf\"");
}

AmplitudeMode parse_mode(const std::string& s) {
    if (s == "least-squares") return AmplitudeMode::LeastSquares;
    if (s == "projection") return AmplitudeMode::ProjectionApprox;
    if (s == "residual") return AmplitudeMode::ResidualApprox;
    if (s == "support-only") return AmplitudeMode::SupportOnly;
    throw Error(ErrorKind::Config, "solver.amplitude_mode: unknown mode '" + s + "'");
}

std::string fmt(double v, int prec = 6) {
    std::ostringstream os;
    os << std::setprecision(prec) << v;
    return os.str();
}

std::string fmt_opt(const std::optional<double>& v, int prec = 4) {
    return v ? fmt(*v, prec) : "n/a";
}

std::string omega_label(double w) {
    double k = w / std::numbers::pi;
    if (std::abs(k - std::round(k)) < 1e-9) return fmt(std::round(k)) + "pi";
    return fmt(w);
}

std::uint64_t require_seed(const CommonOptions& opt, const ExperimentConfig& cfg) {
    if (opt.seed) return *opt.seed;
    if (cfg.synth.seed) return *cfg.synth.seed;
    throw Error(ErrorKind::Config, "a seed is required (synth.seed or --seed)");
}

ExperimentConfig config_or_default(const CommonOptions& opt) {
    return opt.config ? load_config(*opt.config) : ExperimentConfig{};
}

double round_to_grid(double v) { return std::round(v * 1e6) / 1e6; }

// Runs a command body and maps exceptions onto exit codes.
template <typename F>
int guarded(std::ostream& err, F&& body) {
    try {
        return body();
    } catch (const Error& e) {
        err << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
        return e.kind() == ErrorKind::Config ? kExitUsage : kExitDomain;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitDomain;
    }
}

json scores_json(const Image& x, const ImageSolve& sol, const Image& y, const ConvDictionary& d) {
    json s;
    auto put = [&](const char* key, auto&& f) {
        try {
            s[key] = f();
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::UndefinedScore) throw;
            s[key] = nullptr;
        }
    };
    put("rho_x", [&] { return corr_images(x, sol.x); });
    put("rho_x_first", [&] { return corr_images(x, sol.first_x); });
    if (sol.x.rows() == d.atoms()) put("rho_y", [&] { return reconstruction_score(y, d, sol.x); });
    put("rho_support", [&] { return support_corr(x, sol.x); });
    s["mse"] = mse_code(x, sol.x);
    s["m_it"] = sol.mean_iters;
    return s;
}

}  // namespace

void write_trace_matrix(const fs::path& path, const Image& m, double sample_interval,
                        Dtype dtype) {
    require(m.rows() <= std::numeric_limits<std::uint32_t>::max() &&
                m.cols() <= std::numeric_limits<std::uint32_t>::max(),
            ErrorKind::InvalidParameter, "matrix too large for the file format");
    require(sample_interval >= 0.0, ErrorKind::InvalidParameter, "negative sample interval");
    std::string buf(kMagic, kMagic + 8);
    put_le<std::uint32_t>(buf, dtype == Dtype::F32 ? kCodeF32 : kCodeF64);
    put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(m.rows()));
    put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(m.cols()));
    put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(std::llround(sample_interval * 1e6)));
    const double* data = m.data();
    for (Index i = 0; i < m.size(); ++i) {
        if (dtype == Dtype::F32) put_le(buf, std::bit_cast<std::uint32_t>(static_cast<float>(data[i])));
        else put_le(buf, std::bit_cast<std::uint64_t>(data[i]));
    }
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(os), ErrorKind::Io, "cannot open " + path.string() + " for writing");
    os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    require(static_cast<bool>(os), ErrorKind::Io, "write failed: " + path.string());
}

TraceMatrix read_trace_matrix(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    require(static_cast<bool>(is), ErrorKind::Io, "cannot open " + path.string());
    std::string buf((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    require(buf.size() >= 24 && std::memcmp(buf.data(), kMagic, 8) == 0, ErrorKind::Io,
            path.string() + ": not a trace-matrix file");
    const auto* p = reinterpret_cast<const unsigned char*>(buf.data());
    const std::uint32_t code = get_le<std::uint32_t>(p + 8);
    const std::uint32_t rows = get_le<std::uint32_t>(p + 12);
    const std::uint32_t cols = get_le<std::uint32_t>(p + 16);
    const std::uint32_t us = get_le<std::uint32_t>(p + 20);
    require(code == kCodeF32 || code == kCodeF64, ErrorKind::Io, path.string() + ": bad dtype");
    const std::size_t width = code == kCodeF32 ? 4 : 8;
    const std::size_t count = static_cast<std::size_t>(rows) * cols;
    require(buf.size() == 24 + count * width, ErrorKind::Io,
            path.string() + ": payload length does not match the header");

    TraceMatrix t;
    t.dtype = code == kCodeF32 ? Dtype::F32 : Dtype::F64;
    t.sample_interval = static_cast<double>(us) * 1e-6;
    t.data.resize(rows, cols);
    double* out = t.data.data();
    for (std::size_t i = 0; i < count; ++i) {
        const unsigned char* q = p + 24 + i * width;
        out[i] = code == kCodeF32 ? std::bit_cast<float>(get_le<std::uint32_t>(q))
                                  : std::bit_cast<double>(get_le<std::uint64_t>(q));
    }
    return t;
}

ExperimentConfig parse_config(const json& j) {
    ExperimentConfig cfg;
    Section root(j, "config");
    if (root.has("dictionary")) {
        Section s(root.raw("dictionary"), "dictionary");
        auto& d = cfg.dictionary;
        s.get("kind", d.kind);
        s.get("omega0", d.omega0);
        if (s.has("f0_hz")) {
            double f0 = 0.0;
            s.get("f0_hz", f0);
            d.omega0 = 2.0 * std::numbers::pi * f0;
        }
        s.get("sample_interval", d.sample_interval);
        s.get("half_width", d.half_width);
        if (s.has("q")) {
            const json& q = s.raw("q");
            if (q.is_null()) d.q.reset();
            else d.q = parse_q(q, "dictionary.q");
        }
        s.get("lx", d.lx);
        s.finish();
        if (d.kind != "ricker" && d.kind != "impulse" && d.kind != "barker13")
            s.fail("unknown kind '" + d.kind + "'");
        if (!(d.omega0 > 0.0)) s.fail("omega0 must be positive");
        if (!(d.sample_interval > 0.0)) s.fail("sample_interval must be positive");
        if (d.q && !(*d.q > 0.0)) s.fail("q must be positive");
        if (d.lx < 1) s.fail("lx must be >= 1");
    }
    if (root.has("rfn")) {
        Section s(root.raw("rfn"), "rfn");
        auto& r = cfg.rfn;
        s.get("kernel", r.kernel);
        s.get("lh", r.lh);
        s.get("sigma_h", r.sigma_h);
        s.get("taus", r.taus);
        s.finish();
        if (r.kernel != "gaussian" && r.kernel != "rectangular")
            s.fail("unknown kernel '" + r.kernel + "'");
        if (r.lh < 1 || r.lh % 2 == 0) s.fail("lh must be odd and >= 1");
        if (r.taus.empty()) s.fail("taus must be non-empty");
    }
    if (root.has("solver")) {
        Section s(root.raw("solver"), "solver");
        auto& v = cfg.solver;
        s.get("name", v.name);
        s.get("betas", v.betas);
        s.get("beta_decay", v.beta_decay);
        s.get("step", v.step);
        s.get_opt("first_step", v.first_step);
        s.get("max_iters", v.max_iters);
        s.get("stop_tol", v.stop_tol);
        s.get("amplitude_mode", v.amplitude_mode);
        s.get("peak_only", v.peak_only);
        s.get("ista_beta", v.ista_beta);
        s.get("ista_max_iters", v.ista_max_iters);
        s.finish();
        try {
            parse_solver(v.name);
        } catch (const Error&) {
            s.fail("unknown solver '" + v.name + "'");
        }
        parse_mode(v.amplitude_mode);
        if (v.ista_max_iters < 1) s.fail("ista_max_iters must be >= 1");
        if (!(v.ista_beta > 0.0)) s.fail("ista_beta must be positive");
    }
    if (root.has("synth")) {
        Section s(root.raw("synth"), "synth");
        auto& v = cfg.synth;
        s.get("p", v.p);
        s.get("sigma_r", v.sigma_r);
        s.get("mu_r", v.mu_r);
        s.get("delta_k", v.delta_k);
        s.get("j", v.j);
        s.get_opt("seed", v.seed);
        s.get_opt("snr_db", v.snr_db);
        s.get_opt("noise_seed", v.noise_seed);
        s.finish();
        if (v.j < 1) s.fail("j must be >= 1");
        if (v.snr_db && !v.noise_seed) s.fail("noise_seed is required when snr_db is set");
    }
    if (root.has("output")) {
        Section s(root.raw("output"), "output");
        std::string dtype = "f32";
        s.get("dtype", dtype);
        s.finish();
        if (dtype == "f32") cfg.output.dtype = Dtype::F32;
        else if (dtype == "f64") cfg.output.dtype = Dtype::F64;
        else s.fail("dtype must be f32 or f64");
    }
    root.finish();
    // Surface solver parameter errors at load time.
    try {
        make_solver_config(cfg).validate();
    } catch (const Error& e) {
        throw Error(ErrorKind::Config, std::string("solver: ") + e.what());
    }
    return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
    std::ifstream is(path);
    require(static_cast<bool>(is), ErrorKind::Config, "cannot open config " + path.string());
    json j;
    try {
        j = json::parse(is);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::Config, path.string() + ": " + e.what());
    }
    return parse_config(j);
}

json to_json(const ExperimentConfig& c) {
    json j;
    j["dictionary"] = {{"kind", c.dictionary.kind},
                       {"omega0", c.dictionary.omega0},
                       {"sample_interval", c.dictionary.sample_interval},
                       {"half_width", c.dictionary.half_width},
                       {"lx", c.dictionary.lx}};
    if (c.dictionary.q)
        j["dictionary"]["q"] = std::isinf(*c.dictionary.q) ? json("inf") : json(*c.dictionary.q);
    else
        j["dictionary"]["q"] = nullptr;
    j["rfn"] = {{"kernel", c.rfn.kernel},
                {"lh", c.rfn.lh},
                {"sigma_h", c.rfn.sigma_h},
                {"taus", c.rfn.taus}};
    j["solver"] = {{"name", c.solver.name},
                   {"betas", c.solver.betas},
                   {"beta_decay", c.solver.beta_decay},
                   {"step", c.solver.step},
                   {"first_step", c.solver.first_step ? json(*c.solver.first_step) : json(nullptr)},
                   {"max_iters", c.solver.max_iters},
                   {"stop_tol", c.solver.stop_tol},
                   {"amplitude_mode", c.solver.amplitude_mode},
                   {"peak_only", c.solver.peak_only},
                   {"ista_beta", c.solver.ista_beta},
                   {"ista_max_iters", c.solver.ista_max_iters}};
    auto opt = [](const auto& v) { return v ? json(*v) : json(nullptr); };
    j["synth"] = {{"p", c.synth.p},
                  {"sigma_r", c.synth.sigma_r},
                  {"mu_r", c.synth.mu_r},
                  {"delta_k", c.synth.delta_k},
                  {"j", c.synth.j},
                  {"seed", opt(c.synth.seed)},
                  {"snr_db", opt(c.synth.snr_db)},
                  {"noise_seed", opt(c.synth.noise_seed)}};
    j["output"] = {{"dtype", c.output.dtype == Dtype::F32 ? "f32" : "f64"}};
    return j;
}

ConvDictionary make_dictionary(const DictionarySpec& spec) {
    Wavelet w;
    if (spec.kind == "ricker") {
        w = make_ricker(spec.omega0, spec.sample_interval, spec.half_width);
    } else if (spec.kind == "impulse") {
        w = make_impulse(spec.sample_interval);
    } else if (spec.kind == "barker13") {
        Vec b(13);
        b << 1, 1, 1, 1, 1, -1, -1, 1, 1, -1, 1, -1, 1;
        w = make_filter(b, spec.sample_interval);
    } else {
        throw Error(ErrorKind::Config, "unknown dictionary kind '" + spec.kind + "'");
    }
    if (spec.q) {
        QModelParams q{*spec.q, spec.omega0, spec.sample_interval};
        return build_q_dictionary(w, q, spec.lx);
    }
    return build_dictionary({w}, spec.lx);
}

RfnKernel make_kernel(const RfnSpec& spec) {
    if (spec.kernel == "rectangular") return make_kernel(KernelShape::Rectangular, spec.lh);
    return make_kernel(KernelShape::Gaussian, spec.lh, spec.sigma_h);
}

SolverConfig make_solver_config(const ExperimentConfig& cfg) {
    SolverConfig s;
    s.betas = cfg.solver.betas;
    s.beta_decay = cfg.solver.beta_decay;
    s.taus = cfg.rfn.taus;
    s.step = cfg.solver.step;
    s.first_step = cfg.solver.first_step;
    s.max_iters = cfg.solver.max_iters;
    s.stop_tol = cfg.solver.stop_tol;
    s.mode = parse_mode(cfg.solver.amplitude_mode);
    s.kernel = make_kernel(cfg.rfn);
    s.peak_only = cfg.solver.peak_only;
    return s;
}

ReflectivityModel make_model(const ExperimentConfig& cfg) {
    ReflectivityModel m;
    m.p = cfg.synth.p;
    m.sigma_r = cfg.synth.sigma_r;
    m.mu_r = cfg.synth.mu_r;
    m.delta_k = cfg.synth.delta_k;
    m.lx = cfg.dictionary.lx;
    m.j = cfg.synth.j;
    m.seed = cfg.synth.seed.value_or(0);
    return m;
}

json to_json(const GuaranteeReport& r) {
    auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    json j;
    j["theorem"] = to_string(r.theorem);
    j["condition_holds"] = r.condition_holds;
    j["lhs"] = num(r.lhs);
    j["rhs"] = num(r.rhs);
    j["beta1_interval"] = r.beta1_interval
                              ? json::array({num(r.beta1_interval->first), num(r.beta1_interval->second)})
                              : json(nullptr);
    j["reason"] = r.reason;
    j["inputs"] = {{"mu", num(r.mu)},       {"s", r.s},
                   {"eps_d", num(r.eps_d)}, {"eps_s", num(r.eps_s)},
                   {"eps_inf", num(r.eps_inf)}, {"tau", num(r.tau)},
                   {"h_nu", num(r.h_nu)},   {"h_min", num(r.h_min)},
                   {"delta_k", r.delta_k}};
    j["diagnostics"] = {{"a1_violation", num(r.a1_violation)},
                        {"pairwise_bound", num(r.pairwise_bound)}};
    return j;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string csv_row(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += csv_field(fields[i]);
    }
    return out + "\r\n";
}

std::string table1_csv(const std::vector<Table1Result>& rows) {
    std::string out = csv_row({"omega0", "nu", "beta1", "beta2", "L_h", "sigma_h", "rho1", "rho", "M_it"});
    for (const auto& r : rows)
        out += csv_row({omega_label(r.row.omega0), fmt(r.row.nu), fmt(r.row.beta1),
                        fmt(r.row.beta2), std::to_string(r.row.lh), fmt(r.row.sigma_h),
                        fmt_opt(r.rho_first), fmt_opt(r.rho), fmt(r.m_it, 4)});
    return out;
}

std::string sweep_csv(const SweepResult& sweep) {
    std::string out = csv_row({"f0", "MSE", "rho"});
    for (const auto& p : sweep.points) out += csv_row({fmt(p.f0), fmt(p.mse), fmt_opt(p.rho)});
    out += csv_row({"slope", fmt(sweep.slope, 4), ""});
    return out;
}

int resolve_threads(std::optional<int> flag) {
    if (flag) return std::max(1, *flag);
    if (const char* env = std::getenv("RFNCSC_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1) return static_cast<int>(v);
    }
    return 1;
}

int cmd_synth(const CommonOptions& opt, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        ExperimentConfig cfg = config_or_default(opt);
        cfg.synth.seed = require_seed(opt, cfg);
        if (!opt.out) throw Error(ErrorKind::Config, "--out <dir> is required");
        ConvDictionary d = make_dictionary(cfg.dictionary);
        ReflectivityModel model = make_model(cfg);
        Image x = gen_reflectivity(model);
        std::optional<NoiseSpec> noise;
        if (cfg.synth.snr_db) noise = NoiseSpec{*cfg.synth.snr_db, *cfg.synth.noise_seed};
        Image y = gen_traces(x, d, noise);

        fs::create_directories(*opt.out);
        const double ts = cfg.dictionary.sample_interval;
        write_trace_matrix(*opt.out / "X.rfn", x, ts, cfg.output.dtype);
        write_trace_matrix(*opt.out / "Y.rfn", y, ts, cfg.output.dtype);
        json manifest = {{"config", to_json(cfg)},
                         {"files", {{"x", "X.rfn"}, {"y", "Y.rfn"}}},
                         {"rows_x", x.rows()},
                         {"rows_y", y.rows()},
                         {"cols", x.cols()},
                         {"realized_p", static_cast<double>((x.array() != 0.0).count()) /
                                            static_cast<double>(x.size())}};
        std::ofstream(*opt.out / "manifest.json") << manifest.dump(2) << "\n";
        out << "wrote " << (*opt.out / "X.rfn").string() << " and " << (*opt.out / "Y.rfn").string() << "\n";
        return kExitOk;
    });
}

int cmd_solve(const CommonOptions& opt, const fs::path& y_file,
              const std::optional<fs::path>& truth_file, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        ExperimentConfig cfg = config_or_default(opt);
        if (opt.solver) {
            try {
                parse_solver(*opt.solver);
            } catch (const Error& e) {
                throw Error(ErrorKind::Config, e.what());
            }
            cfg.solver.name = *opt.solver;
        }
        const SolverKind kind = parse_solver(cfg.solver.name);
        TraceMatrix ym = read_trace_matrix(y_file);

        DictionarySpec ds = cfg.dictionary;
        if (!ds.q) {
            // The code length follows from the trace length for time-invariant kinds.
            Index ld = make_dictionary(DictionarySpec{ds.kind, ds.omega0, ds.sample_interval,
                                                      ds.half_width, std::nullopt, 1})
                           .ld;
            require(ym.data.rows() >= ld, ErrorKind::InvalidParameter,
                    "traces shorter than the wavelet");
            ds.lx = ym.data.rows() - ld + 1;
        }
        ConvDictionary d = make_dictionary(ds);
        require(ym.data.rows() == d.ly, ErrorKind::InvalidParameter,
                "trace length does not match the dictionary");

        SolverConfig sc = make_solver_config(cfg);
        if (kind == SolverKind::SupportDetect) sc.mode = AmplitudeMode::SupportOnly;
        IstaParams ip{cfg.solver.ista_beta, cfg.solver.ista_max_iters, cfg.solver.stop_tol};
        ImageSolve sol = solve_image(ym.data, d, sc, kind, ip, resolve_threads(opt.threads));

        json summary;
        summary["solver"] = to_string(kind);
        summary["mean_iterations"] = sol.mean_iters;
        json iters = json::array(), resid = json::array(), conv = json::array();
        for (const auto& r : sol.runs) {
            iters.push_back(r.iterations_used);
            resid.push_back(r.residual_norms.empty() ? 0.0 : r.residual_norms.back());
            conv.push_back(r.converged);
        }
        summary["iterations"] = iters;
        summary["residual_norms"] = resid;
        summary["converged"] = conv;
        summary["status"] = sol.status;
        if (truth_file) {
            TraceMatrix xm = read_trace_matrix(*truth_file);
            require(xm.data.rows() == sol.x.rows() && xm.data.cols() == sol.x.cols(),
                    ErrorKind::InvalidParameter, "ground truth shape mismatch");
            summary["scores"] = scores_json(xm.data, sol, ym.data, d);
        }
        if (opt.out) {
            write_trace_matrix(*opt.out, sol.x, ym.sample_interval, cfg.output.dtype);
            fs::path sp = *opt.out;
            sp += ".summary.json";
            std::ofstream(sp) << summary.dump(2) << "\n";
        }
        out << summary.dump(2) << "\n";
        for (const auto& s : sol.status)
            if (s != "ok") return kExitDomain;
        return kExitOk;
    });
}

int cmd_bench(const CommonOptions& opt, const std::string& suite, std::ostream& out,
              std::ostream& err) {
    if (suite != "table1" && suite != "freqsweep") {
        err << "error: bench suite must be table1 or freqsweep\n";
        return kExitUsage;
    }
    return guarded(err, [&] {
        ExperimentConfig cfg = config_or_default(opt);
        const std::uint64_t seed = require_seed(opt, cfg);
        const int threads = resolve_threads(opt.threads);
        std::string csv;
        if (suite == "table1") {
            Table1Protocol proto;
            proto.threads = threads;
            csv = table1_csv(run_table1(table1_rows(), seed, proto));
        } else {
            SweepProtocol proto;
            proto.threads = threads;
            csv = sweep_csv(run_freq_sweep({25, 30, 35, 40, 45, 50}, seed, proto));
        }
        if (opt.out) {
            std::ofstream os(*opt.out, std::ios::binary);
            require(static_cast<bool>(os), ErrorKind::Io, "cannot write " + opt.out->string());
            os << csv;
        }
        out << csv;
        return kExitOk;
    });
}

int cmd_check(const CommonOptions& opt, const fs::path& x_file, int theorem, double eps_d,
              double tau, double nu, std::ostream& out, std::ostream& err) {
    if (theorem < 1 || theorem > 3) {
        err << "error: theorem must be 1, 2 or 3\n";
        return kExitUsage;
    }
    return guarded(err, [&] {
        ExperimentConfig cfg = config_or_default(opt);
        TraceMatrix xm = read_trace_matrix(x_file);
        require(xm.data.cols() >= 1, ErrorKind::InvalidParameter, "empty code file");
        DictionarySpec ds = cfg.dictionary;
        ds.q.reset();
        ds.lx = xm.data.rows();
        ConvDictionary d = make_dictionary(ds);

        // Every nonempty column must satisfy the condition.
        const bool all_empty = xm.data.isZero(0.0);
        GuaranteeReport worst;
        bool first = true;
        for (Index j = 0; j < xm.data.cols(); ++j) {
            Vec x = xm.data.col(j);
            if (!all_empty && x.isZero(0.0)) continue;
            GuaranteeReport r;
            if (theorem == 1) r = check_theorem1(x, d, make_kernel(KernelShape::Rectangular, d.ld), eps_d, tau);
            else if (theorem == 2) r = check_theorem2(x, d);
            else r = check_theorem3(x, d, make_kernel(KernelShape::Gaussian, d.ld, cfg.rfn.sigma_h), nu);
            if (first || (worst.condition_holds && !r.condition_holds)) worst = r;
            first = false;
        }
        out << to_json(worst).dump(2) << "\n";
        return worst.condition_holds ? kExitOk : kExitDomain;
    });
}

int cmd_qdict(const CommonOptions& opt, std::optional<double> q, std::ostream& out,
              std::ostream& err) {
    return guarded(err, [&] {
        ExperimentConfig cfg = config_or_default(opt);
        if (q) {
            if (!(*q > 0.0)) throw Error(ErrorKind::Config, "Q must be positive");
            cfg.dictionary.q = q;
        }
        if (!opt.out) throw Error(ErrorKind::Config, "--out <file> is required");
        ConvDictionary d = make_dictionary(cfg.dictionary);
        Eigen::MatrixXd m = dense_matrix(d).unaryExpr(&round_to_grid);
        write_trace_matrix(*opt.out, m, cfg.dictionary.sample_interval, cfg.output.dtype);
        out << "wrote " << m.rows() << "x" << m.cols() << " dictionary to " << opt.out->string() << "\n";
        return kExitOk;
    });
}

int cmd_info(const fs::path& file, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        TraceMatrix t = read_trace_matrix(file);
        json j = {{"rows", t.data.rows()},
                  {"cols", t.data.cols()},
                  {"dtype", t.dtype == Dtype::F32 ? "f32" : "f64"},
                  {"sample_interval", t.sample_interval},
                  {"nonzeros", (t.data.array() != 0.0).count()},
                  {"max_abs", t.data.size() ? t.data.cwiseAbs().maxCoeff() : 0.0},
                  {"norm", t.data.norm()}};
        out << j.dump(2) << "\n";
        return kExitOk;
    });
}

}  // namespace rfncsc
