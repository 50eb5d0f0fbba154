#include "rfncsc/synthgen.hpp"

#include <cmath>
#include <numbers>

#include "rfncsc/metrics.hpp"

namespace rfncsc {

namespace {

std::optional<double> safe_corr(const Image& a, const Image& b) {
    try {
        return corr_images(a, b);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::UndefinedScore) throw;
        return std::nullopt;
    }
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

void ReflectivityModel::validate() const {
    require(p > 0.0 && p < 1.0, ErrorKind::InvalidParameter, "p must be in (0,1)");
    require(sigma_r >= 0.0, ErrorKind::InvalidParameter, "sigma_r must be >= 0");
    require(delta_k >= 1, ErrorKind::InvalidParameter, "delta_k must be >= 1");
    require(lx >= 1, ErrorKind::InvalidParameter, "L_x must be >= 1");
    require(j >= 1, ErrorKind::InvalidParameter, "channel count must be >= 1");
    require(!enforce_fill_bound || p * static_cast<double>(delta_k) <= 1.0, ErrorKind::InfeasibleModel,
            "p * delta_k exceeds one");
}

std::mt19937_64 channel_rng(std::uint64_t seed, std::uint64_t channel) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(channel),
                      static_cast<std::uint32_t>(channel >> 32)};
    return std::mt19937_64(seq);
}

Image gen_reflectivity(const ReflectivityModel& model) {
    model.validate();
    Image x = Image::Zero(model.lx, model.j);
    for (Index c = 0; c < model.j; ++c) {
        auto rng = channel_rng(model.seed, static_cast<std::uint64_t>(c));
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::normal_distribution<double> amp(model.mu_r, model.sigma_r);
        Index last = -model.delta_k;
        for (Index k = 0; k < model.lx; ++k) {
            if (u(rng) >= model.p) continue;
            double a = amp(rng);
            if (k - last < model.delta_k) continue;
            x(k, c) = a;
            last = k;
        }
    }
    return x;
}

Image gen_traces(const Image& x, const ConvDictionary& d, const std::optional<NoiseSpec>& noise) {
    require(x.rows() == d.atoms(), ErrorKind::InvalidParameter, "code length mismatch");
    Image y(d.ly, x.cols());
    for (Index j = 0; j < x.cols(); ++j) y.col(j) = apply_dictionary(d, x.col(j));
    if (!noise) return y;

    Image w(d.ly, x.cols());
    for (Index j = 0; j < x.cols(); ++j) {
        auto rng = channel_rng(noise->seed, static_cast<std::uint64_t>(j));
        std::normal_distribution<double> n01(0.0, 1.0);
        for (Index k = 0; k < d.ly; ++k) w(k, j) = n01(rng);
    }
    const double es = y.squaredNorm(), ew = w.squaredNorm();
    if (es == 0.0 || ew == 0.0) return y;
    w *= std::sqrt(es / (ew * std::pow(10.0, noise->snr_db / 10.0)));
    return y + w;
}

double realized_snr_db(const Image& clean, const Image& noisy) {
    return 10.0 * std::log10(clean.squaredNorm() / (noisy - clean).squaredNorm());
}

std::vector<Table1Row> table1_rows() {
    const double pi = std::numbers::pi;
    return {
        {80 * pi, 5, 0.95, 0.88, 11, 2, 0.10},
        {80 * pi, 3, 0.95, 0.87, 11, 2, 0.10},
        {80 * pi, 1, 0.80, 0.66, 9, 2, 0.15},
        {50 * pi, 5, 0.98, 0.98, 17, 3, 0.10},
        {50 * pi, 3, 0.98, 0.87, 17, 4, 0.20},
    };
}

Index separation_samples(double nu, double omega0, double sample_interval) {
    require(nu > 0.0 && omega0 > 0.0 && sample_interval > 0.0, ErrorKind::InvalidParameter,
            "nu, omega0 and sample_interval must be positive");
    return std::max<Index>(1, static_cast<Index>(std::ceil(nu / (omega0 * sample_interval) - 1e-9)));
}

SolverConfig table1_config(const Table1Row& row, const Table1Protocol& proto) {
    SolverConfig cfg;
    cfg.betas = {row.beta1, row.beta2};
    cfg.beta_decay = 0.5;
    cfg.taus = proto.taus;
    cfg.step = proto.step;
    cfg.first_step = proto.first_step;
    cfg.max_iters = proto.max_iters;
    cfg.stop_tol = proto.stop_tol;
    cfg.mode = AmplitudeMode::ResidualApprox;
    cfg.kernel = make_kernel(KernelShape::Gaussian, row.lh, row.sigma_h);
    cfg.peak_only = proto.peak_only;
    return cfg;
}

std::vector<Table1Result> run_table1(const std::vector<Table1Row>& rows, std::uint64_t seed,
                                     const Table1Protocol& proto) {
    std::vector<Table1Result> out;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const Table1Row& row = rows[k];
        Table1Result res;
        res.row = row;
        res.delta_k = separation_samples(row.nu, row.omega0, proto.sample_interval);

        ReflectivityModel model;
        model.p = row.p;
        model.sigma_r = proto.sigma_r;
        model.delta_k = res.delta_k;
        model.lx = proto.lx;
        model.j = proto.j;
        model.seed = mix(seed, k);
        Image x = gen_reflectivity(model);
        res.realized_p = static_cast<double>((x.array() != 0.0).count()) /
                         static_cast<double>(x.size());

        ConvDictionary d = build_dictionary({make_ricker(row.omega0, proto.sample_interval)}, proto.lx);
        Image y = gen_traces(x, d, std::nullopt);
        ImageSolve sol = solve_image(y, d, table1_config(row, proto), SolverKind::RfnIta, {},
                                     proto.threads);
        res.rho = safe_corr(x, sol.x);
        res.rho_first = safe_corr(x, sol.first_x);
        res.rho_y = safe_corr(y, reconstruct(d, sol.x));
        res.m_it = sol.mean_iters;
        res.all_zero = sol.x.isZero(0.0);
        out.push_back(res);
    }
    return out;
}

double ols_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    require(xs.size() == ys.size() && xs.size() >= 2, ErrorKind::InvalidParameter,
            "need at least two points");
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    require(sxx > 0.0, ErrorKind::InvalidParameter, "degenerate abscissa");
    return sxy / sxx;
}

SweepResult run_freq_sweep(const std::vector<double>& f0_hz, std::uint64_t seed,
                           const SweepProtocol& proto) {
    ReflectivityModel model;
    model.p = proto.p;
    model.sigma_r = proto.sigma_r;
    model.delta_k = proto.delta_k;
    model.lx = proto.lx;
    model.j = proto.j;
    model.seed = mix(seed, 0);
    model.enforce_fill_bound = false;
    // One reflectivity image shared across frequencies.
    const Image x = gen_reflectivity(model);

    SweepResult out;
    std::vector<double> lw, lm;
    for (std::size_t k = 0; k < f0_hz.size(); ++k) {
        const double f0 = f0_hz[k];
        const double w0 = 2.0 * std::numbers::pi * f0;
        ConvDictionary d = build_dictionary({make_ricker(w0, proto.sample_interval)}, proto.lx);
        Image y = gen_traces(x, d, NoiseSpec{proto.snr_db, mix(seed, 1000 + k)});

        SolverConfig cfg;
        const double b1 = 1.22 - 0.01 * (f0 - 25.0);
        cfg.betas = {b1, b1 + 0.2};
        cfg.beta_decay = 0.5;
        cfg.taus = proto.taus;
        cfg.step = proto.step;
        cfg.first_step = proto.first_step;
        cfg.max_iters = proto.max_iters;
        cfg.stop_tol = proto.stop_tol;
        cfg.mode = AmplitudeMode::ResidualApprox;
        cfg.kernel = make_kernel(KernelShape::Gaussian, proto.lh, proto.sigma_h);
        cfg.peak_only = proto.peak_only;

        ImageSolve sol = solve_image(y, d, cfg, SolverKind::RfnIta, {}, proto.threads);
        SweepPoint pt;
        pt.f0 = f0;
        pt.mse = mse_code(x, sol.x);
        pt.rho = safe_corr(x, sol.x);
        out.points.push_back(pt);
        lw.push_back(std::log(w0));
        lm.push_back(std::log(pt.mse));
    }
    if (lw.size() >= 2) out.slope = ols_slope(lw, lm);
    return out;
}

}  // namespace rfncsc
