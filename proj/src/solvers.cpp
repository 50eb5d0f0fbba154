#include "rfncsc/solvers.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace rfncsc {

namespace {

std::vector<char> nonzero_mask(const Vec& x) {
    std::vector<char> m(x.size());
    for (Index i = 0; i < x.size(); ++i) m[i] = x[i] != 0.0;
    return m;
}

std::vector<char> indicator_mask(const Vec& dq) {
    std::vector<char> m(dq.size());
    for (Index i = 0; i < dq.size(); ++i) m[i] = dq[i] != 0.0;
    return m;
}

// Keep only local maxima of |z| along each filter's shift axis.
void keep_peaks(Vec& dq, const Vec& z, Index lx) {
    const Index blocks = z.size() / lx;
    for (Index p = 0; p < blocks; ++p) {
        for (Index l = 0; l < lx; ++l) {
            Index i = p * lx + l;
            if (dq[i] == 0.0) continue;
            double a = std::abs(z[i]);
            if ((l > 0 && std::abs(z[i - 1]) > a) || (l + 1 < lx && std::abs(z[i + 1]) > a))
                dq[i] = 0.0;
        }
    }
}

Vec detect(const Vec& dr, const ConvDictionary& d, const SolverConfig& cfg, int iter) {
    EnergyField f = clip_energy(local_energy(dr, cfg.kernel).sigma, cfg.tau_at(iter));
    Vec z = adjoint_apply(d, normalize(dr, f)).cwiseQuotient(d.atom_norms);
    Vec dq = threshold_indicator(z, cfg.beta_at(iter));
    if (cfg.peak_only) keep_peaks(dq, z, d.lx);
    return dq;
}

const Wavelet& signature_filter(const ConvDictionary& d) {
    require(d.kind == DictKind::TimeInvariant && d.m() == 1, ErrorKind::InvalidParameter,
            "a signature dictionary (m = 1) is required");
    const Wavelet& f = d.filters.front();
    require(f.samples[f.center] != 0.0, ErrorKind::InvalidParameter,
            "signature filter center is zero");
    return f;
}

SolverRun ista_impl(const Vec& y, const ConvDictionary& d, double lambda, double c,
                    int max_iters, double stop_tol, bool record_cost) {
    SolverRun run;
    Vec x = Vec::Zero(d.atoms());
    const double thr = lambda / c;
    for (int it = 0; it < max_iters; ++it) {
        Vec r = y - apply_dictionary(d, x);
        run.residual_norms.push_back(r.norm());
        Vec xn = soft_threshold(x + adjoint_apply(d, r) / c, thr);
        if (it == 0) run.first_iter_x = xn;
        if (record_cost)
            run.costs.push_back(0.5 * (y - apply_dictionary(d, xn)).squaredNorm() +
                                lambda * xn.lpNorm<1>());
        double step = (xn - x).norm();
        x = std::move(xn);
        run.iterations_used = it + 1;
        if (step < stop_tol) {
            run.converged = true;
            break;
        }
    }
    if (run.first_iter_x.size() == 0) run.first_iter_x = x;
    run.support = nonzero_mask(x);
    run.first_support = nonzero_mask(run.first_iter_x);
    run.x = std::move(x);
    return run;
}

}  // namespace

double SolverConfig::beta_at(int iter) const {
    require(!betas.empty(), ErrorKind::InvalidParameter, "empty beta schedule");
    if (iter < static_cast<int>(betas.size())) return betas[iter];
    double b = betas.back();
    for (int k = static_cast<int>(betas.size()); k <= iter; ++k) b *= beta_decay;
    return b;
}

double SolverConfig::tau_at(int iter) const {
    require(!taus.empty(), ErrorKind::InvalidParameter, "empty tau schedule");
    return taus[std::min<std::size_t>(iter, taus.size() - 1)];
}

double SolverConfig::step_at(int iter) const {
    return iter == 0 && first_step ? *first_step : step;
}

void SolverConfig::validate() const {
    require(step > 0.0 && step <= 1.0, ErrorKind::InvalidParameter, "step must be in (0,1]");
    require(!first_step || (*first_step > 0.0 && *first_step <= 1.0),
            ErrorKind::InvalidParameter, "first_step must be in (0,1]");
    require(max_iters >= 1, ErrorKind::InvalidParameter, "max_iters must be >= 1");
    require(!betas.empty() && !taus.empty(), ErrorKind::InvalidParameter,
            "beta and tau schedules must be non-empty");
    for (double b : betas)
        require(b >= 0.0, ErrorKind::InvalidParameter, "thresholds must be >= 0");
    for (double t : taus) require(t > 0.0, ErrorKind::InvalidParameter, "tau must be > 0");
    require(beta_decay >= 0.0, ErrorKind::InvalidParameter, "beta_decay must be >= 0");
    require(stop_tol >= 0.0, ErrorKind::InvalidParameter, "stop_tol must be >= 0");
    require(kernel.length() >= 1, ErrorKind::InvalidParameter, "missing kernel");
}

SolverRun rfn_ita(const Vec& y, const ConvDictionary& d, const SolverConfig& cfg) {
    cfg.validate();
    require(y.size() == d.ly, ErrorKind::InvalidParameter, "data length mismatch");
    require(cfg.mode != AmplitudeMode::SupportOnly, ErrorKind::InvalidParameter,
            "SupportOnly runs through rfn_support_detect");
    const Wavelet* sig = nullptr;
    if (cfg.mode == AmplitudeMode::ResidualApprox) sig = &signature_filter(d);

    SolverRun run;
    Vec x = Vec::Zero(d.atoms());
    for (int it = 0; it < cfg.max_iters; ++it) {
        Vec dr = y - apply_dictionary(d, x);
        run.residual_norms.push_back(dr.norm());
        Vec dq = detect(dr, d, cfg, it);

        Vec dx = Vec::Zero(d.atoms());
        switch (cfg.mode) {
            case AmplitudeMode::LeastSquares: {
                bool deficient = false;
                dx = ls_refine(dr, d, support_indices(dq), &deficient);
                run.rank_deficient = run.rank_deficient || deficient;
                break;
            }
            case AmplitudeMode::ProjectionApprox:
                dx = dq.cwiseProduct(adjoint_apply(d, dr).cwiseQuotient(
                    d.atom_norms.cwiseProduct(d.atom_norms)));
                break;
            case AmplitudeMode::ResidualApprox: {
                const double peak = sig->samples[sig->center];
                for (Index l = 0; l < d.lx; ++l)
                    if (dq[l] != 0.0) dx[l] = dr[l + sig->center] / peak;
                break;
            }
            case AmplitudeMode::SupportOnly:
                break;
        }

        Vec xn = x + cfg.step_at(it) * dx;
        if (it == 0) {
            run.first_iter_x = xn;
            run.first_support = indicator_mask(dq);
        }
        double change = (xn - x).norm();
        x = std::move(xn);
        run.iterations_used = it + 1;
        if (change < cfg.stop_tol) {
            run.converged = true;
            break;
        }
    }
    run.support = nonzero_mask(x);
    run.x = std::move(x);
    return run;
}

SolverRun rfn_support_detect(const Vec& y, const ConvDictionary& d, const SolverConfig& cfg) {
    cfg.validate();
    require(y.size() == d.ly, ErrorKind::InvalidParameter, "data length mismatch");
    signature_filter(d);

    EnergyField f0 = clip_energy(local_energy(y, cfg.kernel).sigma, cfg.tau_at(0));
    const Vec yn = normalize(y, f0);

    auto finalize = [&](const Vec& q) {
        Vec x = Vec::Zero(d.lx);
        for (Index k = 0; k < d.lx; ++k)
            if (q[k] >= 0.5) x[k] = y[k];
        return x;
    };

    SolverRun run;
    Vec q = Vec::Zero(d.lx);
    for (int it = 0; it < cfg.max_iters; ++it) {
        Vec r = yn - apply_dictionary(d, q);
        run.residual_norms.push_back(r.norm());
        Vec z = adjoint_apply(d, r).cwiseQuotient(d.atom_norms);
        Vec dq = threshold_indicator(z, cfg.beta_at(it));
        if (cfg.peak_only) keep_peaks(dq, z, d.lx);
        Vec qn = q + cfg.step_at(it) * dq;
        if (it == 0) {
            run.first_iter_x = finalize(qn);
            run.first_support = indicator_mask(dq);
        }
        double change = (qn - q).norm();
        q = std::move(qn);
        run.iterations_used = it + 1;
        if (change < cfg.stop_tol) {
            run.converged = true;
            break;
        }
    }
    run.support.assign(d.lx, 0);
    for (Index k = 0; k < d.lx; ++k) run.support[k] = q[k] >= 0.5;
    run.x = finalize(q);
    return run;
}

SolverRun ista(const Vec& y, const ConvDictionary& d, double lambda, double c, int max_iters,
               double stop_tol, bool record_cost) {
    require(y.size() == d.ly, ErrorKind::InvalidParameter, "data length mismatch");
    require(lambda > 0.0, ErrorKind::InvalidParameter, "lambda must be positive");
    require(max_iters >= 1, ErrorKind::InvalidParameter, "max_iters must be >= 1");
    double l = spectral_norm_sq(d);
    require(c >= l * (1.0 - 1e-9), ErrorKind::InvalidParameter,
            "c must not be below the largest eigenvalue of D^T D");
    return ista_impl(y, d, lambda, c, max_iters, stop_tol, record_cost);
}

double spectral_norm_sq(const ConvDictionary& d) {
    const Index n = d.atoms();
    Vec v(n);
    for (Index i = 0; i < n; ++i) v[i] = 1.0 + 0.1 * std::sin(static_cast<double>(i) + 0.5);
    v.normalize();
    double lam = 0.0;
    for (int it = 0; it < 200000; ++it) {
        Vec w = adjoint_apply(d, apply_dictionary(d, v));
        double next = v.dot(w);
        double nw = w.norm();
        if (nw == 0.0) return 0.0;
        v = w / nw;
        if (it > 0 && std::abs(next - lam) <= 1e-13 * std::abs(next)) return next;
        lam = next;
    }
    return lam;
}

Vec ls_refine(const Vec& y, const ConvDictionary& d, const std::vector<Index>& support,
              bool* rank_deficient) {
    require(y.size() == d.ly, ErrorKind::InvalidParameter, "data length mismatch");
    require(static_cast<Index>(support.size()) <= d.ly, ErrorKind::InvalidParameter,
            "support larger than the data length");
    Vec x = Vec::Zero(d.atoms());
    if (rank_deficient) *rank_deficient = false;
    if (support.empty()) return x;

    Eigen::MatrixXd sub(d.ly, static_cast<Index>(support.size()));
    for (std::size_t k = 0; k < support.size(); ++k) {
        Vec e = Vec::Zero(d.atoms());
        e[support[k]] = 1.0;
        sub.col(static_cast<Index>(k)) = apply_dictionary(d, e);
    }
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(sub);
    Vec sol = cod.solve(y);
    if (rank_deficient) *rank_deficient = cod.rank() < sub.cols();
    for (std::size_t k = 0; k < support.size(); ++k) x[support[k]] = sol[static_cast<Index>(k)];
    return x;
}

Vec signature_amplitude(const Vec& y, const std::vector<Index>& support,
                        const ConvDictionary& d) {
    const Wavelet& f = signature_filter(d);
    require(y.size() == d.ly, ErrorKind::InvalidParameter, "data length mismatch");
    Vec x = Vec::Zero(d.lx);
    for (Index k : support) {
        Index at = k + f.center;
        require(k >= 0 && k < d.lx && at < y.size(), ErrorKind::Boundary,
                "support index center falls outside the data");
        x[k] = y[at] / f.samples[f.center];
    }
    return x;
}

Vec unrolled_forward(const Vec& y, const std::vector<UnrolledLayer>& layers,
                     const RfnKernel& kernel, const std::vector<double>& taus) {
    require(!layers.empty(), ErrorKind::InvalidParameter, "no layers");
    require(!taus.empty(), ErrorKind::InvalidParameter, "empty tau schedule");
    const ConvDictionary& d0 = layers.front().dict;
    for (const auto& layer : layers) {
        require(layer.dict.ly == y.size() && layer.dict.atoms() == d0.atoms(),
                ErrorKind::InvalidParameter, "layer dimension mismatch");
        signature_filter(layer.dict);
    }
    Vec x = Vec::Zero(d0.atoms());
    for (std::size_t t = 0; t < layers.size(); ++t) {
        const auto& cur = layers[t];
        Vec dr = t == 0 ? y : Vec(y - apply_dictionary(layers[t - 1].dict, x));
        EnergyField f =
            clip_energy(local_energy(dr, kernel).sigma, taus[std::min(t, taus.size() - 1)]);
        Vec dq = std::isinf(cur.beta) ? Vec(Vec::Zero(x.size()))
                                      : soft_threshold(adjoint_apply(cur.dict, normalize(dr, f)), cur.beta);
        const Index c = cur.dict.filters.front().center;
        for (Index l = 0; l < x.size(); ++l)
            if (dq[l] != 0.0) x[l] += cur.alpha * dq[l] * dr[l + c];
    }
    return x;
}

SolverKind parse_solver(const std::string& name) {
    if (name == "rfn-ita") return SolverKind::RfnIta;
    if (name == "support-detect") return SolverKind::SupportDetect;
    if (name == "ista") return SolverKind::Ista;
    throw Error(ErrorKind::InvalidParameter, "unknown solver: " + name);
}

const char* to_string(SolverKind kind) {
    switch (kind) {
        case SolverKind::RfnIta: return "rfn-ita";
        case SolverKind::SupportDetect: return "support-detect";
        case SolverKind::Ista: return "ista";
    }
    return "unknown";
}

ImageSolve solve_image(const Image& y, const ConvDictionary& d, const SolverConfig& cfg,
                       SolverKind solver, const IstaParams& ista_params, int threads) {
    require(y.rows() == d.ly, ErrorKind::InvalidParameter, "trace length mismatch");
    const Index cols = y.cols();
    const Index rows_x = solver == SolverKind::SupportDetect ? d.lx : d.atoms();
    ImageSolve out;
    out.x = Image::Zero(rows_x, cols);
    out.first_x = Image::Zero(rows_x, cols);
    out.runs.resize(cols);
    out.status.assign(cols, "ok");

    double c = 0.0;
    if (solver == SolverKind::Ista) c = 1.001 * spectral_norm_sq(d);
    else cfg.validate();

    auto solve_one = [&](Index j) {
        try {
            Vec yj = y.col(j);
            SolverRun run;
            switch (solver) {
                case SolverKind::RfnIta: run = rfn_ita(yj, d, cfg); break;
                case SolverKind::SupportDetect: run = rfn_support_detect(yj, d, cfg); break;
                case SolverKind::Ista:
                    run = ista_impl(yj, d, ista_params.beta * c, c, ista_params.max_iters,
                                    ista_params.stop_tol, false);
                    break;
            }
            out.x.col(j) = run.x;
            out.first_x.col(j) = run.first_iter_x;
            out.runs[j] = std::move(run);
        } catch (const std::exception& e) {
            out.status[j] = e.what();
        }
    };

    threads = std::max(1, threads);
    if (threads == 1 || cols < 2) {
        for (Index j = 0; j < cols; ++j) solve_one(j);
    } else {
        std::atomic<Index> next{0};
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (Index j = next++; j < cols; j = next++) solve_one(j);
            });
        for (auto& th : pool) th.join();
    }

    double total = 0.0;
    Index counted = 0;
    for (Index j = 0; j < cols; ++j) {
        if (out.status[j] != "ok") continue;
        total += out.runs[j].iterations_used;
        ++counted;
    }
    out.mean_iters = counted ? total / static_cast<double>(counted) : 0.0;
    return out;
}

std::vector<Index> support_indices(const Vec& x) {
    std::vector<Index> s;
    for (Index i = 0; i < x.size(); ++i)
        if (x[i] != 0.0) s.push_back(i);
    return s;
}

}  // namespace rfncsc
