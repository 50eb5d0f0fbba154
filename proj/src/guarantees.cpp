#include "rfncsc/guarantees.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rfncsc/rfn.hpp"

namespace rfncsc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_rectangular(const RfnKernel& h) {
    return (h.samples.array() == 1.0).all();
}

// Unit-norm filter samples.
Vec unit_filter(const Wavelet& f) { return f.samples / f.samples.norm(); }

Index min_gap(const Vec& x, Index lx, Index m) {
    Index gap = std::numeric_limits<Index>::max();
    for (Index p = 0; p < m; ++p) {
        Index last = -1;
        for (Index l = 0; l < lx; ++l) {
            if (x[p * lx + l] == 0.0) continue;
            if (last >= 0) gap = std::min(gap, l - last);
            last = l;
        }
    }
    return gap;
}

double a1_violation(const Vec& xn, const ConvDictionary& d, const RfnKernel& h, double tau) {
    Vec y = apply_dictionary(d, xn.cwiseQuotient(d.atom_norms));
    EnergyField f = clip_energy(local_energy(y, h).sigma, tau);
    double worst = 0.0;
    for (Index i = 0; i < xn.size(); ++i) {
        if (xn[i] == 0.0) continue;
        Vec e = Vec::Zero(d.atoms());
        e[i] = 1.0 / d.atom_norms[i];
        Vec di = apply_dictionary(d, e);
        Index p = i / d.lx, l = i % d.lx;
        Index at = std::min(d.ly - 1, l + d.filters[p].center);
        Vec ai = normalize(di, f);
        worst = std::max(worst, (f.sigma[at] * ai - di).norm());
    }
    return worst;
}

}  // namespace

Vec unit_atom_code(const ConvDictionary& d, const Vec& x) {
    require(x.size() == d.atoms(), ErrorKind::InvalidParameter, "code length mismatch");
    return x.cwiseProduct(d.atom_norms);
}

StripeStats stripe_stats(const Vec& x, Index lh, Index ld, Index m) {
    require(lh >= 1 && lh % 2 == 1, ErrorKind::InvalidParameter, "L_h must be odd");
    require(m >= 1 && x.size() % m == 0, ErrorKind::InvalidParameter, "bad filter count");
    const Index lx = x.size() / m;
    StripeStats st;
    st.ls = lh + ld - 1;
    const Index lo = (st.ls - 1) / 2, hi = st.ls - 1 - lo;

    std::vector<Index> prefix(lx + 1, 0);
    for (Index l = 0; l < lx; ++l) {
        Index c = 0;
        for (Index p = 0; p < m; ++p) c += x[p * lx + l] != 0.0;
        prefix[l + 1] = prefix[l] + c;
    }
    for (Index i = 0; i < lx; ++i) {
        Index a = std::max<Index>(0, i - lo), b = std::min(lx - 1, i + hi);
        st.s = std::max<int>(st.s, static_cast<int>(prefix[b + 1] - prefix[a]));
    }

    st.x_min = kInf;
    st.x_max = 0.0;
    for (Index i = 0; i < x.size(); ++i) {
        if (x[i] == 0.0) continue;
        Index l = i % lx;
        StripeEntry e;
        e.index = i;
        e.x_min = kInf;
        double sum = 0.0;
        for (Index p = 0; p < m; ++p)
            for (Index t = std::max<Index>(0, l - lo); t <= std::min(lx - 1, l + hi); ++t) {
                double v = std::abs(x[p * lx + t]);
                if (v == 0.0) continue;
                e.x_min = std::min(e.x_min, v);
                e.x_max = std::max(e.x_max, v);
                sum += v;
                ++e.count;
            }
        e.x_minus = sum - std::abs(x[i]);
        st.x_min = std::min(st.x_min, std::abs(x[i]));
        st.x_max = std::max(st.x_max, std::abs(x[i]));
        st.stripes.push_back(e);
    }
    if (st.stripes.empty()) st.x_min = 0.0;
    return st;
}

GuaranteeReport check_theorem1(const Vec& x, const ConvDictionary& d, const RfnKernel& h,
                               double eps_d, double tau) {
    require(is_rectangular(h), ErrorKind::KernelShape, "theorem 1 assumes a rectangular kernel");
    require(h.length() == d.ld, ErrorKind::InvalidParameter, "theorem 1 assumes L_h = L_d");
    require(eps_d >= 0.0 && tau > 0.0, ErrorKind::InvalidParameter, "need eps_d >= 0, tau > 0");
    GuaranteeReport r;
    r.theorem = Theorem::T1;
    r.mu = mutual_coherence(d);
    r.eps_d = eps_d;
    r.tau = tau;
    r.eps_s = eps_d / tau;

    Vec xn = unit_atom_code(d, x);
    StripeStats st = stripe_stats(xn, h.length(), d.ld, d.kind == DictKind::TimeVariantQ ? 1 : d.m());
    r.s = st.s;
    if (st.stripes.empty()) {
        r.reason = "empty support";
        return r;
    }
    r.eps_inf = eps_d / st.x_min;
    r.a1_violation = a1_violation(xn, d, h, tau);

    const double s = st.s;
    const double den = 1.0 - (s - 1.0) * r.mu;
    if (den <= 0.0) {
        r.reason = "sRIP denominator nonpositive";
        return r;
    }
    const double root = std::sqrt(den) - r.eps_inf;
    if (root <= 0.0) {
        r.reason = "noise exceeds the sRIP margin";
        return r;
    }

    r.lhs = kInf;
    double upper = kInf;
    for (const auto& e : st.stripes) {
        r.lhs = std::min(r.lhs, e.x_min / (e.x_max + eps_d / s));
        upper = std::min(upper, (1.0 + r.mu) * e.x_min / (s * e.x_max + eps_d));
    }
    r.rhs = s * r.mu / (1.0 + r.mu) * (1.0 + std::sqrt(s) / root) + 2.0 * s * r.eps_s / (1.0 + r.mu);
    upper = upper - r.mu - r.eps_s;
    const double lower = std::sqrt(s) * r.mu / root + r.eps_s;

    r.condition_holds = r.lhs > r.rhs && upper > lower;
    if (r.condition_holds) r.beta1_interval = std::make_pair(lower, upper);
    else r.reason = "stripe ratio condition fails";
    return r;
}

GuaranteeReport theorem1_plugin(int s, double mu, double ratio) {
    GuaranteeReport r;
    r.theorem = Theorem::T1;
    r.s = s;
    r.mu = mu;
    const double sd = s, den = 1.0 - (sd - 1.0) * mu;
    if (den <= 0.0) {
        r.reason = "sRIP denominator nonpositive";
        return r;
    }
    r.lhs = ratio;
    r.rhs = sd * mu / (1.0 + mu) * (1.0 + std::sqrt(sd) / std::sqrt(den));
    const double upper = (1.0 + mu) / sd * ratio - mu;
    const double lower = std::sqrt(sd) * mu / std::sqrt(den);
    r.condition_holds = r.lhs > r.rhs && upper > lower;
    if (r.condition_holds) r.beta1_interval = std::make_pair(lower, upper);
    else r.reason = "stripe ratio condition fails";
    return r;
}

GuaranteeReport check_theorem2(const Vec& x, const ConvDictionary& d) {
    GuaranteeReport r;
    r.theorem = Theorem::T2;
    r.mu = mutual_coherence(d);
    StripeStats st = stripe_stats(unit_atom_code(d, x), d.ld % 2 ? d.ld : d.ld + 1, d.ld,
                                  d.kind == DictKind::TimeVariantQ ? 1 : d.m());
    r.s = st.s;
    r.lhs = 1.0;
    r.rhs = r.mu;
    r.condition_holds = st.s == 1 && r.mu < 1.0;
    if (r.condition_holds) r.beta1_interval = std::make_pair(r.mu, 1.0);
    else r.reason = st.s == 0 ? "empty support" : (st.s > 1 ? "stripe sparsity above one" : "mu >= 1");
    return r;
}

std::vector<double> windowed_atom_norms(const Wavelet& f, const RfnKernel& h) {
    const Vec u = unit_filter(f);
    const Index ld = u.size(), c = f.center, hh = h.half();
    // offsets whose atom still overlaps the window
    const Index reach = hh + std::max(c, ld - 1 - c);
    std::vector<double> out(2 * reach + 1, 0.0);
    for (Index o = -reach; o <= reach; ++o) {
        double acc = 0.0;
        for (Index k = -hh; k <= hh; ++k) {
            Index n = k - o + c;
            if (n >= 0 && n < ld) acc += h.samples[k + hh] * u[n] * u[n];
        }
        out[o + reach] = std::sqrt(acc);
    }
    return out;
}

double windowed_coherence(const ConvDictionary& d, const RfnKernel& h) {
    require(d.kind == DictKind::TimeInvariant, ErrorKind::InvalidParameter,
            "windowed coherence needs a time-invariant dictionary");
    const Index hh = h.half();
    std::vector<Vec> cols;
    for (const auto& f : d.filters) {
        const Vec u = unit_filter(f);
        const Index ld = u.size(), c = f.center, reach = hh + std::max(c, ld - 1 - c);
        for (Index o = -reach; o <= reach; ++o) {
            Vec v = Vec::Zero(h.length());
            for (Index k = -hh; k <= hh; ++k) {
                Index n = k - o + c;
                if (n >= 0 && n < ld) v[k + hh] = std::sqrt(h.samples[k + hh]) * u[n];
            }
            cols.push_back(v);
        }
    }
    double mu = 0.0;
    for (std::size_t a = 0; a < cols.size(); ++a)
        for (std::size_t b = a + 1; b < cols.size(); ++b)
            mu = std::max(mu, std::abs(cols[a].dot(cols[b])));
    return mu;
}

GuaranteeReport check_theorem3(const Vec& x, const ConvDictionary& d, const RfnKernel& h,
                               double nu) {
    require(h.strictly_decreasing(), ErrorKind::KernelShape,
            "theorem 3 needs a strictly decreasing kernel");
    require(h.length() == d.ld, ErrorKind::InvalidParameter, "theorem 3 assumes L_h = L_d");
    require(d.kind == DictKind::TimeInvariant, ErrorKind::InvalidParameter,
            "theorem 3 checker needs a time-invariant dictionary");
    require(nu > 0.0, ErrorKind::InvalidParameter, "nu must be positive");
    GuaranteeReport r;
    r.theorem = Theorem::T3;
    r.mu = mutual_coherence(d);

    const Wavelet& f0 = d.filters.front();
    const double dk = nu * f0.scale / f0.sample_interval;
    r.delta_k = static_cast<Index>(std::ceil(dk - 1e-9));

    r.h_nu = 0.0;
    r.h_min = kInf;
    double pairwise = 0.0;
    for (const auto& f : d.filters) {
        std::vector<double> hd = windowed_atom_norms(f, h);
        const Index reach = (static_cast<Index>(hd.size()) - 1) / 2;
        if (r.delta_k <= reach) r.h_nu = std::max(r.h_nu, hd[r.delta_k + reach]);
        for (double v : hd) r.h_min = std::min(r.h_min, v);
        const Vec u = unit_filter(f);
        for (Index lag = 1; lag < u.size(); ++lag) {
            double c = u.head(u.size() - lag).dot(u.tail(u.size() - lag));
            if (hd[lag + reach] > 0.0) pairwise = std::max(pairwise, std::abs(c) / hd[lag + reach]);
        }
    }

    Vec xn = unit_atom_code(d, x);
    StripeStats st = stripe_stats(xn, h.length(), d.ld, d.m());
    r.s = st.s;
    r.pairwise_bound = std::sqrt(static_cast<double>(std::max(1, r.s))) * pairwise;
    if (st.stripes.empty()) {
        r.reason = "empty support";
        return r;
    }
    r.a1_violation = a1_violation(xn, d, h, 1.0);

    r.lhs = std::sqrt(static_cast<double>(r.s)) * r.mu / r.h_min;
    r.rhs = kInf;
    for (const auto& e : st.stripes) {
        double xi = std::abs(xn[e.index]);
        r.rhs = std::min(r.rhs, 1.0 - (r.h_nu + r.mu) * e.x_minus / (xi + r.h_nu * e.x_minus));
    }
    if (min_gap(xn, d.lx, d.m()) < r.delta_k) {
        r.reason = "support violates the minimal separation";
        return r;
    }
    r.condition_holds = r.lhs < r.rhs;
    if (r.condition_holds) r.beta1_interval = std::make_pair(r.lhs, r.rhs);
    else r.reason = "threshold window is empty";
    return r;
}

std::pair<double, double> sripe_bounds(double mu, const Vec& x_stripe) {
    double s = 0.0;
    for (Index i = 0; i < x_stripe.size(); ++i) s += x_stripe[i] != 0.0;
    const double e = x_stripe.squaredNorm();
    const double k = s > 0.0 ? (s - 1.0) * mu : 0.0;
    return {(1.0 - k) * e, (1.0 + k) * e};
}

std::pair<double, double> sripe_bounds(const ConvDictionary& d, const Vec& x_stripe) {
    return sripe_bounds(mutual_coherence(d), x_stripe);
}

const char* to_string(Theorem t) {
    switch (t) {
        case Theorem::T1: return "T1";
        case Theorem::T2: return "T2";
        case Theorem::T3: return "T3";
    }
    return "?";
}

}  // namespace rfncsc
