#include "rfncsc/dictionary.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include <unsupported/Eigen/FFT>

namespace rfncsc {

namespace {

using cplx = std::complex<double>;

Index next_pow2(Index n) {
    Index p = 1;
    while (p < n) p <<= 1;
    return p;
}

// Recenter a pulse into an odd window of out_len samples.
Wavelet recenter(const Wavelet& src, Index out_len) {
    Wavelet w = src;
    Index half = (out_len - 1) / 2;
    w.samples = Vec::Zero(out_len);
    w.center = half;
    double kept = 0.0, total = src.samples.squaredNorm();
    for (Index k = 0; k < src.length(); ++k) {
        Index dst = k - src.center + half;
        if (dst >= 0 && dst < out_len) {
            w.samples[dst] = src.samples[k];
            kept += src.samples[k] * src.samples[k];
        }
    }
    w.truncated = total > 0.0 && kept < 0.99 * total;
    return w;
}

}  // namespace

double QModelParams::gamma() const {
    return 2.0 / std::numbers::pi * std::atan(1.0 / (2.0 * q));
}

Index default_half_width(double omega0, double sample_interval) {
    require(omega0 > 0.0 && sample_interval > 0.0, ErrorKind::InvalidParameter,
            "omega0 and sample_interval must be positive");
    return std::max<Index>(1, static_cast<Index>(std::ceil(5.0 / (omega0 * sample_interval))));
}

Wavelet make_ricker(double omega0, double sample_interval, Index half_width) {
    require(omega0 > 0.0, ErrorKind::InvalidParameter, "omega0 must be positive");
    require(sample_interval > 0.0, ErrorKind::InvalidParameter,
            "sample_interval must be positive");
    if (half_width == 0) half_width = default_half_width(omega0, sample_interval);
    require(half_width >= 1, ErrorKind::InvalidParameter, "half_width must be >= 1");

    Wavelet w;
    w.sample_interval = sample_interval;
    w.center = half_width;
    w.scale = 1.0 / omega0;
    w.samples.resize(2 * half_width + 1);
    for (Index k = 0; k <= half_width; ++k) {
        double t = static_cast<double>(k) * sample_interval;
        double a = omega0 * omega0 * t * t;
        double g = (1.0 - 0.5 * a) * std::exp(-0.25 * a);
        w.samples[half_width + k] = g;
        w.samples[half_width - k] = g;
    }
    return w;
}

Wavelet make_impulse(double sample_interval) {
    return make_filter(Vec::Ones(1), sample_interval, sample_interval);
}

Wavelet make_filter(const Vec& samples, double sample_interval, double scale) {
    require(samples.size() >= 1, ErrorKind::InvalidParameter, "empty filter");
    require(sample_interval > 0.0, ErrorKind::InvalidParameter,
            "sample_interval must be positive");
    Wavelet w;
    w.samples = samples;
    w.sample_interval = sample_interval;
    w.center = (samples.size() - 1) / 2;
    w.scale = scale > 0.0 ? scale : sample_interval;
    return w;
}

Wavelet make_q_pulse(const Wavelet& source, const QModelParams& q, double travel_time,
                     Index out_len) {
    require(travel_time >= 0.0, ErrorKind::InvalidParameter, "travel_time must be >= 0");
    require(out_len >= 1 && out_len % 2 == 1, ErrorKind::InvalidParameter,
            "out_len must be odd");
    require(q.q > 0.0, ErrorKind::InvalidParameter, "Q must be positive");
    require(q.omega0 > 0.0, ErrorKind::InvalidParameter, "omega0 must be positive");
    if (travel_time == 0.0) return recenter(source, out_len);

    const double ts = source.sample_interval;
    const Index n = next_pow2(8 * std::max(out_len, source.length()));
    std::vector<cplx> buf(n, cplx(0.0, 0.0));
    for (Index k = 0; k < source.length(); ++k) {
        Index idx = ((k - source.center) % n + n) % n;
        buf[idx] = source.samples[k];
    }

    Eigen::FFT<double> fft;
    std::vector<cplx> spec;
    fft.fwd(spec, buf);

    const double gamma = q.gamma();
    const bool lossless = std::isinf(q.q);
    auto factor = [&](double w) {
        double r = std::pow(w / q.omega0, -gamma);
        double phase = w * travel_time * (1.0 - r);
        double amp = lossless ? 1.0 : std::exp(-r * w * travel_time / (2.0 * q.q));
        return amp * cplx(std::cos(phase), std::sin(phase));
    };
    for (Index f = 1; f < n; ++f) {
        Index fi = f <= n / 2 ? f : f - n;
        double w = 2.0 * std::numbers::pi * static_cast<double>(std::abs(fi)) /
                   (static_cast<double>(n) * ts);
        cplx a = factor(w);
        spec[f] *= fi >= 0 ? a : std::conj(a);
    }

    std::vector<cplx> out;
    fft.inv(out, spec);

    Wavelet w = source;
    Index half = (out_len - 1) / 2;
    w.samples = Vec::Zero(out_len);
    w.center = half;
    double total = 0.0, kept = 0.0;
    for (Index k = 0; k < n; ++k) total += out[k].real() * out[k].real();
    for (Index k = -half; k <= half; ++k) {
        double v = out[(k % n + n) % n].real();
        w.samples[k + half] = v;
        kept += v * v;
    }
    w.truncated = total > 0.0 && kept < 0.99 * total;
    return w;
}

ConvDictionary build_dictionary(const std::vector<Wavelet>& filters, Index lx) {
    require(!filters.empty(), ErrorKind::InvalidParameter, "empty filter list");
    require(lx >= 1, ErrorKind::InvalidParameter, "L_x must be >= 1");
    ConvDictionary d;
    d.kind = DictKind::TimeInvariant;
    d.filters = filters;
    d.lx = lx;
    d.ld = 0;
    for (const auto& f : filters) {
        require(f.length() >= 1, ErrorKind::InvalidParameter, "empty filter");
        require(f.sample_interval == filters.front().sample_interval,
                ErrorKind::InvalidParameter, "filters must share a sample interval");
        d.ld = std::max(d.ld, f.length());
    }
    d.ly = lx + d.ld - 1;
    d.atom_norms.resize(d.m() * lx);
    for (Index p = 0; p < d.m(); ++p) d.atom_norms.segment(p * lx, lx).setConstant(filters[p].samples.norm());
    return d;
}

ConvDictionary build_q_dictionary(const Wavelet& source, const QModelParams& q, Index lx,
                                  Index out_len) {
    require(lx >= 1, ErrorKind::InvalidParameter, "L_x must be >= 1");
    const double ts = source.sample_interval;
    if (out_len == 0) {
        out_len = source.length();
        if (out_len % 2 == 0) ++out_len;
        // The latest pulse is the broadest; grow until it fits.
        while (make_q_pulse(source, q, static_cast<double>(lx) * ts, out_len).truncated)
            out_len += 2;
    }
    ConvDictionary d;
    d.kind = DictKind::TimeVariantQ;
    d.lx = lx;
    d.ld = out_len;
    d.ly = lx + out_len - 1;
    d.dense = Eigen::MatrixXd::Zero(d.ly, lx);
    d.atom_norms.resize(lx);
    for (Index n = 0; n < lx; ++n) {
        Wavelet g = make_q_pulse(source, q, static_cast<double>(n + 1) * ts, out_len);
        require(!g.truncated, ErrorKind::InvalidParameter,
                "out_len too short for the attenuated pulse");
        d.dense.col(n).segment(n, out_len) = g.samples;
        d.atom_norms[n] = g.samples.norm();
        d.filters.push_back(std::move(g));
    }
    return d;
}

Vec apply_dictionary(const ConvDictionary& d, const Vec& x) {
    require(x.size() == d.atoms(), ErrorKind::InvalidParameter, "code length mismatch");
    if (d.kind == DictKind::TimeVariantQ) return d.dense * x;
    Vec y = Vec::Zero(d.ly);
    for (Index p = 0; p < d.m(); ++p) {
        const Vec& f = d.filters[p].samples;
        for (Index l = 0; l < d.lx; ++l) {
            double a = x[p * d.lx + l];
            if (a != 0.0) y.segment(l, f.size()) += a * f;
        }
    }
    return y;
}

Vec adjoint_apply(const ConvDictionary& d, const Vec& r) {
    require(r.size() == d.ly, ErrorKind::InvalidParameter, "data length mismatch");
    if (d.kind == DictKind::TimeVariantQ) return d.dense.transpose() * r;
    Vec out(d.atoms());
    for (Index p = 0; p < d.m(); ++p) {
        const Vec& f = d.filters[p].samples;
        for (Index l = 0; l < d.lx; ++l) out[p * d.lx + l] = f.dot(r.segment(l, f.size()));
    }
    return out;
}

Eigen::MatrixXd dense_matrix(const ConvDictionary& d) {
    if (d.kind == DictKind::TimeVariantQ) return d.dense;
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d.ly, d.atoms());
    for (Index p = 0; p < d.m(); ++p) {
        const Vec& f = d.filters[p].samples;
        for (Index l = 0; l < d.lx; ++l) m.col(p * d.lx + l).segment(l, f.size()) = f;
    }
    return m;
}

double mutual_coherence(const ConvDictionary& d) {
    require(d.atoms() >= 2, ErrorKind::InvalidParameter, "need at least two atoms");
    for (Index i = 0; i < d.atom_norms.size(); ++i)
        require(d.atom_norms[i] > 0.0, ErrorKind::DegenerateAtom, "zero-norm atom");

    if (d.kind == DictKind::TimeVariantQ) {
        Eigen::MatrixXd g = d.dense.transpose() * d.dense;
        double mu = 0.0;
        for (Index i = 0; i < g.rows(); ++i)
            for (Index j = i + 1; j < g.cols(); ++j)
                mu = std::max(mu, std::abs(g(i, j)) / (d.atom_norms[i] * d.atom_norms[j]));
        return mu;
    }

    // Filter cross/auto-correlations at every shift two atoms can take.
    double mu = 0.0;
    for (Index p = 0; p < d.m(); ++p) {
        const Vec& a = d.filters[p].samples;
        for (Index q = p; q < d.m(); ++q) {
            const Vec& b = d.filters[q].samples;
            double norm = a.norm() * b.norm();
            Index lo = -std::min(d.lx - 1, b.size() - 1);
            Index hi = std::min(d.lx - 1, a.size() - 1);
            for (Index lag = lo; lag <= hi; ++lag) {
                if (p == q && lag <= 0) continue;
                // atom b placed lag samples after atom a
                double c = 0.0;
                for (Index n = std::max<Index>(0, lag); n < std::min(a.size(), lag + b.size()); ++n)
                    c += a[n] * b[n - lag];
                mu = std::max(mu, std::abs(c) / norm);
            }
        }
    }
    return mu;
}

}  // namespace rfncsc
