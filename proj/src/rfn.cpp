#include "rfncsc/rfn.hpp"

#include <cmath>

namespace rfncsc {

namespace {

void check_definition1(const Vec& h) {
    require(h.size() >= 1 && h.size() % 2 == 1, ErrorKind::InvalidParameter,
            "kernel length must be odd");
    Index c = (h.size() - 1) / 2;
    require(h[c] == 1.0, ErrorKind::KernelInvariant, "kernel center must equal 1");
    for (Index k = 0; k < h.size(); ++k) {
        require(std::isfinite(h[k]), ErrorKind::KernelInvariant, "kernel must be finite");
        require(h[k] >= 0.0, ErrorKind::KernelInvariant, "kernel must be non-negative");
        require(h[k] <= 1.0, ErrorKind::KernelInvariant, "kernel must peak at its center");
        require(h[k] == h[h.size() - 1 - k], ErrorKind::KernelInvariant,
                "kernel must be symmetric");
    }
}

}  // namespace

bool RfnKernel::strictly_decreasing() const {
    Index c = half();
    if (c == 0) return false;
    for (Index k = 0; k < c; ++k)
        if (!(samples[c + k] > samples[c + k + 1])) return false;
    return true;
}

RfnKernel make_kernel(KernelShape shape, Index lh, double sigma_h) {
    require(lh >= 1 && lh % 2 == 1, ErrorKind::InvalidParameter, "L_h must be odd and >= 1");
    RfnKernel h;
    h.shape = shape;
    Index c = (lh - 1) / 2;
    switch (shape) {
        case KernelShape::Rectangular:
            h.samples = Vec::Ones(lh);
            break;
        case KernelShape::Gaussian:
            require(sigma_h > 0.0, ErrorKind::InvalidParameter, "sigma_h must be positive");
            h.sigma_h = sigma_h;
            h.samples.resize(lh);
            for (Index k = 0; k <= c; ++k) {
                double v = std::exp(-static_cast<double>(k * k) / (2.0 * sigma_h * sigma_h));
                h.samples[c + k] = v;
                h.samples[c - k] = v;
            }
            break;
        case KernelShape::Custom:
            throw Error(ErrorKind::InvalidParameter, "custom kernels need explicit samples");
    }
    return h;
}

RfnKernel make_custom_kernel(const Vec& samples) {
    check_definition1(samples);
    RfnKernel h;
    h.shape = KernelShape::Custom;
    h.samples = samples;
    return h;
}

bool kernel_length_advised(const RfnKernel& h, Index ld) { return 2 * h.length() >= ld; }

EnergyField local_energy(const Vec& y, const RfnKernel& h) {
    const Index n = y.size(), c = h.half();
    Vec y2 = y.array().square();
    EnergyField f;
    f.sigma.resize(n);
    for (Index k = 0; k < n; ++k) {
        double acc = 0.0;
        for (Index j = -c; j <= c; ++j) {
            Index t = k - j;
            if (t >= 0 && t < n) acc += h.samples[j + c] * y2[t];
        }
        f.sigma[k] = std::sqrt(acc);
    }
    f.clipped = f.sigma;
    return f;
}

EnergyField clip_energy(const Vec& sigma, double tau) {
    require(tau > 0.0, ErrorKind::InvalidParameter, "tau must be positive");
    EnergyField f;
    f.sigma = sigma;
    f.tau = tau;
    f.clipped = (sigma.array() >= tau).select(sigma, 1.0);
    return f;
}

Vec normalize(const Vec& r, const EnergyField& field) {
    require(r.size() == field.clipped.size(), ErrorKind::InvalidParameter,
            "length mismatch in normalize");
    return r.cwiseQuotient(field.clipped);
}

Vec soft_threshold(const Vec& z, double beta) {
    require(beta >= 0.0, ErrorKind::InvalidParameter, "beta must be >= 0");
    return (z.array() - beta).max(0.0) - (-z.array() - beta).max(0.0);
}

Vec threshold_indicator(const Vec& z, double beta) {
    require(beta >= 0.0, ErrorKind::InvalidParameter, "beta must be >= 0");
    return (z.array().abs() >= beta).cast<double>();
}

Vec hard_threshold(const Vec& z, double beta) {
    require(beta >= 0.0, ErrorKind::InvalidParameter, "beta must be >= 0");
    return (z.array().abs() > beta).select(z, 0.0);
}

}  // namespace rfncsc
