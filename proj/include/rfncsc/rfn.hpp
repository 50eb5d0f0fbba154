#pragma once

#include "rfncsc/common.hpp"

namespace rfncsc {

enum class KernelShape { Rectangular, Gaussian, Custom };

struct RfnKernel {
    Vec samples;
    KernelShape shape = KernelShape::Rectangular;
    double sigma_h = 0.0;

    Index length() const { return samples.size(); }
    Index half() const { return (samples.size() - 1) / 2; }
    bool strictly_decreasing() const;
};

RfnKernel make_kernel(KernelShape shape, Index lh, double sigma_h = 0.0);
RfnKernel make_custom_kernel(const Vec& samples);
// Rule of thumb L_h >= L_d/2; advisory only.
bool kernel_length_advised(const RfnKernel& h, Index ld);

struct EnergyField {
    Vec sigma;
    Vec clipped;
    double tau = 0.0;
};

EnergyField local_energy(const Vec& y, const RfnKernel& h);
EnergyField clip_energy(const Vec& sigma, double tau);
Vec normalize(const Vec& r, const EnergyField& field);

Vec soft_threshold(const Vec& z, double beta);
Vec threshold_indicator(const Vec& z, double beta);
Vec hard_threshold(const Vec& z, double beta);

}  // namespace rfncsc
