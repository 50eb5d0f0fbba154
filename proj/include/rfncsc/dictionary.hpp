#pragma once

#include <limits>
#include <vector>

#include "rfncsc/common.hpp"

namespace rfncsc {

struct Wavelet {
    Vec samples;
    double sample_interval = 0.0;
    Index center = 0;
    // Time scale sigma in seconds; 1/omega0 for a Ricker pulse.
    double scale = 0.0;
    // Set by make_q_pulse when the window holds < 99% of the pulse energy.
    bool truncated = false;

    Index length() const { return samples.size(); }
};

struct QModelParams {
    double q = std::numeric_limits<double>::infinity();
    double omega0 = 0.0;
    double sample_interval = 0.0;

    double gamma() const;
};

enum class DictKind { TimeInvariant, TimeVariantQ };

struct ConvDictionary {
    DictKind kind = DictKind::TimeInvariant;
    std::vector<Wavelet> filters;
    Index lx = 0;
    Index ly = 0;
    Index ld = 0;
    Vec atom_norms;
    // Only materialized for TimeVariantQ (ly x lx).
    Eigen::MatrixXd dense;

    Index m() const { return static_cast<Index>(filters.size()); }
    Index atoms() const { return kind == DictKind::TimeVariantQ ? lx : m() * lx; }
    // Shift from a coefficient index to the data sample under the atom's center.
    Index center_shift() const { return (ld - 1) / 2; }
};

// Default truncation: samples out to t = 5/omega0.
Index default_half_width(double omega0, double sample_interval);

Wavelet make_ricker(double omega0, double sample_interval, Index half_width = 0);
Wavelet make_impulse(double sample_interval);
Wavelet make_filter(const Vec& samples, double sample_interval, double scale = 0.0);

Wavelet make_q_pulse(const Wavelet& source, const QModelParams& q, double travel_time,
                     Index out_len);

ConvDictionary build_dictionary(const std::vector<Wavelet>& filters, Index lx);
// out_len == 0 picks the shortest odd window that keeps every pulse untruncated.
ConvDictionary build_q_dictionary(const Wavelet& source, const QModelParams& q, Index lx,
                                  Index out_len = 0);

Vec apply_dictionary(const ConvDictionary& d, const Vec& x);
Vec adjoint_apply(const ConvDictionary& d, const Vec& r);
Eigen::MatrixXd dense_matrix(const ConvDictionary& d);
double mutual_coherence(const ConvDictionary& d);

}  // namespace rfncsc
