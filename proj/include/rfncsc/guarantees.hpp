#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rfncsc/dictionary.hpp"
#include "rfncsc/rfn.hpp"

namespace rfncsc {

struct StripeEntry {
    Index index = 0;
    double x_min = 0.0;
    double x_max = 0.0;
    double x_minus = 0.0;
    int count = 0;
};

struct StripeStats {
    int s = 0;
    // One entry per support index, describing its symmetric neighbourhood.
    std::vector<StripeEntry> stripes;
    double x_min = 0.0;
    double x_max = 0.0;
    Index ls = 0;
};

// x holds m blocks of lx coefficients.
StripeStats stripe_stats(const Vec& x, Index lh, Index ld, Index m);

enum class Theorem { T1, T2, T3 };

struct GuaranteeReport {
    Theorem theorem = Theorem::T1;
    bool condition_holds = false;
    double lhs = 0.0;
    double rhs = 0.0;
    std::optional<std::pair<double, double>> beta1_interval;
    std::string reason;

    double mu = 0.0;
    int s = 0;
    double eps_d = 0.0;
    double eps_s = 0.0;
    double eps_inf = 0.0;
    double tau = 0.0;
    double h_nu = 0.0;
    double h_min = 0.0;
    Index delta_k = 0;
    // Largest ||sigma_y[i] a_i - d_i|| over the support; diagnostic only.
    double a1_violation = 0.0;
    // Tightest pairwise lower limit on beta1; diagnostic only.
    double pairwise_bound = 0.0;
};

// Works on amplitudes measured against unit-norm atoms.
Vec unit_atom_code(const ConvDictionary& d, const Vec& x);

GuaranteeReport check_theorem1(const Vec& x, const ConvDictionary& d, const RfnKernel& h,
                               double eps_d, double tau);
// Plug-in form of the noise-free condition from summary quantities.
GuaranteeReport theorem1_plugin(int s, double mu, double ratio);

GuaranteeReport check_theorem2(const Vec& x, const ConvDictionary& d);

// Delta_k = ceil(nu * scale / T_s) with scale taken from the first filter.
GuaranteeReport check_theorem3(const Vec& x, const ConvDictionary& d, const RfnKernel& h,
                               double nu);

// ||H d_o|| of a unit-norm atom shifted by o against a window centred on the atom.
std::vector<double> windowed_atom_norms(const Wavelet& f, const RfnKernel& h);
// Largest off-diagonal entry of (H D_i)^T (H D_i) with unit-norm atoms.
double windowed_coherence(const ConvDictionary& d, const RfnKernel& h);

std::pair<double, double> sripe_bounds(double mu, const Vec& x_stripe);
std::pair<double, double> sripe_bounds(const ConvDictionary& d, const Vec& x_stripe);

const char* to_string(Theorem t);

}  // namespace rfncsc
