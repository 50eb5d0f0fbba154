#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rfncsc/dictionary.hpp"
#include "rfncsc/rfn.hpp"

namespace rfncsc {

enum class AmplitudeMode { LeastSquares, ProjectionApprox, ResidualApprox, SupportOnly };

struct SolverConfig {
    // Explicit leading thresholds; later ones decay by beta_decay.
    std::vector<double> betas{0.95, 0.88};
    double beta_decay = 0.5;
    // Last entry repeats.
    std::vector<double> taus{0.4, 1.0};
    double step = 0.5;
    // Step of the first iteration when set; later iterations use step.
    std::optional<double> first_step;
    int max_iters = 4;
    double stop_tol = 1e-4;
    AmplitudeMode mode = AmplitudeMode::ResidualApprox;
    RfnKernel kernel;
    bool peak_only = false;

    double beta_at(int iter) const;
    double tau_at(int iter) const;
    double step_at(int iter) const;
    void validate() const;
};

struct SolverRun {
    Vec x;
    std::vector<char> support;
    int iterations_used = 0;
    std::vector<double> residual_norms;
    bool converged = false;
    Vec first_iter_x;
    // Indicator fired at the first iteration.
    std::vector<char> first_support;
    bool rank_deficient = false;
    // ISTA objective after each iteration.
    std::vector<double> costs;
};

SolverRun rfn_ita(const Vec& y, const ConvDictionary& d, const SolverConfig& cfg);
SolverRun rfn_support_detect(const Vec& y, const ConvDictionary& d, const SolverConfig& cfg);

SolverRun ista(const Vec& y, const ConvDictionary& d, double lambda, double c, int max_iters,
               double stop_tol, bool record_cost = false);

double spectral_norm_sq(const ConvDictionary& d);

Vec ls_refine(const Vec& y, const ConvDictionary& d, const std::vector<Index>& support,
              bool* rank_deficient = nullptr);
Vec signature_amplitude(const Vec& y, const std::vector<Index>& support,
                        const ConvDictionary& d);

struct UnrolledLayer {
    ConvDictionary dict;
    double beta = 0.0;
    double alpha = 1.0;
};

Vec unrolled_forward(const Vec& y, const std::vector<UnrolledLayer>& layers,
                     const RfnKernel& kernel, const std::vector<double>& taus);

enum class SolverKind { RfnIta, SupportDetect, Ista };

SolverKind parse_solver(const std::string& name);
const char* to_string(SolverKind kind);

struct IstaParams {
    double beta = 0.14;
    int max_iters = 100000;
    double stop_tol = 1e-4;
};

struct ImageSolve {
    Image x;
    Image first_x;
    std::vector<SolverRun> runs;
    std::vector<std::string> status;
    double mean_iters = 0.0;
};

ImageSolve solve_image(const Image& y, const ConvDictionary& d, const SolverConfig& cfg,
                       SolverKind solver, const IstaParams& ista_params = {},
                       int threads = 1);

std::vector<Index> support_indices(const Vec& x);

}  // namespace rfncsc
