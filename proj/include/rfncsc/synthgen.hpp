#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "rfncsc/dictionary.hpp"
#include "rfncsc/solvers.hpp"

namespace rfncsc {

struct ReflectivityModel {
    double p = 0.1;
    double sigma_r = 3.0;
    double mu_r = 0.0;
    Index delta_k = 1;
    Index lx = 60;
    Index j = 1000;
    std::uint64_t seed = 0;
    // The rejection scan never overfills; the guard can be lifted for dense protocols.
    bool enforce_fill_bound = true;

    void validate() const;
};

struct NoiseSpec {
    double snr_db = 40.0;
    std::uint64_t seed = 0;
};

// Independent stream per (seed, channel).
std::mt19937_64 channel_rng(std::uint64_t seed, std::uint64_t channel);

Image gen_reflectivity(const ReflectivityModel& model);
Image gen_traces(const Image& x, const ConvDictionary& d, const std::optional<NoiseSpec>& noise);
double realized_snr_db(const Image& clean, const Image& noisy);

struct Table1Row {
    double omega0 = 0.0;
    double nu = 0.0;
    double beta1 = 0.0;
    double beta2 = 0.0;
    Index lh = 0;
    double sigma_h = 0.0;
    double p = 0.1;
};

struct Table1Result {
    Table1Row row;
    Index delta_k = 0;
    double realized_p = 0.0;
    std::optional<double> rho_first;
    std::optional<double> rho;
    std::optional<double> rho_y;
    double m_it = 0.0;
    bool all_zero = false;
};

struct Table1Protocol {
    Index j = 1000;
    Index lx = 60;
    double sample_interval = 0.004;
    double sigma_r = 3.0;
    double step = 0.5;
    double first_step = 1.0;
    int max_iters = 4;
    double stop_tol = 1e-4;
    std::vector<double> taus{0.4, 1.0};
    bool peak_only = true;
    int threads = 1;
};

std::vector<Table1Row> table1_rows();
Index separation_samples(double nu, double omega0, double sample_interval);
SolverConfig table1_config(const Table1Row& row, const Table1Protocol& proto);

std::vector<Table1Result> run_table1(const std::vector<Table1Row>& rows, std::uint64_t seed,
                                     const Table1Protocol& proto = {});

struct SweepPoint {
    double f0 = 0.0;
    double mse = 0.0;
    std::optional<double> rho;
};

struct SweepResult {
    std::vector<SweepPoint> points;
    double slope = 0.0;
};

struct SweepProtocol {
    Index j = 1200;
    Index lx = 60;
    double p = 0.4;
    double sigma_r = 3.0;
    Index delta_k = 5;
    Index lh = 11;
    double sigma_h = 2.0;
    double step = 0.5;
    double first_step = 1.0;
    int max_iters = 4;
    double stop_tol = 1e-4;
    double snr_db = 40.0;
    double sample_interval = 0.004;
    std::vector<double> taus{0.4, 1.0};
    bool peak_only = false;
    int threads = 1;
};

SweepResult run_freq_sweep(const std::vector<double>& f0_hz, std::uint64_t seed,
                           const SweepProtocol& proto = {});

// Ordinary least-squares slope of ys against xs.
double ols_slope(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace rfncsc
