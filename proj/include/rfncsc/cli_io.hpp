#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rfncsc/dictionary.hpp"
#include "rfncsc/guarantees.hpp"
#include "rfncsc/solvers.hpp"
#include "rfncsc/synthgen.hpp"

namespace rfncsc {

enum class Dtype { F32, F64 };

struct TraceMatrix {
    Image data;
    double sample_interval = 0.0;
    Dtype dtype = Dtype::F32;
};

void write_trace_matrix(const std::filesystem::path& path, const Image& m,
                        double sample_interval, Dtype dtype = Dtype::F32);
TraceMatrix read_trace_matrix(const std::filesystem::path& path);

struct DictionarySpec {
    std::string kind = "ricker";  // ricker | impulse | barker13
    double omega0 = 80.0 * 3.14159265358979323846;
    double sample_interval = 0.004;
    Index half_width = 0;
    std::optional<double> q;  // set for a time-variant dictionary
    Index lx = 60;
};

struct RfnSpec {
    std::string kernel = "gaussian";
    Index lh = 11;
    double sigma_h = 2.0;
    std::vector<double> taus{0.4, 1.0};
};

struct SolverSpec {
    std::string name = "rfn-ita";
    std::vector<double> betas{0.95, 0.88};
    double beta_decay = 0.5;
    double step = 0.5;
    std::optional<double> first_step = 1.0;
    int max_iters = 4;
    double stop_tol = 1e-4;
    std::string amplitude_mode = "residual";
    bool peak_only = true;
    double ista_beta = 0.14;
    int ista_max_iters = 100000;
};

struct SynthSpec {
    double p = 0.1;
    double sigma_r = 3.0;
    double mu_r = 0.0;
    Index delta_k = 5;
    Index j = 1000;
    std::optional<std::uint64_t> seed;
    std::optional<double> snr_db;
    std::optional<std::uint64_t> noise_seed;
};

struct OutputSpec {
    Dtype dtype = Dtype::F32;
};

struct ExperimentConfig {
    DictionarySpec dictionary;
    RfnSpec rfn;
    SolverSpec solver;
    SynthSpec synth;
    OutputSpec output;
};

// Throws Error(Config) with the offending key path or parse position.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& cfg);

ConvDictionary make_dictionary(const DictionarySpec& spec);
RfnKernel make_kernel(const RfnSpec& spec);
SolverConfig make_solver_config(const ExperimentConfig& cfg);
ReflectivityModel make_model(const ExperimentConfig& cfg);

nlohmann::json to_json(const GuaranteeReport& r);

std::string csv_field(const std::string& s);
std::string csv_row(const std::vector<std::string>& fields);
std::string table1_csv(const std::vector<Table1Result>& rows);
std::string sweep_csv(const SweepResult& sweep);

// Resolve --threads, then RFNCSC_THREADS, then 1.
int resolve_threads(std::optional<int> flag);

// Exit codes shared by the commands.
constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

struct CommonOptions {
    std::optional<std::filesystem::path> config;
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> out;
    std::optional<std::string> solver;
    std::optional<int> threads;
};

int cmd_synth(const CommonOptions& opt, std::ostream& out, std::ostream& err);
int cmd_solve(const CommonOptions& opt, const std::filesystem::path& y_file,
              const std::optional<std::filesystem::path>& truth_file, std::ostream& out,
              std::ostream& err);
int cmd_bench(const CommonOptions& opt, const std::string& suite, std::ostream& out,
              std::ostream& err);
int cmd_check(const CommonOptions& opt, const std::filesystem::path& x_file, int theorem,
              double eps_d, double tau, double nu, std::ostream& out, std::ostream& err);
int cmd_qdict(const CommonOptions& opt, std::optional<double> q, std::ostream& out,
              std::ostream& err);
int cmd_info(const std::filesystem::path& file, std::ostream& out, std::ostream& err);

}  // namespace rfncsc
