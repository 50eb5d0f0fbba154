#include <iostream>
#include <limits>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rfncsc/cli_io.hpp"

using namespace rfncsc;

namespace {

void add_common(CLI::App* app, CommonOptions& opt) {
    app->add_option("--config", opt.config, "JSON experiment config")->check(CLI::ExistingFile);
    app->add_option("--seed", opt.seed, "RNG seed");
    app->add_option("--out", opt.out, "output path");
    app->add_option("--solver", opt.solver, "rfn-ita | support-detect | ista");
    app->add_option("--threads", opt.threads, "worker threads")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RFN-ITA convolutional sparse coding"};
    app.require_subcommand(1);
    CommonOptions opt;

    auto* synth = app.add_subcommand("synth", "generate reflectivity and traces");
    add_common(synth, opt);

    auto* solve = app.add_subcommand("solve", "estimate codes from traces");
    add_common(solve, opt);
    std::string y_file;
    std::optional<std::string> truth;
    solve->add_option("traces", y_file, "trace matrix file")->required()->check(CLI::ExistingFile);
    solve->add_option("--truth", truth, "ground-truth code file")->check(CLI::ExistingFile);

    auto* bench = app.add_subcommand("bench", "run a benchmark suite");
    add_common(bench, opt);
    std::string suite;
    bench->add_option("suite", suite, "table1 | freqsweep")->required();

    auto* check = app.add_subcommand("check", "evaluate a recovery guarantee");
    add_common(check, opt);
    std::string x_file;
    int theorem = 1;
    double eps_d = 0.0, tau = 1.0, nu = 1.0;
    std::optional<int> s_plug;
    std::optional<double> mu_plug, ratio_plug;
    check->add_option("codes", x_file, "code matrix file");
    check->add_option("--theorem", theorem, "1, 2 or 3");
    check->add_option("--eps-d", eps_d, "noise energy bound");
    check->add_option("--tau", tau, "energy clipping threshold");
    check->add_option("--nu", nu, "minimal separation in units of the wavelet scale");
    check->add_option("--s", s_plug, "stripe sparsity (plug-in form)");
    check->add_option("--mu", mu_plug, "mutual coherence (plug-in form)");
    check->add_option("--ratio", ratio_plug, "|x|min/|x|max (plug-in form)");

    auto* qdict = app.add_subcommand("qdict", "materialize a dictionary");
    add_common(qdict, opt);
    std::string q_text;
    qdict->add_option("--q", q_text, "quality factor or inf");

    auto* info = app.add_subcommand("info", "describe a trace matrix file");
    std::string info_file;
    info->add_option("file", info_file)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    if (synth->parsed()) return cmd_synth(opt, std::cout, std::cerr);
    if (solve->parsed()) {
        std::optional<std::filesystem::path> t;
        if (truth) t = *truth;
        return cmd_solve(opt, y_file, t, std::cout, std::cerr);
    }
    if (bench->parsed()) return cmd_bench(opt, suite, std::cout, std::cerr);
    if (check->parsed()) {
        if (s_plug || mu_plug || ratio_plug) {
            if (theorem != 1 || !s_plug || !mu_plug || !ratio_plug) {
                std::cerr << "error: the plug-in form needs --theorem 1 with --s, --mu and --ratio\n";
                return kExitUsage;
            }
            try {
                GuaranteeReport r = theorem1_plugin(*s_plug, *mu_plug, *ratio_plug);
                std::cout << to_json(r).dump(2) << "\n";
                return r.condition_holds ? kExitOk : kExitDomain;
            } catch (const Error& e) {
                std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
                return kExitDomain;
            }
        }
        if (x_file.empty()) {
            std::cerr << "error: a code file is required\n";
            return kExitUsage;
        }
        return cmd_check(opt, x_file, theorem, eps_d, tau, nu, std::cout, std::cerr);
    }
    if (qdict->parsed()) {
        std::optional<double> q;
        if (!q_text.empty()) {
            if (q_text == "inf") {
                q = std::numeric_limits<double>::infinity();
            } else {
                try {
                    std::size_t pos = 0;
                    q = std::stod(q_text, &pos);
                    if (pos != q_text.size()) throw std::invalid_argument("trailing");
                } catch (const std::exception&) {
                    std::cerr << "error: --q must be a number or inf\n";
                    return kExitUsage;
                }
            }
        }
        return cmd_qdict(opt, q, std::cout, std::cerr);
    }
    if (info->parsed()) return cmd_info(info_file, std::cout, std::cerr);
    return kExitUsage;
}
