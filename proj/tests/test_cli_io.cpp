#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include <unistd.h>

#include "rfncsc/cli_io.hpp"

using namespace rfncsc;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("rfncsc_test_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

ErrorKind config_error(const json& j) {
    try {
        parse_config(j);
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::Io;
}

std::string config_message(const json& j) {
    try {
        parse_config(j);
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("trace files round-trip bit-exactly") {
    TempDir tmp;
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    Image m(37, 5);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng) * 1e3;
    m(0, 0) = -0.0;
    m(1, 0) = std::numeric_limits<double>::denorm_min();

    write_trace_matrix(tmp.path / "a.rfn", m, 0.004, Dtype::F64);
    TraceMatrix t = read_trace_matrix(tmp.path / "a.rfn");
    CHECK(t.dtype == Dtype::F64);
    CHECK(t.sample_interval == doctest::Approx(0.004));
    REQUIRE(t.data.rows() == 37);
    REQUIRE(t.data.cols() == 5);
    CHECK(std::memcmp(t.data.data(), m.data(), sizeof(double) * m.size()) == 0);

    Image f = m.cast<float>().cast<double>();
    write_trace_matrix(tmp.path / "b.rfn", m, 0.002, Dtype::F32);
    TraceMatrix u = read_trace_matrix(tmp.path / "b.rfn");
    CHECK(u.dtype == Dtype::F32);
    CHECK(u.data == f);
    // a float payload survives a second trip unchanged
    write_trace_matrix(tmp.path / "c.rfn", u.data, 0.002, Dtype::F32);
    CHECK(read_trace_matrix(tmp.path / "c.rfn").data == f);
}

TEST_CASE("malformed trace files are rejected") {
    TempDir tmp;
    write_trace_matrix(tmp.path / "a.rfn", Image::Ones(4, 3), 0.004, Dtype::F32);
    fs::resize_file(tmp.path / "a.rfn", fs::file_size(tmp.path / "a.rfn") - 2);
    auto kind = [](const fs::path& p) {
        try {
            read_trace_matrix(p);
        } catch (const Error& e) {
            return e.kind();
        }
        FAIL("expected an error");
        return ErrorKind::Config;
    };
    CHECK(kind(tmp.path / "a.rfn") == ErrorKind::Io);
    {
        std::ofstream os(tmp.path / "bad.rfn", std::ios::binary);
        os << "NOTATRACEFILE___________________";
    }
    CHECK(kind(tmp.path / "bad.rfn") == ErrorKind::Io);
    CHECK(kind(tmp.path / "missing.rfn") == ErrorKind::Io);
}

TEST_CASE("config defaults and overrides") {
    ExperimentConfig c = parse_config(json::object());
    CHECK(c.dictionary.kind == "ricker");
    CHECK(c.rfn.lh == 11);
    CHECK(c.solver.name == "rfn-ita");

    ExperimentConfig d = parse_config(json::parse(R"({
        "dictionary": {"kind": "ricker", "f0_hz": 25, "q": "inf", "lx": 80},
        "rfn": {"kernel": "rectangular", "lh": 17, "taus": [0.4, 1]},
        "solver": {"betas": [0.98, 0.87], "max_iters": 6},
        "synth": {"p": 0.2, "j": 10, "seed": 4, "snr_db": 30, "noise_seed": 5},
        "output": {"dtype": "f64"}
    })"));
    CHECK(d.dictionary.omega0 == doctest::Approx(50 * std::numbers::pi));
    CHECK(d.dictionary.q.has_value());
    CHECK(std::isinf(*d.dictionary.q));
    CHECK(d.rfn.kernel == "rectangular");
    CHECK(d.solver.max_iters == 6);
    CHECK(*d.synth.seed == 4);
    CHECK(d.output.dtype == Dtype::F64);
    CHECK(parse_config(to_json(d)).solver.betas == d.solver.betas);
}

TEST_CASE("config errors name the offending key") {
    CHECK(config_error(json::parse(R"({"dictionary": {"omega": 3}})")) == ErrorKind::Config);
    CHECK(config_message(json::parse(R"({"dictionary": {"omega": 3}})")).find("omega") != std::string::npos);
    CHECK(config_error(json::parse(R"({"bogus": {}})")) == ErrorKind::Config);
    CHECK(config_error(json::parse(R"({"synth": {"j": 0}})")) == ErrorKind::Config);
    CHECK(config_error(json::parse(R"({"synth": {"snr_db": 20}})")) == ErrorKind::Config);
    CHECK(config_error(json::parse(R"({"rfn": {"lh": 10}})")) == ErrorKind::Config);
    CHECK(config_error(json::parse(R"({"dictionary": {"q": -5}})")) == ErrorKind::Config);
    CHECK(config_error(json::parse(R"({"solver": {"name": "nope"}})")) == ErrorKind::Config);
    CHECK(config_error(json::parse(R"({"solver": {"step": -1}})")) == ErrorKind::Config);
    CHECK(config_error(json::parse(R"({"rfn": {"lh": "eleven"}})")) == ErrorKind::Config);
}

TEST_CASE("synth requires a seed") {
    TempDir tmp;
    CommonOptions opt;
    opt.out = tmp.path / "run";
    std::ostringstream out, err;
    CHECK(cmd_synth(opt, out, err) == kExitUsage);
    CHECK(err.str().find("seed") != std::string::npos);
    opt.seed = 3;
    CHECK(cmd_synth(opt, out, err) == kExitOk);
    CHECK(fs::exists(tmp.path / "run" / "Y.rfn"));
    CHECK(fs::exists(tmp.path / "run" / "manifest.json"));
}

TEST_CASE("csv quoting") {
    CHECK(csv_field("plain") == "plain");
    CHECK(csv_field("a,b") == "\"a,b\"");
    CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(csv_row({"x", "y,z"}) == "x,\"y,z\"\r\n");
}

TEST_CASE("table csv layout") {
    std::vector<Table1Result> rows;
    for (const Table1Row& r : table1_rows()) {
        Table1Result t;
        t.row = r;
        t.rho = 0.9;
        t.m_it = 2.5;
        rows.push_back(t);
    }
    std::string csv = table1_csv(rows);
    std::istringstream is(csv);
    std::vector<std::string> lines;
    for (std::string l; std::getline(is, l);) lines.push_back(l);
    REQUIRE(lines.size() == 6);
    CHECK(lines[0] == "omega0,nu,beta1,beta2,L_h,sigma_h,rho1,rho,M_it\r");
    CHECK(lines[1].rfind("80pi,5,0.95,0.88,11,2,n/a,", 0) == 0);
    CHECK(lines[4].rfind("50pi,", 0) == 0);
    for (const auto& l : lines) CHECK(std::count(l.begin(), l.end(), ',') == 8);
}

TEST_CASE("infinite Q dictionary equals the time-invariant one") {
    TempDir tmp;
    CommonOptions opt;
    opt.out = tmp.path / "inf.rfn";
    std::ostringstream out, err;
    REQUIRE(cmd_qdict(opt, std::numeric_limits<double>::infinity(), out, err) == kExitOk);
    TraceMatrix q = read_trace_matrix(tmp.path / "inf.rfn");
    ConvDictionary d = make_dictionary(DictionarySpec{});
    Image ref = dense_matrix(d);
    REQUIRE(q.data.rows() == ref.rows());
    REQUIRE(q.data.cols() == ref.cols());
    CHECK((q.data - ref).cwiseAbs().maxCoeff() <= 1e-6);

    CHECK(cmd_qdict(opt, 0.0, out, err) == kExitUsage);
    CHECK(cmd_qdict(opt, -3.0, out, err) == kExitUsage);
    opt.out.reset();
    CHECK(cmd_qdict(opt, 100.0, out, err) == kExitUsage);
}

TEST_CASE("check exit codes") {
    TempDir tmp;
    Image x = Image::Zero(60, 2);
    x(10, 0) = 1.0;
    x(40, 1) = -2.0;
    write_trace_matrix(tmp.path / "sep.rfn", x, 0.004, Dtype::F64);
    x(12, 0) = 1.0;
    write_trace_matrix(tmp.path / "close.rfn", x, 0.004, Dtype::F64);
    CommonOptions opt;
    std::ostringstream out, err;
    CHECK(cmd_check(opt, tmp.path / "sep.rfn", 2, 0.0, 0.4, 1.0, out, err) == kExitOk);
    CHECK(cmd_check(opt, tmp.path / "close.rfn", 2, 0.0, 0.4, 1.0, out, err) == kExitDomain);
    CHECK(cmd_check(opt, tmp.path / "sep.rfn", 7, 0.0, 0.4, 1.0, out, err) == kExitUsage);
    CHECK(cmd_check(opt, tmp.path / "nothing.rfn", 2, 0.0, 0.4, 1.0, out, err) == kExitDomain);
    json j = json::parse(out.str().substr(0, out.str().find("\n}\n") + 2));
    CHECK(j["condition_holds"] == true);
}

TEST_CASE("thread resolution") {
    CHECK(resolve_threads(3) == 3);
    CHECK(resolve_threads(0) == 1);
}
