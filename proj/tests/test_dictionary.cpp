#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "rfncsc/dictionary.hpp"

using namespace rfncsc;
using std::numbers::pi;

namespace {

double ricker_at(double w0, double t) {
    double a = w0 * w0 * t * t;
    return (1.0 - 0.5 * a) * std::exp(-0.25 * a);
}

// Toeplitz construction written from the index formula D(k, p*lx + l) = f_p[k - l].
Eigen::MatrixXd toeplitz_oracle(const std::vector<Vec>& filters, Index lx) {
    Index ld = 0;
    for (const auto& f : filters) ld = std::max(ld, f.size());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(lx + ld - 1, static_cast<Index>(filters.size()) * lx);
    for (std::size_t p = 0; p < filters.size(); ++p)
        for (Index k = 0; k < m.rows(); ++k)
            for (Index l = 0; l < lx; ++l) {
                Index t = k - l;
                if (t >= 0 && t < filters[p].size()) m(k, p * lx + l) = filters[p][t];
            }
    return m;
}

Vec random_vec(Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Vec v(n);
    for (Index i = 0; i < n; ++i) v[i] = g(rng);
    return v;
}

// Naive DFT evaluation of the attenuated pulse on the same zero-padded grid.
Vec q_pulse_oracle(const Wavelet& src, double q, double w0, double tn, Index out_len) {
    using cplx = std::complex<double>;
    Index n = 1;
    while (n < 8 * std::max(out_len, src.length())) n <<= 1;
    const double ts = src.sample_interval;
    const double gamma = 2.0 / pi * std::atan(1.0 / (2.0 * q));
    std::vector<cplx> spec(n);
    for (Index f = 0; f < n; ++f) {
        cplx acc = 0.0;
        for (Index k = 0; k < src.length(); ++k) {
            double t = static_cast<double>(k - src.center);
            acc += src.samples[k] * std::exp(cplx(0.0, -2.0 * pi * static_cast<double>(f) * t / static_cast<double>(n)));
        }
        Index fi = f <= n / 2 ? f : f - n;
        if (fi != 0) {
            double w = 2.0 * pi * std::abs(static_cast<double>(fi)) / (static_cast<double>(n) * ts);
            double r = std::pow(w / w0, -gamma);
            cplx a = std::exp(cplx(-r * w * tn / (2.0 * q), w * tn * (1.0 - r)));
            acc *= fi > 0 ? a : std::conj(a);
        }
        spec[f] = acc;
    }
    Vec out(out_len);
    Index half = (out_len - 1) / 2;
    for (Index k = -half; k <= half; ++k) {
        cplx acc = 0.0;
        for (Index f = 0; f < n; ++f)
            acc += spec[f] * std::exp(cplx(0.0, 2.0 * pi * static_cast<double>(f * k) / static_cast<double>(n)));
        out[k + half] = acc.real() / static_cast<double>(n);
    }
    return out;
}

double power_centroid(const Vec& x, double ts) {
    const Index n = 4096;
    double num = 0.0, den = 0.0;
    for (Index f = 1; f < n / 2; ++f) {
        std::complex<double> acc = 0.0;
        for (Index k = 0; k < x.size(); ++k)
            acc += x[k] * std::exp(std::complex<double>(0.0, -2.0 * pi * static_cast<double>(f * k) / n));
        double w = 2.0 * pi * static_cast<double>(f) / (n * ts);
        num += w * std::norm(acc);
        den += std::norm(acc);
    }
    return num / den;
}

}  // namespace

TEST_CASE("ricker samples follow the closed form") {
    Wavelet w = make_ricker(80 * pi, 0.004);
    CHECK(w.samples[w.center] == 1.0);
    CHECK(w.samples[w.center + 1] == doctest::Approx(0.4947 * 0.7767).epsilon(1e-3));
    CHECK(w.samples[w.center + 1] == doctest::Approx(ricker_at(80 * pi, 0.004)).epsilon(1e-14));
    CHECK(ricker_at(80 * pi, std::sqrt(2.0) / (80 * pi)) == doctest::Approx(0.0));
    for (Index k = 1; k <= w.center; ++k) CHECK(w.samples[w.center + k] == w.samples[w.center - k]);
    CHECK(w.length() == 11);
    CHECK(make_ricker(50 * pi, 0.004).length() == 17);
}

TEST_CASE("default truncation keeps almost all ricker energy") {
    for (double w0 : {50 * pi, 80 * pi, 2 * pi * 35}) {
        Wavelet w = make_ricker(w0, 0.004);
        Wavelet wide = make_ricker(w0, 0.004, 4 * w.center);
        CHECK(w.samples.squaredNorm() >= 0.999 * wide.samples.squaredNorm());
    }
}

TEST_CASE("ricker rejects bad parameters") {
    CHECK_THROWS_AS(make_ricker(0.0, 0.004), Error);
    CHECK_THROWS_AS(make_ricker(80 * pi, -1.0), Error);
    try {
        make_ricker(-1.0, 0.004);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidParameter);
    }
}

TEST_CASE("gamma approaches 1/(pi Q)") {
    for (double q : {10.0, 50.0, 200.0, 1000.0}) {
        QModelParams p{q, 80 * pi, 0.004};
        CHECK(std::abs(p.gamma() - 1.0 / (pi * q)) < 1e-3 * p.gamma());
    }
    CHECK(QModelParams{}.gamma() == 0.0);
}

TEST_CASE("impulse dictionary is the identity") {
    ConvDictionary d = build_dictionary({make_impulse(0.004)}, 7);
    CHECK(d.ly == 7);
    CHECK(dense_matrix(d).isApprox(Eigen::MatrixXd::Identity(7, 7)));
    std::mt19937_64 rng(5);
    Vec r = random_vec(7, rng);
    CHECK(adjoint_apply(d, r) == r);
    CHECK(mutual_coherence(d) == 0.0);
}

TEST_CASE("two-filter dictionary matches the toeplitz oracle") {
    Wavelet a = make_ricker(80 * pi, 0.004);
    Vec bs(5);
    bs << 0.3, -1.0, 2.0, 0.5, -0.2;
    Wavelet b = make_filter(bs, 0.004);
    ConvDictionary d = build_dictionary({a, b}, 10);
    CHECK(d.atoms() == 20);
    CHECK(d.ly == 10 + 11 - 1);
    // Shorter filters sit at the top of the common window.
    Vec bpad = Vec::Zero(11);
    bpad.head(5) = bs;
    Eigen::MatrixXd oracle = toeplitz_oracle({a.samples, bpad}, 10);
    for (Index i = 0; i < d.atoms(); ++i) {
        Vec e = Vec::Zero(d.atoms());
        e[i] = 1.0;
        CHECK((apply_dictionary(d, e) - oracle.col(i)).norm() == 0.0);
    }
    CHECK(d.atom_norms[3] == doctest::Approx(a.samples.norm()));
    CHECK(d.atom_norms[13] == doctest::Approx(bs.norm()));
}

TEST_CASE("apply and adjoint agree with dense products") {
    std::mt19937_64 rng(11);
    ConvDictionary d = build_dictionary({make_ricker(80 * pi, 0.004)}, 60);
    Eigen::MatrixXd oracle = toeplitz_oracle({d.filters[0].samples}, 60);
    for (int t = 0; t < 20; ++t) {
        Vec x = Vec::Zero(60);
        for (int k = 0; k < 6; ++k) x[rng() % 60] = random_vec(1, rng)[0];
        Vec y = apply_dictionary(d, x);
        Vec yo = oracle * x;
        CHECK((y - yo).norm() <= 1e-12 * yo.norm());
        Vec r = random_vec(d.ly, rng);
        Vec z = adjoint_apply(d, r);
        Vec zo = oracle.transpose() * r;
        CHECK((z - zo).norm() <= 1e-12 * zo.norm());
    }
    CHECK(apply_dictionary(d, Vec::Zero(60)).isZero(0.0));
    CHECK_THROWS_AS(apply_dictionary(d, Vec::Zero(59)), Error);
    CHECK_THROWS_AS(adjoint_apply(d, Vec::Zero(3)), Error);
}

TEST_CASE("adjoint of a column returns its squared norm") {
    ConvDictionary d = build_dictionary({make_ricker(50 * pi, 0.004)}, 30);
    Vec e = Vec::Zero(30);
    e[12] = 1.0;
    Vec z = adjoint_apply(d, apply_dictionary(d, e));
    CHECK(z[12] == doctest::Approx(d.atom_norms[12] * d.atom_norms[12]).epsilon(1e-14));
}

TEST_CASE("adjointness holds for random pairs") {
    std::mt19937_64 rng(3);
    std::vector<ConvDictionary> ds{
        build_dictionary({make_ricker(80 * pi, 0.004), make_ricker(50 * pi, 0.004)}, 25),
        build_q_dictionary(make_ricker(80 * pi, 0.004), {100.0, 80 * pi, 0.004}, 40)};
    for (const auto& d : ds)
        for (int t = 0; t < 25; ++t) {
            Vec x = random_vec(d.atoms(), rng), r = random_vec(d.ly, rng);
            double lhs = apply_dictionary(d, x).dot(r), rhs = x.dot(adjoint_apply(d, r));
            CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(lhs)));
        }
}

TEST_CASE("ricker coherence matches the published values") {
    double mu50 = mutual_coherence(build_dictionary({make_ricker(50 * pi, 0.004)}, 60));
    double mu80 = mutual_coherence(build_dictionary({make_ricker(80 * pi, 0.004)}, 60));
    CHECK(std::abs(mu50 - 0.764) <= 0.02);
    CHECK(std::abs(mu80 - 0.585) <= 0.02);
}

TEST_CASE("coherence agrees with the dense gram oracle") {
    Vec bs(4);
    bs << 1.0, -0.5, 0.25, 2.0;
    ConvDictionary d = build_dictionary({make_ricker(80 * pi, 0.004), make_filter(bs, 0.004)}, 15);
    Eigen::MatrixXd m = dense_matrix(d);
    double mu = 0.0;
    for (Index i = 0; i < m.cols(); ++i)
        for (Index j = 0; j < m.cols(); ++j)
            if (i != j) mu = std::max(mu, std::abs(m.col(i).dot(m.col(j))) / (m.col(i).norm() * m.col(j).norm()));
    CHECK(mutual_coherence(d) == doctest::Approx(mu).epsilon(1e-12));
    CHECK(mutual_coherence(d) >= 0.0);
    CHECK(mutual_coherence(d) <= 1.0);
}

TEST_CASE("coherence ignores global rescaling") {
    Wavelet w = make_ricker(60 * pi, 0.004);
    double mu = mutual_coherence(build_dictionary({w}, 40));
    w.samples *= 37.5;
    CHECK(mutual_coherence(build_dictionary({w}, 40)) == doctest::Approx(mu).epsilon(1e-13));
}

TEST_CASE("zero atom is degenerate") {
    ConvDictionary d = build_dictionary({make_filter(Vec::Zero(3), 0.004)}, 5);
    try {
        mutual_coherence(d);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DegenerateAtom);
    }
    CHECK_THROWS_AS(build_dictionary({}, 5), Error);
}

TEST_CASE("q pulse limits") {
    Wavelet src = make_ricker(80 * pi, 0.004);
    QModelParams lossless{std::numeric_limits<double>::infinity(), 80 * pi, 0.004};
    Wavelet u = make_q_pulse(src, lossless, 0.6, 11);
    CHECK((u.samples - src.samples).norm() <= 1e-6 * src.samples.norm());

    QModelParams q200{200.0, 80 * pi, 0.004};
    Wavelet z = make_q_pulse(src, q200, 0.0, 11);
    CHECK(z.samples == src.samples);
    CHECK_THROWS_AS(make_q_pulse(src, q200, 0.1, 10), Error);
    CHECK_THROWS_AS(make_q_pulse(src, q200, -0.1, 11), Error);
}

TEST_CASE("q pulse matches the naive transform and loses energy") {
    Wavelet src = make_ricker(80 * pi, 0.004);
    QModelParams q200{200.0, 80 * pi, 0.004};
    Wavelet u = make_q_pulse(src, q200, 0.6, 41);
    CHECK_FALSE(u.truncated);
    Vec oracle = q_pulse_oracle(src, 200.0, 80 * pi, 0.6, 41);
    CHECK((u.samples - oracle).norm() <= 1e-10 * oracle.norm());
    CHECK(u.samples.norm() < src.samples.norm());
    CHECK(power_centroid(u.samples, 0.004) < 80 * pi);
    CHECK(power_centroid(u.samples, 0.004) < power_centroid(src.samples, 0.004));
}

TEST_CASE("short q window is flagged") {
    Wavelet src = make_ricker(80 * pi, 0.004);
    Wavelet u = make_q_pulse(src, {30.0, 80 * pi, 0.004}, 1.0, 3);
    CHECK(u.truncated);
}

TEST_CASE("q dictionary structure") {
    Wavelet src = make_ricker(80 * pi, 0.004);
    ConvDictionary d = build_q_dictionary(src, {200.0, 80 * pi, 0.004}, 60);
    CHECK(d.kind == DictKind::TimeVariantQ);
    CHECK(d.atoms() == 60);
    for (Index n = 1; n < 60; ++n) CHECK(d.atom_norms[n] <= d.atom_norms[n - 1]);
    for (const auto& f : d.filters) CHECK_FALSE(f.truncated);
    // column n starts at row n
    for (Index n = 0; n < 60; ++n) {
        CHECK(d.dense.col(n).head(n).isZero(0.0));
        CHECK(d.dense.col(n).segment(n, d.ld) == d.filters[n].samples);
    }
}

TEST_CASE("lossless q dictionary equals the time-invariant one") {
    Wavelet src = make_ricker(80 * pi, 0.004);
    ConvDictionary q = build_q_dictionary(src, {std::numeric_limits<double>::infinity(), 80 * pi, 0.004}, 50);
    ConvDictionary t = build_dictionary({src}, 50);
    REQUIRE(q.ly == t.ly);
    CHECK((dense_matrix(q) - dense_matrix(t)).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("field-scale q dictionary builds untruncated") {
    ConvDictionary d = build_q_dictionary(make_ricker(80 * pi, 0.004), {200.0, 80 * pi, 0.004}, 300);
    CHECK(d.atoms() == 300);
    for (const auto& f : d.filters) CHECK_FALSE(f.truncated);
}
