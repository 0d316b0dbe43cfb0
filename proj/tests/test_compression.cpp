#include <cmath>
#include <random>

#include "bhfl/compression.hpp"
#include "bhfl/error.hpp"
#include "doctest.h"

using namespace bhfl;

namespace {

double sq_err(const ParamVector& a, const ParamVector& b) {
    double s = 0;
    for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
    return s;
}

double sq_norm(const ParamVector& a) {
    double s = 0;
    for (double x : a) s += x * x;
    return s;
}

}  // namespace

TEST_CASE("top-k by hand") {
    const ParamVector x = {3.0, -1.0, 2.0};
    const auto msg = compress(CompressorSpec::top_k(2), x);
    CHECK(decompress(msg) == ParamVector{3.0, 0.0, 2.0});
    CHECK(msg.indices == std::vector<std::uint32_t>{0, 2});
    CHECK(msg.nominal_bytes() == 24);
    // Ties go to the lowest index.
    CHECK(decompress(compress(CompressorSpec::top_k(2), ParamVector{1.0, -1.0, 1.0, 1.0})) ==
          ParamVector{1.0, -1.0, 0.0, 0.0});
    CHECK(decompress(compress(CompressorSpec::top_k(3), x)) == x);
    CHECK_THROWS_AS(compress(CompressorSpec::top_k(4), x), Error);
    CHECK_THROWS_AS(compress(CompressorSpec::top_k(0), x), Error);
}

TEST_CASE("identity and l1 quantization") {
    const ParamVector x = {0.1, -2.0, 1e-300, 7.5};
    const auto id = compress(CompressorSpec::identity(), x);
    CHECK(decompress(id) == x);
    CHECK(effective_delta(CompressorSpec::identity(), x) == 1.0);

    const ParamVector alt = {1.0, -1.0, 1.0, -1.0};
    const auto q = compress(CompressorSpec::l1_quant(), alt);
    CHECK(q.scale == 1.0);
    CHECK(decompress(q) == alt);
    CHECK(decompress(compress(CompressorSpec::l1_quant(), ParamVector{0.0, -3.0}))[0] == 1.5);

    const auto qx = decompress(compress(CompressorSpec::l1_quant(), x));
    double l1 = 0;
    for (double v : x) l1 += std::fabs(v);
    CHECK(std::sqrt(sq_norm(qx)) == doctest::Approx(std::sqrt(4.0) * l1 / 4.0).epsilon(1e-15));
    CHECK(effective_delta(CompressorSpec::l1_quant(), x) ==
          doctest::Approx(l1 * l1 / (4.0 * sq_norm(x))).epsilon(1e-12));
    CHECK(effective_delta(CompressorSpec::top_k(1), ParamVector(5, 0.0)) == 1.0);
}

TEST_CASE("byte accounting") {
    const ParamVector x(10, 1.0);
    CHECK(compress(CompressorSpec::identity(), x).nominal_bytes() == 80);
    CHECK(compress(CompressorSpec::top_k(5), x).nominal_bytes() == 60);
    CHECK(compress(CompressorSpec::top_k(5), x).payload_bytes() == 40);
    CHECK(compress(CompressorSpec::identity(), x).payload_bytes() == 80);
    CHECK(compress(CompressorSpec::l1_quant(), ParamVector(16, 1.0)).nominal_bytes() == 10);
    CHECK(nominal_bytes(CompressedMessage::dense(x)) == 80);
    const auto r = compress(CompressorSpec::rand_k(0.5), ParamVector(100, 1.0), 3);
    CHECK(r.nominal_bytes() == 12 * r.indices.size());
}

TEST_CASE("top-k and l1quant meet their declared delta on every instance") {
    std::mt19937_64 gen(1);
    std::student_t_distribution<double> heavy(1.5);
    for (int t = 0; t < 1000; ++t) {
        const std::size_t d = 1 + gen() % 40;
        ParamVector x(d);
        for (double& v : x) v = heavy(gen);
        const std::size_t k = 1 + gen() % d;
        const auto tk = CompressorSpec::top_k(k);
        const auto lq = CompressorSpec::l1_quant();
        CHECK(tk.declared_delta(d) == doctest::Approx(double(k) / d));
        CHECK(lq.declared_delta(d) == doctest::Approx(1.0 / d));
        const double nx = sq_norm(x);
        CHECK(sq_err(decompress(compress(tk, x)), x) <= (1 - double(k) / d) * nx * (1 + 1e-12) + 1e-300);
        CHECK(sq_err(decompress(compress(lq, x)), x) <= (1 - 1.0 / d) * nx * (1 + 1e-12) + 1e-300);
        CHECK(effective_delta(tk, x) >= double(k) / d - 1e-12);
    }
}

TEST_CASE("rand-k holds in expectation and is seeded") {
    const ParamVector x = {1.0, -2.0, 3.0, 0.5, -0.25, 4.0, 1.0, -1.0};
    const double p = 0.3;
    const auto spec = CompressorSpec::rand_k(p);
    double acc = 0;
    for (std::uint64_t t = 0; t < 1000; ++t) acc += sq_err(decompress(compress(spec, x, t)), x);
    CHECK(acc / 1000 <= (1 - p) * sq_norm(x) * (1 + 3 / std::sqrt(1000.0)));
    CHECK(decompress(compress(spec, x, 17)) == decompress(compress(spec, x, 17)));
    for (double v : decompress(compress(spec, x, 5))) CHECK((v == 0.0 || std::find(x.begin(), x.end(), v) != x.end()));
    CHECK_THROWS_AS(compress(CompressorSpec::rand_k(0.0), x), Error);
    CHECK_THROWS_AS(compress(CompressorSpec::rand_k(1.5), x), Error);
    CHECK(decompress(compress(CompressorSpec::rand_k(1.0), x, 9)) == x);
}

TEST_CASE("compressor names and malformed messages") {
    CHECK(to_string(CompressorSpec::top_k(5)) == "topk:5");
    CHECK(to_string(CompressorSpec::identity()) == "identity");
    CompressedMessage bad;
    bad.kind = CompressorKind::TopK;
    bad.dim = 3;
    bad.indices = {5};
    bad.values = {1.0};
    CHECK_THROWS_AS(decompress(bad), Error);
}
