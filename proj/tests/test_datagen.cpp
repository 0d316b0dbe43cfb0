#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

#include "bhfl/datagen.hpp"
#include "bhfl/error.hpp"
#include "bhfl/random.hpp"
#include "doctest.h"

using namespace bhfl;

namespace {

struct Moments {
    double mean = 0, var = 0;
};

template <typename F>
Moments moments(F&& draw, std::size_t n) {
    double sum = 0, sq = 0;
    std::vector<double> xs(n);
    for (auto& x : xs) x = draw();
    for (double x : xs) sum += x;
    const double mean = sum / n;
    for (double x : xs) sq += (x - mean) * (x - mean);
    return {mean, sq / (n - 1)};
}

std::string tmp_file(const std::string& name, const std::string& contents) {
    std::filesystem::create_directories(BHFL_TEST_TMP);
    const std::string path = std::string(BHFL_TEST_TMP) + "/" + name;
    std::ofstream(path, std::ios::binary) << contents;
    return path;
}

std::vector<std::pair<std::vector<double>, double>> as_records(const Dataset& d) {
    std::vector<std::pair<std::vector<double>, double>> out;
    for (const auto& z : d.samples) out.emplace_back(z.x, z.y);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

TEST_CASE("centered lognormal noise moments") {
    Rng rng(1);
    const double sigma = 0.55848;
    const auto m = moments([&] { return sample_lognormal_centered(0.0, sigma, rng); }, 1'000'000);
    const double s2 = sigma * sigma;
    const double var = (std::exp(s2) - 1) * std::exp(s2);
    CHECK(std::fabs(m.mean) <= 0.003);
    CHECK(std::fabs(m.var - var) <= 0.02);
    CHECK(var == doctest::Approx(0.5).epsilon(1e-4));
    Rng r2(2);
    CHECK(sample_lognormal_centered(0.0, 1e-300, r2) == doctest::Approx(0.0));
}

TEST_CASE("centered pareto noise moments and support") {
    Rng rng(3);
    const double a = 3.26953;
    std::vector<double> xs(1'000'000);
    for (auto& x : xs) x = sample_pareto_centered(1.0, a, rng);
    const double mean_shift = a / (a - 1);
    const double var = a / ((a - 1) * (a - 1) * (a - 2));
    double sum = 0, sq = 0;
    for (double x : xs) sum += x;
    const double mean = sum / xs.size();
    for (double x : xs) sq += (x - mean) * (x - mean);
    CHECK(std::fabs(mean) <= 0.005);
    CHECK(std::fabs(sq / (xs.size() - 1) - var) <= 0.02);
    CHECK(var == doctest::Approx(0.5).epsilon(1e-4));
    CHECK(*std::min_element(xs.begin(), xs.end()) > -mean_shift);
    std::nth_element(xs.begin(), xs.begin() + xs.size() / 2, xs.end());
    CHECK(xs[xs.size() / 2] == doctest::Approx(std::pow(2.0, 1 / a) - mean_shift).epsilon(3e-3));

    NoiseSpec bad;
    bad.kind = NoiseKind::ParetoCentered;
    bad.shape = 2.0;
    CHECK_THROWS_AS(bad.validate(), Error);
    Rng r2(1);
    CHECK_THROWS_AS(sample_pareto_centered(1.0, 1.5, r2), Error);
}

TEST_CASE("noise spec variance matches the closed forms") {
    NoiseSpec ln;
    CHECK(ln.variance() == doctest::Approx(0.5).epsilon(1e-4));
    NoiseSpec p;
    p.kind = NoiseKind::ParetoCentered;
    CHECK(p.variance() == doctest::Approx(0.5).epsilon(1e-4));
    NoiseSpec none;
    none.kind = NoiseKind::None;
    CHECK(none.variance() == 0.0);
}

TEST_CASE("gen_linear is deterministic and noiseless data is identifiable") {
    SyntheticSpec spec;
    spec.dim = 4;
    spec.train_size = 60;
    spec.test_size = 10;
    spec.noise.kind = NoiseKind::None;
    const auto a = gen_linear(spec, 5);
    const auto b = gen_linear(spec, 5);
    REQUIRE(a.train.size() == 60);
    REQUIRE(a.test.size() == 10);
    CHECK(as_records(a.train) == as_records(b.train));
    CHECK(a.train.samples[0].x == b.train.samples[0].x);
    const auto c = gen_linear(spec, 6);
    CHECK(a.train.samples[0].x != c.train.samples[0].x);

    // Features are positive (uncentered lognormal).
    for (const auto& z : a.train.samples)
        for (double x : z.x) CHECK(x > 0.0);

    SyntheticSpec fixed = spec;
    fixed.w_star = {0.5, -0.5, 0.5, -0.5};
    const auto f = gen_linear(fixed, 5);
    const std::size_t d = 4;
    for (const auto& z : f.train.samples) {
        double dot = 0;
        for (std::size_t i = 0; i < d; ++i) dot += z.x[i] * fixed.w_star[i];
        CHECK(z.y == doctest::Approx(dot).epsilon(1e-12));
    }

    // Least squares via the normal equations and Gauss-Jordan elimination.
    std::vector<std::vector<double>> A(d, std::vector<double>(d + 1, 0.0));
    for (const auto& z : f.train.samples) {
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < d; ++j) A[i][j] += z.x[i] * z.x[j];
            A[i][d] += z.x[i] * z.y;
        }
    }
    for (std::size_t i = 0; i < d; ++i) {
        std::size_t piv = i;
        for (std::size_t r = i + 1; r < d; ++r)
            if (std::fabs(A[r][i]) > std::fabs(A[piv][i])) piv = r;
        std::swap(A[i], A[piv]);
        for (std::size_t r = 0; r < d; ++r) {
            if (r == i) continue;
            const double factor = A[r][i] / A[i][i];
            for (std::size_t c2 = i; c2 <= d; ++c2) A[r][c2] -= factor * A[i][c2];
        }
    }
    for (std::size_t i = 0; i < d; ++i) CHECK(std::fabs(A[i][d] / A[i][i] - fixed.w_star[i]) <= 1e-6);
}

TEST_CASE("gen_logistic labels") {
    SyntheticSpec spec;
    spec.rule = LabelRule::Sign;
    spec.dim = 3;
    spec.feature_sigma = 3.0;
    spec.noise.kind = NoiseKind::None;
    spec.w_star = {1.0, 0.0, 0.0};
    spec.train_size = 100;
    spec.test_size = 10;
    const auto tt = gen_logistic(spec, 1);
    for (const auto& z : tt.train.samples) CHECK(z.y == 1.0);

    SyntheticSpec zero = spec;
    zero.w_star = {0.0, 0.0, 0.0};
    zero.noise.kind = NoiseKind::LogNormalCentered;
    zero.train_size = 20000;
    const auto zz = gen_logistic(zero, 2);
    double pos = 0;
    for (const auto& z : zz.train.samples) {
        CHECK((z.y == 1.0 || z.y == -1.0));
        pos += z.y > 0;
    }
    // P(xi > 0) for centered LogNormal(0, sigma): P(L > e^{s^2/2}) = Phi(-sigma/2).
    const double p = 0.5 * std::erfc(0.55848 / 2 / std::sqrt(2.0));
    CHECK(pos / zz.train.size() == doctest::Approx(p).epsilon(0.03));
    const auto again = gen_logistic(zero, 2);
    CHECK(as_records(again.train) == as_records(zz.train));
}

TEST_CASE("unit sphere points") {
    Rng rng(4);
    for (int i = 0; i < 50; ++i) {
        const auto p = unit_sphere_point(7, rng);
        double n = 0;
        for (double x : p) n += x * x;
        CHECK(std::sqrt(n) == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("partition conserves records") {
    SyntheticSpec spec;
    spec.train_size = 1000;
    const auto tt = gen_linear(spec, 3);
    const auto shards = partition(tt.train, 10, 77);
    REQUIRE(shards.size() == 10);
    Dataset joined;
    for (const auto& s : shards) {
        CHECK(s.size() == 100);
        joined.samples.insert(joined.samples.end(), s.samples.begin(), s.samples.end());
    }
    CHECK(as_records(joined) == as_records(tt.train));
    const auto again = partition(tt.train, 10, 77);
    for (std::size_t i = 0; i < 10; ++i) CHECK(as_records(again[i]) == as_records(shards[i]));
    const auto single = partition(tt.train, 1, 77);
    CHECK(as_records(single[0]) == as_records(tt.train));
    CHECK_THROWS_AS(partition(tt.train, 7, 1), Error);
    try {
        partition(tt.train, 3, 1);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::IndivisibleSplit);
    }
}

TEST_CASE("csv loading") {
    const auto path = tmp_file("small.csv", "a,b,label\n1,2,3\n4,5.5,6\n-7,8e1,9\n");
    CsvSchema schema;
    schema.feature_columns = {"a", "b"};
    schema.label_column = "label";
    const auto d = load_csv(path, schema);
    REQUIRE(d.size() == 3);
    CHECK(d.samples[1].x == std::vector<double>{4.0, 5.5});
    CHECK(d.samples[2].x == std::vector<double>{-7.0, 80.0});
    CHECK(d.samples[2].y == 9.0);

    // Empty feature list means every non-label column.
    CsvSchema all;
    all.label_column = "a";
    const auto d2 = load_csv(path, all);
    CHECK(d2.samples[0].x == std::vector<double>{2.0, 3.0});
    CHECK(d2.samples[0].y == 1.0);

    CsvSchema bias = schema;
    bias.add_bias = true;
    CHECK(load_csv(path, bias).samples[0].x == std::vector<double>{1.0, 2.0, 1.0});

    CsvSchema missing = schema;
    missing.label_column = "nope";
    try {
        load_csv(path, missing);
        FAIL("expected MissingColumn");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::MissingColumn);
    }

    const auto bad = tmp_file("bad.csv", "a,b,label\n1,2,3\n4,x,6\n");
    try {
        load_csv(bad, schema);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.row() == 3);
        CHECK(e.column() == "b");
    }
    CHECK_THROWS_AS(load_csv(std::string(BHFL_TEST_TMP) + "/does_not_exist.csv", schema), Error);

    const auto quoted = tmp_file("quoted.csv", "\xEF\xBB\xBF\"a\",\"b, c\",label\r\n\"1\",2,3\r\n");
    CsvSchema q;
    q.feature_columns = {"a", "b, c"};
    q.label_column = "label";
    const auto d3 = load_csv(quoted, q);
    CHECK(d3.samples[0].x == std::vector<double>{1.0, 2.0});
}

TEST_CASE("standardization") {
    SyntheticSpec spec;
    spec.train_size = 500;
    auto d = gen_linear(spec, 8).train;
    const auto st = Standardizer::fit(d);
    st.apply(d);
    for (std::size_t k = 0; k < d.feature_dim(); ++k) {
        double mean = 0, var = 0;
        for (const auto& z : d.samples) mean += z.x[k];
        mean /= d.size();
        for (const auto& z : d.samples) var += (z.x[k] - mean) * (z.x[k] - mean);
        var /= d.size();
        CHECK(std::fabs(mean) <= 1e-9);
        CHECK(std::fabs(var - 1.0) <= 1e-9);
    }
    Dataset constant;
    for (int i = 0; i < 4; ++i) constant.samples.push_back({{2.0, double(i)}, 0.0});
    const auto sc = Standardizer::fit(constant);
    sc.apply(constant);
    for (const auto& z : constant.samples) CHECK(std::isfinite(z.x[0]));
}
