#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "mtscgan/data.hpp"

using namespace mtscgan;
using namespace mtscgan::data;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) : path("/tmp/" + name) {}
    ~TempFile() { std::remove(path.c_str()); }
};

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

const char* kSidecar2x3 =
    R"({"channels": 2, "timesteps": 3, "class_names": ["a", "b"]})";

}  // namespace

TEST_CASE("load_csv") {
    TempFile csv("mtscgan_t.csv"), side("mtscgan_t.json");
    write_file(side.path, kSidecar2x3);

    SUBCASE("one matching row gives a dataset of size 1") {
        write_file(csv.path, "1,0.5,1.5,2.5,3.5,4.5,5.5\n");
        Dataset ds = load_csv(csv.path, side.path);
        CHECK(ds.size() == 1);
        CHECK(ds.channels == 2);
        CHECK(ds.timesteps == 3);
        CHECK(ds.samples[0].class_id == 1);
        CHECK(ds.samples[0].values[0] == 0.5);
        CHECK(ds.samples[0].values[5] == 5.5);
    }
    SUBCASE("empty file is an error, not an empty dataset") {
        write_file(csv.path, "");
        CHECK_THROWS_AS(load_csv(csv.path, side.path), TensorError);
    }
    SUBCASE("arity mismatch names the row") {
        write_file(csv.path, "0,1,2,3,4,5,6\n0,1,2,3\n");
        try {
            load_csv(csv.path, side.path);
            FAIL("expected TensorError");
        } catch (const TensorError& e) {
            CHECK(std::string(e.what()).find("row 2") != std::string::npos);
        }
    }
    SUBCASE("unknown class id rejected") {
        write_file(csv.path, "7,1,2,3,4,5,6\n");
        CHECK_THROWS_AS(load_csv(csv.path, side.path), TensorError);
    }
    SUBCASE("non-numeric cell rejected with the row named") {
        write_file(csv.path, "0,1,2,oops,4,5,6\n");
        try {
            load_csv(csv.path, side.path);
            FAIL("expected TensorError");
        } catch (const TensorError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("oops") != std::string::npos);
            CHECK(msg.find("row 1") != std::string::npos);
        }
    }
    SUBCASE("keep_classes filters and remaps ids") {
        write_file(side.path,
                   R"({"channels": 1, "timesteps": 2,
                       "class_names": ["a", "b", "c"],
                       "keep_classes": ["c", "a"]})");
        write_file(csv.path, "0,1,2\n1,3,4\n2,5,6\n");
        Dataset ds = load_csv(csv.path, side.path);
        CHECK(ds.size() == 2);
        CHECK(ds.class_names == std::vector<std::string>{"c", "a"});
        CHECK(ds.samples[0].class_id == 1);  // "a"
        CHECK(ds.samples[1].class_id == 0);  // "c"
    }
    SUBCASE("missing sidecar field rejected") {
        write_file(side.path, R"({"channels": 2, "timesteps": 3})");
        write_file(csv.path, "0,1,2,3,4,5,6\n");
        CHECK_THROWS_AS(load_csv(csv.path, side.path), TensorError);
    }
}

TEST_CASE("save/load round trip is bit-exact") {
    TempFile csv("mtscgan_rt.csv"), side("mtscgan_rt.json");
    Dataset ds;
    ds.channels = 2;
    ds.timesteps = 2;
    ds.class_names = {"a", "b"};
    ds.samples = {{{0.1, -0.0, 1e-300, 3.141592653589793}, 0},
                  {{1.0 / 3.0, -2.5e17, 5e-324, -1e308}, 1}};
    save_csv(ds, csv.path, side.path);
    Dataset back = load_csv(csv.path, side.path);
    REQUIRE(back.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(back.samples[i].class_id == ds.samples[i].class_id);
        for (std::size_t j = 0; j < 4; ++j) {
            const double a = ds.samples[i].values[j];
            const double b = back.samples[i].values[j];
            CHECK(std::memcmp(&a, &b, sizeof a) == 0);
        }
    }
    SUBCASE("normalization stats survive the round trip") {
        ds.normalized = true;
        ds.mean = {0.25, -1.5};
        ds.stddev = {2.0, 0.125};
        save_csv(ds, csv.path, side.path);
        Dataset b2 = load_csv(csv.path, side.path);
        CHECK(b2.normalized);
        CHECK(b2.mean == ds.mean);
        CHECK(b2.stddev == ds.stddev);
    }
}

TEST_CASE("normalize") {
    Rng rng(20);
    Dataset ds;
    ds.channels = 2;
    ds.timesteps = 10;
    ds.class_names = {"a"};
    for (std::size_t i = 0; i < 8; ++i) {
        Sample s;
        s.class_id = 0;
        for (std::size_t j = 0; j < 20; ++j)
            s.values.push_back((j < 10 ? 5.0 : -3.0) + rng.normal());
        ds.samples.push_back(std::move(s));
    }
    std::vector<std::size_t> train{0, 1, 2, 3, 4, 5};

    SUBCASE("train split lands on mean 0, std 1") {
        Dataset n = normalize(ds, train);
        for (std::size_t c = 0; c < 2; ++c) {
            double m = 0.0, v = 0.0;
            for (std::size_t i : train)
                for (std::size_t t = 0; t < 10; ++t)
                    m += n.samples[i].values[c * 10 + t];
            m /= 60.0;
            for (std::size_t i : train)
                for (std::size_t t = 0; t < 10; ++t) {
                    const double d = n.samples[i].values[c * 10 + t] - m;
                    v += d * d;
                }
            CHECK(std::abs(m) < 1e-9);
            CHECK(std::abs(std::sqrt(v / 60.0) - 1.0) < 1e-6);
        }
    }
    SUBCASE("double application is forbidden") {
        Dataset n = normalize(ds, train);
        CHECK_THROWS_AS(normalize(n, train), TensorError);
    }
    SUBCASE("inverse recovers the original within 1e-10") {
        Dataset back = denormalize(normalize(ds, train));
        for (std::size_t i = 0; i < ds.size(); ++i)
            for (std::size_t j = 0; j < 20; ++j)
                CHECK(back.samples[i].values[j] ==
                      doctest::Approx(ds.samples[i].values[j]).epsilon(1e-10));
        CHECK_FALSE(back.normalized);
    }
    SUBCASE("zero-variance channel is named") {
        for (auto& s : ds.samples)
            for (std::size_t t = 0; t < 10; ++t) s.values[10 + t] = 42.0;
        try {
            normalize(ds, train);
            FAIL("expected TensorError");
        } catch (const TensorError& e) {
            CHECK(std::string(e.what()).find("channel 1") != std::string::npos);
        }
    }
}

namespace {

Dataset balanced_dataset(std::size_t n_classes, std::size_t per_class) {
    Dataset ds;
    ds.channels = 1;
    ds.timesteps = 2;
    for (std::size_t c = 0; c < n_classes; ++c)
        ds.class_names.push_back("c" + std::to_string(c));
    for (std::size_t c = 0; c < n_classes; ++c)
        for (std::size_t i = 0; i < per_class; ++i)
            ds.samples.push_back({{0.0, 1.0}, c});
    return ds;
}

}  // namespace

TEST_CASE("make_split") {
    SUBCASE("(0.7, 0.15, 0.15) on 100 gives (70, 15, 15)") {
        Dataset ds = balanced_dataset(1, 100);
        SplitSpec spec;
        spec.seed = 1;
        Split s = make_split(ds, spec);
        CHECK(s.train.size() == 70);
        CHECK(s.val.size() == 15);
        CHECK(s.test.size() == 15);
    }
    SUBCASE("same seed gives identical membership") {
        Dataset ds = balanced_dataset(2, 40);
        SplitSpec spec;
        spec.seed = 7;
        Split a = make_split(ds, spec);
        Split b = make_split(ds, spec);
        CHECK(a.train == b.train);
        CHECK(a.val == b.val);
        CHECK(a.test == b.test);
    }
    SUBCASE("splits partition the index set") {
        Dataset ds = balanced_dataset(3, 33);
        SplitSpec spec;
        spec.seed = 3;
        Split s = make_split(ds, spec);
        std::vector<bool> seen(ds.size(), false);
        for (const auto* part : {&s.train, &s.val, &s.test})
            for (std::size_t i : *part) {
                CHECK_FALSE(seen[i]);
                seen[i] = true;
            }
        for (bool b : seen) CHECK(b);
    }
    SUBCASE("stratified proportions within 1 sample of the fractions") {
        Dataset ds = balanced_dataset(3, 100);
        SplitSpec spec;
        spec.seed = 5;
        Split s = make_split(ds, spec);
        for (std::size_t c = 0; c < 3; ++c) {
            std::size_t tr = 0, va = 0, te = 0;
            for (std::size_t i : s.train) tr += ds.samples[i].class_id == c;
            for (std::size_t i : s.val) va += ds.samples[i].class_id == c;
            for (std::size_t i : s.test) te += ds.samples[i].class_id == c;
            CHECK(std::abs(static_cast<double>(tr) - 70.0) <= 1.0);
            CHECK(std::abs(static_cast<double>(va) - 15.0) <= 1.0);
            CHECK(std::abs(static_cast<double>(te) - 15.0) <= 1.0);
        }
    }
    SUBCASE("class smaller than the number of splits rejected") {
        Dataset ds = balanced_dataset(2, 40);
        ds.class_names.push_back("tiny");
        ds.samples.push_back({{0.0, 1.0}, 2});
        ds.samples.push_back({{0.0, 1.0}, 2});
        SplitSpec spec;
        CHECK_THROWS_AS(make_split(ds, spec), TensorError);
    }
    SUBCASE("bad fractions rejected") {
        Dataset ds = balanced_dataset(1, 10);
        SplitSpec spec;
        spec.train = 0.5;
        CHECK_THROWS_AS(make_split(ds, spec), TensorError);
    }
}

TEST_CASE("make_condition_categorical") {
    CHECK(make_condition_categorical(1, 3) ==
          std::vector<double>{0.0, 1.0, 0.0});
    CHECK(make_condition_categorical(0, 1) == std::vector<double>{1.0});
    CHECK_THROWS_AS(make_condition_categorical(3, 3), TensorError);
}

TEST_CASE("make_condition_series") {
    Dataset ds;
    ds.channels = 3;
    ds.timesteps = 4;
    ds.class_names = {"a"};
    Sample s;
    s.class_id = 0;
    for (std::size_t j = 0; j < 12; ++j)
        s.values.push_back(static_cast<double>(j));
    ds.samples.push_back(std::move(s));

    SUBCASE("cond {0,1}, target {2}") {
        auto [cond, target] = make_condition_series(ds, 0, {0, 1}, {2});
        CHECK(cond.shape() == Shape{2, 4});
        CHECK(target.shape() == Shape{1, 4});
        CHECK(cond.data()[0] == 0.0);
        CHECK(cond.data()[7] == 7.0);
        CHECK(target.data()[0] == 8.0);
        CHECK(target.data()[3] == 11.0);
    }
    SUBCASE("overlapping channel sets rejected") {
        CHECK_THROWS_AS(make_condition_series(ds, 0, {0}, {0}), TensorError);
    }
    SUBCASE("empty condition set rejected") {
        CHECK_THROWS_AS(make_condition_series(ds, 0, {}, {0, 1, 2}),
                        TensorError);
    }
    SUBCASE("out-of-range channel rejected") {
        CHECK_THROWS_AS(make_condition_series(ds, 0, {0}, {3}), TensorError);
    }
}

TEST_CASE("generate_synthetic") {
    SUBCASE("3 classes x 200 samples gives a dataset of 600") {
        SyntheticSpec spec = default_synthetic();
        spec.per_class = 200;
        Dataset ds = generate_synthetic(spec);
        CHECK(ds.size() == 600);
        CHECK(ds.n_classes() == 3);
        CHECK(ds.class_counts() == std::vector<std::size_t>{200, 200, 200});
    }
    SUBCASE("deterministic per seed") {
        SyntheticSpec spec = default_synthetic();
        spec.per_class = 3;
        Dataset a = generate_synthetic(spec);
        Dataset b = generate_synthetic(spec);
        for (std::size_t i = 0; i < a.size(); ++i)
            CHECK(a.samples[i].values == b.samples[i].values);
    }
    SUBCASE("noise-free single harmonic is an exact sinusoid") {
        SyntheticSpec spec;
        spec.classes = {{3.0, {1.0}, 0.0}};
        spec.channels = 1;
        spec.timesteps = 64;
        spec.per_class = 4;
        spec.warp_low = spec.warp_high = 1.0;
        Dataset ds = generate_synthetic(spec);
        // least-squares fit of a*sin + b*cos at the known frequency
        const double two_pi = 2.0 * 3.14159265358979323846;
        for (const auto& s : ds.samples) {
            double ss = 0.0, cc = 0.0, sc = 0.0, xs = 0.0, xc = 0.0;
            for (std::size_t t = 0; t < 64; ++t) {
                const double ang = two_pi * 3.0 * t / 64.0;
                const double sn = std::sin(ang), cs = std::cos(ang);
                ss += sn * sn;
                cc += cs * cs;
                sc += sn * cs;
                xs += s.values[t] * sn;
                xc += s.values[t] * cs;
            }
            const double det = ss * cc - sc * sc;
            const double a = (xs * cc - xc * sc) / det;
            const double b = (xc * ss - xs * sc) / det;
            double resid = 0.0;
            for (std::size_t t = 0; t < 64; ++t) {
                const double ang = two_pi * 3.0 * t / 64.0;
                const double d =
                    s.values[t] - a * std::sin(ang) - b * std::cos(ang);
                resid += d * d;
            }
            CHECK(resid < 1e-10);
        }
    }
    SUBCASE("2 Hz vs 5 Hz classes separate perfectly by dominant frequency") {
        SyntheticSpec spec;
        spec.classes = {{2.0, {1.0}, 0.1}, {5.0, {1.0}, 0.1}};
        spec.channels = 1;
        spec.timesteps = 150;
        spec.per_class = 50;
        Dataset ds = generate_synthetic(spec);
        for (const auto& s : ds.samples) {
            const std::size_t f = dominant_frequency(
                std::span<const double>(s.values.data(), 150));
            const std::size_t predicted = f < 4 ? 0 : 1;
            CHECK(predicted == s.class_id);
        }
    }
    SUBCASE("duplicate base frequencies rejected") {
        SyntheticSpec spec;
        spec.classes = {{2.0, {1.0}, 0.1}, {2.0, {1.0}, 0.1}};
        CHECK_THROWS_AS(generate_synthetic(spec), TensorError);
    }
}

TEST_CASE("dominant_frequency finds the bin of a pure tone") {
    const double two_pi = 2.0 * 3.14159265358979323846;
    for (std::size_t k : {1, 3, 7, 20}) {
        std::vector<double> x(128);
        for (std::size_t t = 0; t < 128; ++t)
            x[t] = std::sin(two_pi * static_cast<double>(k) * t / 128.0 + 0.3);
        CHECK(dominant_frequency(x) == k);
    }
}

TEST_CASE("batch_tensor stacks channel-major samples") {
    Dataset ds;
    ds.channels = 2;
    ds.timesteps = 3;
    ds.class_names = {"a"};
    ds.samples = {{{0, 1, 2, 3, 4, 5}, 0}, {{6, 7, 8, 9, 10, 11}, 0}};
    std::vector<std::size_t> idx{1, 0};
    Tensor b = batch_tensor(ds, idx);
    CHECK(b.shape() == Shape{2, 2, 3});
    CHECK(b.data()[0] == 6.0);
    CHECK(b.data()[6] == 0.0);
}
