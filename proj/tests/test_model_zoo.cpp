#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "esim/model_zoo.hpp"

using namespace esim;

namespace {

ModelZoo tiny_zoo() {
    return ModelZoo({{"a", "model-a", 100, 0.70, 40.0, 8},
                     {"b", "model-b", 200, 0.75, 80.0, 4},
                     {"c", "model-c", 400, 0.80, 160.0, 2}});
}

std::string write_temp(const std::string& name, const std::string& content) {
    auto path = (std::filesystem::temp_directory_path() / name).string();
    std::ofstream out(path, std::ios::binary);
    out << content;
    return path;
}

}  // namespace

TEST_CASE("zoo CSV parses the bundled image-classification catalog") {
    ModelZoo zoo = ModelZoo::from_csv(std::string(ESIM_DATA_DIR) + "/imagenet_zoo.csv");
    CHECK(zoo.size() == 11);
    int i = zoo.index_of("mobilenet_v1");
    REQUIRE(i >= 0);
    CHECK(zoo.profile(i).top1_accuracy == doctest::Approx(0.7040));
    CHECK(zoo.profile(i).service_latency_ms == doctest::Approx(43.45));
    CHECK(zoo.profile(i).base_packing_factor == 10);
    int j = zoo.index_of("nasnet_large");
    REQUIRE(j >= 0);
    CHECK(zoo.profile(j).service_latency_ms == doctest::Approx(311.0));
    CHECK(zoo.index_of("does_not_exist") == -1);
}

TEST_CASE("zoo validation rejects malformed profiles") {
    CHECK_THROWS_AS(ModelZoo({{"a", "a", 1, 1.2, 10, 1}}), ConfigError);   // accuracy > 1
    CHECK_THROWS_AS(ModelZoo({{"a", "a", 1, 0.0, 10, 1}}), ConfigError);   // accuracy 0
    CHECK_THROWS_AS(ModelZoo({{"a", "a", 1, 0.7, 0.0, 1}}), ConfigError);  // zero latency
    CHECK_THROWS_AS(ModelZoo({{"a", "a", 1, 0.7, 10, 0}}), ConfigError);   // pf < 1
    CHECK_THROWS_AS(ModelZoo({{"", "a", 1, 0.7, 10, 1}}), ConfigError);    // empty id
    CHECK_THROWS_AS(ModelZoo({{"a", "a", 1, 0.7, 10, 1}, {"a", "b", 1, 0.7, 10, 1}}),
                    ConfigError);  // duplicate id
}

TEST_CASE("zoo CSV rejects wrong field counts") {
    auto path = write_temp("esim_bad_zoo.csv",
                           "model_id,name,params_10k,top1,latency_ms,pf\nx,y,1,0.7,10\n");
    CHECK_THROWS_AS(ModelZoo::from_csv(path), ParseError);
    std::remove(path.c_str());
}

TEST_CASE("flat class matrix replicates top-1 accuracy") {
    ModelZoo zoo = tiny_zoo();
    auto mat = ClassAccuracyMatrix::flat(zoo, 5);
    CHECK(mat.num_classes == 5);
    for (int c = 0; c < 5; ++c) CHECK(mat.at(1, c) == doctest::Approx(0.75));
    CHECK_NOTHROW(mat.validate(zoo));
}

TEST_CASE("synthesized matrix keeps row means and honors the spread bound") {
    ModelZoo zoo = tiny_zoo();
    auto mat = synthesize_class_matrix(zoo, 20, 0.03, 99);
    CHECK_NOTHROW(mat.validate(zoo));
    for (size_t m = 0; m < zoo.size(); ++m) {
        double top1 = zoo.profile(static_cast<int>(m)).top1_accuracy;
        double sum = 0;
        bool varied = false;
        for (int c = 0; c < 20; ++c) {
            double v = mat.at(static_cast<int>(m), c);
            CHECK(std::abs(v - top1) <= 0.03 + 1e-9);
            sum += v;
            if (std::abs(v - top1) > 1e-12) varied = true;
        }
        CHECK(std::abs(sum / 20 - top1) <= 0.005);
        CHECK(varied);
    }
}

TEST_CASE("synthesized matrix is a pure function of the seed") {
    ModelZoo zoo = tiny_zoo();
    auto m1 = synthesize_class_matrix(zoo, 10, 0.02, 7);
    auto m2 = synthesize_class_matrix(zoo, 10, 0.02, 7);
    auto m3 = synthesize_class_matrix(zoo, 10, 0.02, 8);
    CHECK(m1.a == m2.a);
    CHECK(m1.a != m3.a);
}

TEST_CASE("synthesize rejects out-of-range parameters") {
    ModelZoo zoo = tiny_zoo();
    CHECK_THROWS_AS(synthesize_class_matrix(zoo, 1, 0.02, 1), ConfigError);
    CHECK_THROWS_AS(synthesize_class_matrix(zoo, 10, 0.06, 1), ConfigError);
    CHECK_THROWS_AS(synthesize_class_matrix(zoo, 10, -0.01, 1), ConfigError);
}

TEST_CASE("class matrix CSV overrides cells and validates row means") {
    ModelZoo zoo = tiny_zoo();
    auto path = write_temp("esim_matrix.csv",
                           "model_id,class,accuracy\na,0,0.71\na,1,0.69\n");
    auto mat = load_class_matrix_csv(path, zoo, 4);
    CHECK(mat.at(0, 0) == doctest::Approx(0.71));
    CHECK(mat.at(0, 1) == doctest::Approx(0.69));
    CHECK(mat.at(0, 2) == doctest::Approx(0.70));  // unlisted cell defaults to top-1
    CHECK(mat.at(1, 0) == doctest::Approx(0.75));
    std::remove(path.c_str());

    auto bad_model = write_temp("esim_matrix_bad1.csv", "model_id,class,accuracy\nzz,0,0.7\n");
    CHECK_THROWS_AS(load_class_matrix_csv(bad_model, zoo, 4), ParseError);
    std::remove(bad_model.c_str());

    auto bad_class = write_temp("esim_matrix_bad2.csv", "model_id,class,accuracy\na,9,0.7\n");
    CHECK_THROWS_AS(load_class_matrix_csv(bad_class, zoo, 4), ParseError);
    std::remove(bad_class.c_str());

    // A single far-off cell drags the row mean outside the 0.005 tolerance.
    auto bad_mean = write_temp("esim_matrix_bad3.csv", "model_id,class,accuracy\na,0,0.95\n");
    CHECK_THROWS_AS(load_class_matrix_csv(bad_mean, zoo, 4), ConfigError);
    std::remove(bad_mean.c_str());
}

TEST_CASE("oracle draws are deterministic and match the configured accuracy") {
    ModelZoo zoo = tiny_zoo();
    auto mat = ClassAccuracyMatrix::flat(zoo, 4);
    PredictionOracle oracle(zoo, mat, {123, WrongLabelMode::UniformOverWrong, 0.0});

    const int n = 20000;
    long correct = 0;
    std::map<int, long> wrong_hist;
    for (uint64_t q = 0; q < n; ++q) {
        int p = oracle.predict(1, 2, q);
        CHECK(oracle.predict(1, 2, q) == p);  // pure function of (model, class, query)
        CHECK(p >= 0);
        CHECK(p < 4);
        if (p == 2)
            ++correct;
        else
            ++wrong_hist[p];
    }
    double acc = static_cast<double>(correct) / n;
    CHECK(acc == doctest::Approx(0.75).epsilon(0.02));
    // Errors spread roughly uniformly over the 3 wrong labels.
    for (const auto& [cls, cnt] : wrong_hist) {
        CHECK(cls != 2);
        double share = static_cast<double>(cnt) / (n - correct);
        CHECK(share == doctest::Approx(1.0 / 3.0).epsilon(0.15));
    }
}

TEST_CASE("shared-confusion mode concentrates error mass on one label") {
    ModelZoo zoo = tiny_zoo();
    auto mat = ClassAccuracyMatrix::flat(zoo, 4);
    PredictionOracle oracle(zoo, mat, {5, WrongLabelMode::SharedConfusion, 0.0});
    long wrong = 0, confused = 0;
    for (uint64_t q = 0; q < 20000; ++q) {
        int p = oracle.predict(0, 1, q);
        if (p == 1) continue;
        ++wrong;
        if (p == 2) ++confused;  // (true + 1) mod L is the fixed confusion target
    }
    REQUIRE(wrong > 2000);
    // Half of the error mass goes straight to the target, plus a uniform share.
    double share = static_cast<double>(confused) / wrong;
    CHECK(share == doctest::Approx(0.5 + 0.5 / 3.0).epsilon(0.08));
}

TEST_CASE("error correlation makes erring models agree") {
    ModelZoo zoo = tiny_zoo();
    auto mat = ClassAccuracyMatrix::flat(zoo, 10);
    PredictionOracle indep(zoo, mat, {9, WrongLabelMode::UniformOverWrong, 0.0});
    PredictionOracle corr(zoo, mat, {9, WrongLabelMode::UniformOverWrong, 0.9});

    auto agreement = [&](const PredictionOracle& o) {
        long both_wrong = 0, agree = 0;
        for (uint64_t q = 0; q < 40000; ++q) {
            int p0 = o.predict(0, 3, q), p1 = o.predict(1, 3, q);
            if (p0 == 3 || p1 == 3) continue;
            ++both_wrong;
            if (p0 == p1) ++agree;
        }
        REQUIRE(both_wrong > 500);
        return static_cast<double>(agree) / both_wrong;
    };
    double a0 = agreement(indep);
    double a1 = agreement(corr);
    CHECK(a0 < 0.25);  // ~1/9 for independent errors over 9 wrong labels
    CHECK(a1 > 0.6);   // rho = 0.9 pulls both toward the shared latent label
    CHECK(a1 > a0 + 0.3);
}

TEST_CASE("oracle rejects bad indices and bad correlation") {
    ModelZoo zoo = tiny_zoo();
    auto mat = ClassAccuracyMatrix::flat(zoo, 4);
    CHECK_THROWS_AS(PredictionOracle(zoo, mat, {1, WrongLabelMode::UniformOverWrong, 1.0}),
                    ConfigError);
    PredictionOracle oracle(zoo, mat, {1, WrongLabelMode::UniformOverWrong, 0.0});
    CHECK_THROWS_AS(oracle.predict(-1, 0, 0), ConfigError);
    CHECK_THROWS_AS(oracle.predict(0, 4, 0), ConfigError);
}
