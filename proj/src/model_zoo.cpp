#include "esim/model_zoo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace esim {

ModelZoo::ModelZoo(std::vector<ModelProfile> models) : models_(std::move(models)) {
    validate();
}

void ModelZoo::validate() const {
    std::set<std::string> seen;
    for (const auto& m : models_) {
        if (m.model_id.empty()) throw ConfigError("model with empty model_id");
        if (!(m.top1_accuracy > 0.0 && m.top1_accuracy < 1.0))
            throw ConfigError("model " + m.model_id + ": top1 accuracy out of (0,1): " +
                              std::to_string(m.top1_accuracy));
        if (!(m.service_latency_ms > 0.0))
            throw ConfigError("model " + m.model_id + ": non-positive latency");
        if (m.base_packing_factor < 1)
            throw ConfigError("model " + m.model_id + ": packing factor must be >= 1");
        if (!seen.insert(m.model_id).second)
            throw ConfigError("duplicate model_id: " + m.model_id);
    }
}

ModelZoo ModelZoo::from_csv(const std::string& path) {
    auto rows = read_csv(path);
    if (rows.empty()) throw ParseError(path + ": empty model zoo file");
    std::vector<ModelProfile> models;
    for (size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.fields.size() != 6)
            throw ParseError(path + " line " + std::to_string(r.line_no) +
                             ": expected 6 fields, got " + std::to_string(r.fields.size()));
        ModelProfile m;
        m.model_id = r.fields[0];
        m.name = r.fields[1];
        m.params_10k = parse_double(r.fields[2], "params_10k", r.line_no);
        m.top1_accuracy = parse_double(r.fields[3], "top1", r.line_no);
        m.service_latency_ms = parse_double(r.fields[4], "latency_ms", r.line_no);
        m.base_packing_factor = static_cast<int>(parse_long(r.fields[5], "pf", r.line_no));
        models.push_back(std::move(m));
    }
    return ModelZoo(std::move(models));
}

int ModelZoo::index_of(const std::string& model_id) const {
    for (size_t i = 0; i < models_.size(); ++i)
        if (models_[i].model_id == model_id) return static_cast<int>(i);
    return -1;
}

void ClassAccuracyMatrix::validate(const ModelZoo& zoo) const {
    if (a.size() != zoo.size()) throw ConfigError("class matrix row count != zoo size");
    for (size_t m = 0; m < a.size(); ++m) {
        if (static_cast<int>(a[m].size()) != num_classes)
            throw ConfigError("class matrix column count mismatch for model " +
                              zoo.profile(static_cast<int>(m)).model_id);
        double sum = 0;
        for (double v : a[m]) {
            if (!(v > 0.0 && v < 1.0))
                throw ConfigError("class accuracy out of (0,1) for model " +
                                  zoo.profile(static_cast<int>(m)).model_id);
            sum += v;
        }
        double mean = sum / num_classes;
        if (std::abs(mean - zoo.profile(static_cast<int>(m)).top1_accuracy) > 0.005)
            throw ConfigError("class matrix row mean deviates from top1 for model " +
                              zoo.profile(static_cast<int>(m)).model_id);
    }
}

ClassAccuracyMatrix ClassAccuracyMatrix::flat(const ModelZoo& zoo, int num_classes) {
    ClassAccuracyMatrix mat;
    mat.num_classes = num_classes;
    mat.a.resize(zoo.size());
    for (size_t m = 0; m < zoo.size(); ++m)
        mat.a[m].assign(num_classes, zoo.profile(static_cast<int>(m)).top1_accuracy);
    return mat;
}

ClassAccuracyMatrix synthesize_class_matrix(const ModelZoo& zoo, int num_classes,
                                            double difficulty_spread, uint64_t seed) {
    if (num_classes < 2) throw ConfigError("synthesize_class_matrix: need at least 2 classes");
    if (difficulty_spread < 0.0 || difficulty_spread > 0.05)
        throw ConfigError("synthesize_class_matrix: difficulty_spread out of [0, 0.05]");

    // One shared per-class difficulty vector, centered so row means stay put.
    std::vector<double> d(num_classes, 0.0);
    if (difficulty_spread > 0.0) {
        double mean = 0;
        for (int c = 0; c < num_classes; ++c) {
            d[c] = (2.0 * unit_draw(mix64(seed, 0x5eedu, static_cast<uint64_t>(c))) - 1.0) *
                   difficulty_spread;
            mean += d[c];
        }
        mean /= num_classes;
        for (double& v : d) v -= mean;
    }

    ClassAccuracyMatrix mat;
    mat.num_classes = num_classes;
    mat.a.resize(zoo.size());
    for (size_t m = 0; m < zoo.size(); ++m) {
        double top1 = zoo.profile(static_cast<int>(m)).top1_accuracy;
        mat.a[m].resize(num_classes);
        for (int c = 0; c < num_classes; ++c)
            mat.a[m][c] = std::clamp(top1 + d[c], 0.01, 0.99);
        double mean = std::accumulate(mat.a[m].begin(), mat.a[m].end(), 0.0) / num_classes;
        if (std::abs(mean - top1) > 0.005)
            throw ConfigError("synthesize_class_matrix: cannot renormalize model " +
                              zoo.profile(static_cast<int>(m)).model_id +
                              " (top1 too close to bounds for requested spread)");
    }
    return mat;
}

ClassAccuracyMatrix load_class_matrix_csv(const std::string& path, const ModelZoo& zoo,
                                          int num_classes) {
    auto mat = ClassAccuracyMatrix::flat(zoo, num_classes);
    auto rows = read_csv(path);
    for (size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.fields.size() != 3)
            throw ParseError(path + " line " + std::to_string(r.line_no) +
                             ": expected model_id,class,accuracy");
        int m = zoo.index_of(r.fields[0]);
        if (m < 0)
            throw ParseError(path + " line " + std::to_string(r.line_no) + ": unknown model " +
                             r.fields[0]);
        long c = parse_long(r.fields[1], "class", r.line_no);
        if (c < 0 || c >= num_classes)
            throw ParseError(path + " line " + std::to_string(r.line_no) + ": class out of range");
        mat.a[m][c] = parse_double(r.fields[2], "accuracy", r.line_no);
    }
    mat.validate(zoo);
    return mat;
}

PredictionOracle::PredictionOracle(const ModelZoo& zoo, const ClassAccuracyMatrix& matrix,
                                   PredictionOracleConfig cfg)
    : zoo_(&zoo), matrix_(&matrix), cfg_(cfg) {
    if (cfg_.error_correlation < 0.0 || cfg_.error_correlation >= 1.0)
        throw ConfigError("error_correlation must be in [0, 1)");
    matrix.validate(zoo);
}

int PredictionOracle::wrong_label(int true_class, uint64_t h) const {
    int L = matrix_->num_classes;
    if (cfg_.wrong_label_distribution == WrongLabelMode::SharedConfusion) {
        // Half of the error mass lands on a fixed per-class confusion target,
        // which makes count ties in voting far more frequent.
        if (unit_draw(mix64(h, 0x51u)) < 0.5) return (true_class + 1) % L;
    }
    int idx = static_cast<int>(mix64(h, 0x52u) % static_cast<uint64_t>(L - 1));
    return idx >= true_class ? idx + 1 : idx;
}

int PredictionOracle::predict(int model_index, int true_class, uint64_t query_index) const {
    if (model_index < 0 || model_index >= static_cast<int>(zoo_->size()))
        throw ConfigError("predict: bad model index");
    if (true_class < 0 || true_class >= matrix_->num_classes)
        throw ConfigError("predict: bad class index");

    uint64_t m = static_cast<uint64_t>(model_index);
    double a = matrix_->at(model_index, true_class);
    if (unit_draw(mix64(cfg_.rng_seed, m, query_index, 1)) < a) return true_class;

    // Shared latent wrong label: with weight rho every erring model in this
    // query is pulled toward the same label.
    if (cfg_.error_correlation > 0.0 &&
        unit_draw(mix64(cfg_.rng_seed, m, query_index, 2)) < cfg_.error_correlation) {
        return wrong_label(true_class, mix64(cfg_.rng_seed, query_index, 3));
    }
    return wrong_label(true_class, mix64(cfg_.rng_seed, m, query_index, 4));
}

}  // namespace esim
