#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "esim/common.hpp"

namespace esim {

// Static profile of one servable model, measured on the reference
// (xlarge-sized) instance.
struct ModelProfile {
    std::string model_id;
    std::string name;
    double params_10k = 0;
    double top1_accuracy = 0;       // in (0, 1)
    double service_latency_ms = 0;  // > 0
    int base_packing_factor = 1;    // concurrent inferences on the reference size
};

class ModelZoo {
public:
    ModelZoo() = default;
    explicit ModelZoo(std::vector<ModelProfile> models);

    // CSV with header: model_id,name,params_10k,top1,latency_ms,pf
    static ModelZoo from_csv(const std::string& path);

    size_t size() const { return models_.size(); }
    const ModelProfile& profile(int index) const { return models_.at(index); }
    const std::vector<ModelProfile>& models() const { return models_; }
    int index_of(const std::string& model_id) const;  // -1 if unknown

private:
    void validate() const;
    std::vector<ModelProfile> models_;
};

// Per-model per-class accuracy. Row means must agree with the zoo's top-1
// accuracies within 0.005.
struct ClassAccuracyMatrix {
    int num_classes = 0;
    std::vector<std::vector<double>> a;  // a[model][class]

    double at(int model, int cls) const { return a[model][cls]; }
    void validate(const ModelZoo& zoo) const;

    static ClassAccuracyMatrix flat(const ModelZoo& zoo, int num_classes);
};

// Draws one shared per-class difficulty offset, applies it to every model's
// top-1 accuracy, then re-centers each row so its mean matches the profile.
ClassAccuracyMatrix synthesize_class_matrix(const ModelZoo& zoo, int num_classes,
                                            double difficulty_spread, uint64_t seed);

// Optional per-class matrix CSV: model_id,class,accuracy. Cells not present
// default to the model's top-1 accuracy.
ClassAccuracyMatrix load_class_matrix_csv(const std::string& path, const ModelZoo& zoo,
                                          int num_classes);

enum class WrongLabelMode { UniformOverWrong, SharedConfusion };

struct PredictionOracleConfig {
    uint64_t rng_seed = 1;
    WrongLabelMode wrong_label_distribution = WrongLabelMode::UniformOverWrong;
    double error_correlation = 0.0;  // rho in [0, 1); 0 = independent errors
};

// Statistical stand-in for real model inference. Each draw is a pure
// function of (seed, model, query index), so removing one model from an
// ensemble does not perturb the draws of the others.
class PredictionOracle {
public:
    PredictionOracle(const ModelZoo& zoo, const ClassAccuracyMatrix& matrix,
                     PredictionOracleConfig cfg);

    int predict(int model_index, int true_class, uint64_t query_index) const;

    const ModelZoo& zoo() const { return *zoo_; }
    const ClassAccuracyMatrix& matrix() const { return *matrix_; }

private:
    int wrong_label(int true_class, uint64_t h) const;

    const ModelZoo* zoo_;
    const ClassAccuracyMatrix* matrix_;
    PredictionOracleConfig cfg_;
};

}  // namespace esim
