#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "esim/common.hpp"

namespace esim {

// Per-class vote weights learned at runtime. weight(c, m) is the
// Laplace-smoothed precision of model m when it predicts class c:
// (correct + 1) / (attempts + 2).
class WeightMatrix {
public:
    WeightMatrix(int num_classes, int num_models);

    int num_classes() const { return num_classes_; }
    int num_models() const { return num_models_; }

    double weight(int cls, int model) const;
    long attempts(int cls, int model) const { return attempts_[cell(cls, model)]; }
    long correct(int cls, int model) const { return correct_[cell(cls, model)]; }

    void update(int model, int predicted_class, int true_class);

    // CSV dump/restore: class,model_index,attempts,correct
    void dump_csv(std::ostream& out) const;
    static WeightMatrix restore_csv(std::istream& in, int num_classes, int num_models);

private:
    size_t cell(int cls, int model) const;
    int num_classes_;
    int num_models_;
    std::vector<long> attempts_;
    std::vector<long> correct_;
};

struct VoteOutcome {
    int winning_class = -1;
    std::vector<std::pair<int, double>> class_weights;  // (class, summed weight), sorted by class
    bool was_tie_by_count = false;  // >1 class shared the highest raw vote count
    int max_vote_count = 0;         // most raw votes any class received
};

// predictions: (model index, predicted class). Weighted-sum ties break to the
// lowest class index.
VoteOutcome weighted_vote(std::span<const std::pair<int, int>> predictions,
                          const WeightMatrix& weights);

// Uniform-weight baseline: plain majority with count ties broken by a caller
// supplied uniform draw in [0,1).
VoteOutcome uniform_vote(std::span<const std::pair<int, int>> predictions, double tie_draw);

}  // namespace esim
