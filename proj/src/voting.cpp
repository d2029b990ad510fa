#include "esim/voting.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace esim {

WeightMatrix::WeightMatrix(int num_classes, int num_models)
    : num_classes_(num_classes), num_models_(num_models) {
    if (num_classes < 1 || num_models < 1) throw ConfigError("WeightMatrix: bad dimensions");
    attempts_.assign(static_cast<size_t>(num_classes) * num_models, 0);
    correct_.assign(static_cast<size_t>(num_classes) * num_models, 0);
}

size_t WeightMatrix::cell(int cls, int model) const {
    if (cls < 0 || cls >= num_classes_ || model < 0 || model >= num_models_)
        throw ConfigError("WeightMatrix: index out of range");
    return static_cast<size_t>(cls) * num_models_ + model;
}

double WeightMatrix::weight(int cls, int model) const {
    size_t i = cell(cls, model);
    return (correct_[i] + 1.0) / (attempts_[i] + 2.0);
}

void WeightMatrix::update(int model, int predicted_class, int true_class) {
    size_t i = cell(predicted_class, model);
    attempts_[i] += 1;
    if (predicted_class == true_class) correct_[i] += 1;
}

void WeightMatrix::dump_csv(std::ostream& out) const {
    out << "class,model_id,attempts,correct\n";
    for (int c = 0; c < num_classes_; ++c)
        for (int m = 0; m < num_models_; ++m) {
            size_t i = static_cast<size_t>(c) * num_models_ + m;
            if (attempts_[i] == 0) continue;
            out << c << ',' << m << ',' << attempts_[i] << ',' << correct_[i] << '\n';
        }
}

WeightMatrix WeightMatrix::restore_csv(std::istream& in, int num_classes, int num_models) {
    WeightMatrix w(num_classes, num_models);
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line_no == 1) continue;  // header
        std::stringstream ss(line);
        std::string f;
        std::vector<std::string> fields;
        while (std::getline(ss, f, ',')) fields.push_back(f);
        if (fields.size() != 4)
            throw ParseError("weight matrix line " + std::to_string(line_no) +
                             ": expected 4 fields");
        int c = static_cast<int>(parse_long(fields[0], "class", line_no));
        int m = static_cast<int>(parse_long(fields[1], "model", line_no));
        size_t i = w.cell(c, m);
        w.attempts_[i] = parse_long(fields[2], "attempts", line_no);
        w.correct_[i] = parse_long(fields[3], "correct", line_no);
        if (w.correct_[i] < 0 || w.correct_[i] > w.attempts_[i])
            throw ParseError("weight matrix line " + std::to_string(line_no) +
                             ": correct > attempts");
    }
    return w;
}

namespace {

struct Tally {
    double weight_sum = 0;
    int count = 0;
};

VoteOutcome finalize(const std::map<int, Tally>& tallies) {
    VoteOutcome out;
    int max_count = 0;
    for (const auto& [cls, t] : tallies) max_count = std::max(max_count, t.count);
    out.max_vote_count = max_count;
    int count_leaders = 0;
    for (const auto& [cls, t] : tallies)
        if (t.count == max_count) ++count_leaders;
    out.was_tie_by_count = count_leaders > 1;

    double best = -1.0;
    for (const auto& [cls, t] : tallies) {
        out.class_weights.emplace_back(cls, t.weight_sum);
        if (t.weight_sum > best) {  // ordered map: ties keep the lowest class
            best = t.weight_sum;
            out.winning_class = cls;
        }
    }
    return out;
}

}  // namespace

VoteOutcome weighted_vote(std::span<const std::pair<int, int>> predictions,
                          const WeightMatrix& weights) {
    if (predictions.empty()) throw ConfigError("weighted_vote: no predictions");
    std::map<int, Tally> tallies;
    for (const auto& [model, cls] : predictions) {
        auto& t = tallies[cls];
        t.weight_sum += weights.weight(cls, model);
        t.count += 1;
    }
    return finalize(tallies);
}

VoteOutcome uniform_vote(std::span<const std::pair<int, int>> predictions, double tie_draw) {
    if (predictions.empty()) throw ConfigError("uniform_vote: no predictions");
    std::map<int, Tally> tallies;
    for (const auto& [model, cls] : predictions) {
        auto& t = tallies[cls];
        t.weight_sum += 1.0;
        t.count += 1;
    }
    VoteOutcome out = finalize(tallies);
    if (out.was_tie_by_count) {
        std::vector<int> leaders;
        for (const auto& [cls, t] : tallies)
            if (t.count == out.max_vote_count) leaders.push_back(cls);
        out.winning_class = leaders[std::min(
            static_cast<size_t>(tie_draw * static_cast<double>(leaders.size())),
            leaders.size() - 1)];
    }
    return out;
}

}  // namespace esim
