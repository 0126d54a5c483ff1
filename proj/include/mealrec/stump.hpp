#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mealrec/recipe.hpp"

namespace mealrec {

// One-split regression tree: x[feature] < threshold ? left : right.
struct Stump {
    std::size_t feature = 0;
    double threshold = 0.0;
    double left = 0.0;
    double right = 0.0;

    double operator()(std::span<const double> x) const { return x[feature] < threshold ? left : right; }

    friend bool operator==(const Stump&, const Stump&) = default;
};

struct ResidualSample {
    std::vector<double> features;
    double residual = 0.0;
};

// A set of samples sharing one feature vector, summarized by count and sum.
// Squared-error split search only needs these two numbers per vector.
struct WeightedResidual {
    std::span<const double> features;
    double weight = 0.0;
    double residual_sum = 0.0;
};

// Least-squares stump over midpoints of sorted distinct feature values. Ties
// go to the lowest feature index, then the lowest threshold. When no feature
// varies, returns a stump whose leaves both hold the mean residual.
// Throws DomainError with fewer than two samples.
Stump fit_stump(std::span<const ResidualSample> samples);
Stump fit_stump(std::span<const WeightedResidual> groups);

// Additive ensemble of stumps: prediction = learning_rate * sum of stump
// outputs, clamped to [0, 1] by predict().
//
// Every stump reads a single feature, so the ensemble decomposes into one
// step function per feature. Those are kept materialized, which makes
// evaluation O(dim) regardless of ensemble size and lets callers score a
// context block and an arm block separately.
class RewardModel {
public:
    RewardModel() = default;
    RewardModel(std::size_t dim, double learning_rate, std::size_t max_stumps);

    std::size_t dim() const noexcept { return tables_.size(); }
    double learning_rate() const noexcept { return learning_rate_; }
    std::size_t max_stumps() const noexcept { return max_stumps_; }
    const std::vector<Stump>& stumps() const noexcept { return stumps_; }
    bool full() const noexcept { return stumps_.size() >= max_stumps_; }

    // Returns false (and leaves the model untouched) once max_stumps is reached.
    bool add(const Stump& stump);

    // learning_rate * sum of stump outputs, unclamped.
    double raw(std::span<const double> x) const;
    double predict(std::span<const double> x) const;
    // Unscaled sum of the per-feature step functions for features
    // [offset, offset + x.size()).
    double partial(std::span<const double> x, std::size_t offset) const;

    friend bool operator==(const RewardModel& a, const RewardModel& b) {
        return a.learning_rate_ == b.learning_rate_ && a.max_stumps_ == b.max_stumps_ &&
               a.tables_.size() == b.tables_.size() && a.stumps_ == b.stumps_;
    }

private:
    struct StepFunction {
        std::vector<double> thresholds;  // sorted, distinct
        std::vector<double> left;        // accumulated left/right output per threshold
        std::vector<double> right;
        std::vector<double> values;      // values[i]: output when i thresholds are <= x
        double at(double x) const;
        void add(double threshold, double l, double r);
    };

    double learning_rate_ = 0.1;
    std::size_t max_stumps_ = 0;
    std::vector<Stump> stumps_;
    std::vector<StepFunction> tables_;
};

json to_json(const RewardModel& model);
RewardModel reward_model_from_json(const json& j);

}  // namespace mealrec
