#include "mealrec/stump.hpp"

#include <algorithm>
#include <limits>

#include "mealrec/error.hpp"

namespace mealrec {

namespace {

struct Bin {
    double value;
    double weight;
    double sum;
};

// Collapses one feature column into sorted (value, weight, sum) bins. Columns
// are usually indicator-like, so a linear scan beats sorting until the number
// of distinct values grows.
void bin_feature(std::span<const WeightedResidual> groups, std::size_t feature, std::vector<Bin>& bins) {
    constexpr std::size_t kLinearLimit = 16;
    bins.clear();
    std::size_t g = 0;
    for (; g < groups.size(); ++g) {
        const double v = groups[g].features[feature];
        auto it = std::find_if(bins.begin(), bins.end(), [v](const Bin& b) { return b.value == v; });
        if (it != bins.end()) {
            it->weight += groups[g].weight;
            it->sum += groups[g].residual_sum;
        } else if (bins.size() < kLinearLimit) {
            bins.push_back({v, groups[g].weight, groups[g].residual_sum});
        } else {
            break;
        }
    }
    if (g < groups.size()) {
        for (; g < groups.size(); ++g)
            bins.push_back({groups[g].features[feature], groups[g].weight, groups[g].residual_sum});
        std::sort(bins.begin(), bins.end(), [](const Bin& a, const Bin& b) { return a.value < b.value; });
        std::size_t out = 0;
        for (std::size_t i = 1; i < bins.size(); ++i) {
            if (bins[i].value == bins[out].value) {
                bins[out].weight += bins[i].weight;
                bins[out].sum += bins[i].sum;
            } else {
                bins[++out] = bins[i];
            }
        }
        bins.resize(out + 1);
        return;
    }
    std::sort(bins.begin(), bins.end(), [](const Bin& a, const Bin& b) { return a.value < b.value; });
}

}  // namespace

Stump fit_stump(std::span<const ResidualSample> samples) {
    std::vector<WeightedResidual> groups;
    groups.reserve(samples.size());
    for (const auto& s : samples) groups.push_back({s.features, 1.0, s.residual});
    return fit_stump(groups);
}

Stump fit_stump(std::span<const WeightedResidual> groups) {
    double total_w = 0.0;
    double total_s = 0.0;
    for (const auto& g : groups) {
        total_w += g.weight;
        total_s += g.residual_sum;
    }
    if (total_w < 2.0) throw DomainError("fit_stump needs at least two samples");
    const std::size_t dim = groups.front().features.size();
    for (const auto& g : groups)
        if (g.features.size() != dim) throw DomainError("fit_stump: samples disagree on feature count");

    const double mean = total_s / total_w;
    Stump best{0, 0.0, mean, mean};
    // Minimizing SSE is maximizing S_L^2/n_L + S_R^2/n_R; track the negation.
    double best_loss = std::numeric_limits<double>::infinity();
    std::vector<Bin> bins;
    for (std::size_t f = 0; f < dim; ++f) {
        bin_feature(groups, f, bins);
        double lw = 0.0;
        double ls = 0.0;
        for (std::size_t i = 0; i + 1 < bins.size(); ++i) {
            lw += bins[i].weight;
            ls += bins[i].sum;
            const double rw = total_w - lw;
            const double rs = total_s - ls;
            if (lw <= 0.0 || rw <= 0.0) continue;
            const double loss = -(ls * ls / lw + rs * rs / rw);
            if (loss < best_loss - 1e-12) {
                best_loss = loss;
                best = {f, 0.5 * (bins[i].value + bins[i + 1].value), ls / lw, rs / rw};
            }
        }
    }
    return best;
}

RewardModel::RewardModel(std::size_t dim, double learning_rate, std::size_t max_stumps)
    : learning_rate_(learning_rate), max_stumps_(max_stumps), tables_(dim) {
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
    if (max_stumps == 0) throw ConfigError("max_stumps must be positive");
}

bool RewardModel::add(const Stump& stump) {
    if (full()) return false;
    if (stump.feature >= tables_.size()) throw DomainError("stump feature index out of range");
    stumps_.push_back(stump);
    tables_[stump.feature].add(stump.threshold, stump.left, stump.right);
    return true;
}

double RewardModel::partial(std::span<const double> x, std::size_t offset) const {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const auto& t = tables_[offset + i];
        if (!t.values.empty()) s += t.at(x[i]);
    }
    return s;
}

double RewardModel::raw(std::span<const double> x) const {
    if (x.size() != tables_.size()) throw DomainError("feature vector has the wrong dimension");
    return learning_rate_ * partial(x, 0);
}

double RewardModel::predict(std::span<const double> x) const { return std::clamp(raw(x), 0.0, 1.0); }

double RewardModel::StepFunction::at(double x) const {
    auto i = static_cast<std::size_t>(std::upper_bound(thresholds.begin(), thresholds.end(), x) - thresholds.begin());
    return values[i];
}

void RewardModel::StepFunction::add(double threshold, double l, double r) {
    auto it = std::lower_bound(thresholds.begin(), thresholds.end(), threshold);
    auto k = static_cast<std::size_t>(it - thresholds.begin());
    if (it != thresholds.end() && *it == threshold) {
        left[k] += l;
        right[k] += r;
    } else {
        thresholds.insert(it, threshold);
        left.insert(left.begin() + static_cast<std::ptrdiff_t>(k), l);
        right.insert(right.begin() + static_cast<std::ptrdiff_t>(k), r);
    }
    // values[i] = sum of right over the first i thresholds + sum of left over the rest
    const std::size_t n = thresholds.size();
    values.assign(n + 1, 0.0);
    double v = 0.0;
    for (double x : left) v += x;
    values[0] = v;
    for (std::size_t i = 0; i < n; ++i) {
        v += right[i] - left[i];
        values[i + 1] = v;
    }
}

json to_json(const RewardModel& model) {
    json stumps = json::array();
    for (const auto& s : model.stumps()) stumps.push_back(json::array({s.feature, s.threshold, s.left, s.right}));
    return json{{"dim", model.dim()},
                {"learning_rate", model.learning_rate()},
                {"max_stumps", model.max_stumps()},
                {"stumps", stumps}};
}

RewardModel reward_model_from_json(const json& j) {
    try {
        RewardModel m(j.at("dim").get<std::size_t>(), j.at("learning_rate").get<double>(),
                      j.at("max_stumps").get<std::size_t>());
        for (const auto& s : j.at("stumps")) {
            if (!m.add({s.at(0).get<std::size_t>(), s.at(1).get<double>(), s.at(2).get<double>(), s.at(3).get<double>()}))
                throw ValidationError({"reward model: more stumps than max_stumps"});
        }
        return m;
    } catch (const json::exception& e) {
        throw ValidationError({std::string("reward model: ") + e.what()});
    }
}

}  // namespace mealrec
