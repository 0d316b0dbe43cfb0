#pragma once

#include <cstddef>
#include <vector>

#include "bhfl/types.hpp"

namespace bhfl {

enum class ModelKind { Linear, Logistic, Mlp };

/// Output loss of the one-hidden-layer network.
enum class MlpLoss { Squared, Logistic };

/// A loss model over feature vectors of length `features`.
///
/// Linear and logistic models have one weight per feature (no implicit
/// bias; append a constant feature for one). The MLP stores, in order,
/// the hidden weights (hidden x features, row-major), hidden biases,
/// output weights and the output bias, so
/// dim = (features + 1) * hidden + hidden + 1.
struct LossModel {
    ModelKind kind = ModelKind::Linear;
    std::size_t features = 1;
    std::size_t hidden = 8;
    MlpLoss mlp_loss = MlpLoss::Squared;

    [[nodiscard]] std::size_t dim() const noexcept;
    /// Throws InvalidConfig if features or hidden width is zero.
    void validate() const;

    static LossModel linear(std::size_t features) { return {ModelKind::Linear, features, 0, MlpLoss::Squared}; }
    static LossModel logistic(std::size_t features) { return {ModelKind::Logistic, features, 0, MlpLoss::Logistic}; }
    static LossModel mlp(std::size_t features, std::size_t hidden, MlpLoss loss) {
        return {ModelKind::Mlp, features, hidden, loss};
    }
};

struct Sample {
    std::vector<double> x;
    double y = 0.0;
};

/// Labelled records with a common feature dimension. Logistic labels are +-1.
struct Dataset {
    std::vector<Sample> samples;

    [[nodiscard]] std::size_t size() const noexcept { return samples.size(); }
    [[nodiscard]] bool empty() const noexcept { return samples.empty(); }
    [[nodiscard]] std::size_t feature_dim() const noexcept {
        return samples.empty() ? 0 : samples.front().x.size();
    }
};

/// Loss of one record. Linear: 0.5 (y - <w,x>)^2. Logistic: log(1 + exp(-y <w,x>)).
double per_sample_loss(const LossModel& model, ConstVec w, const Sample& z);

/// Gradient of per_sample_loss with respect to w, written into `grad`
/// (size model.dim()).
void per_sample_gradient(const LossModel& model, ConstVec w, const Sample& z, MutVec grad);
ParamVector per_sample_gradient(const LossModel& model, ConstVec w, const Sample& z);

/// Mean per-sample loss; throws EmptyInput on an empty dataset.
double empirical_risk(const LossModel& model, ConstVec w, const Dataset& data);

/// Plain mean of per-sample gradients (the non-robust local estimator).
ParamVector mean_gradient(const LossModel& model, ConstVec w, const Dataset& data);

/// Numerically stable log(1 + exp(t)).
double softplus(double t) noexcept;
double sigmoid(double t) noexcept;

}  // namespace bhfl
