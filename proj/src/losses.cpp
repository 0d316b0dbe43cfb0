#include "bhfl/losses.hpp"

#include <cmath>
#include <string>

#include "bhfl/error.hpp"
#include "bhfl/simd.hpp"

namespace bhfl {
namespace {

void check_dims(const LossModel& model, ConstVec w, const Sample& z) {
    if (w.size() != model.dim())
        throw Error(ErrorKind::DimensionMismatch, "parameter has dimension " + std::to_string(w.size()) +
                                                      ", model expects " + std::to_string(model.dim()));
    if (z.x.size() != model.features)
        throw Error(ErrorKind::DimensionMismatch, "sample has " + std::to_string(z.x.size()) +
                                                      " features, model expects " +
                                                      std::to_string(model.features));
}

// Scalar-output loss and its derivative in the prediction.
double output_loss(MlpLoss loss, double prediction, double y) {
    if (loss == MlpLoss::Squared) {
        const double r = y - prediction;
        return 0.5 * r * r;
    }
    return softplus(-y * prediction);
}

double output_slope(MlpLoss loss, double prediction, double y) {
    if (loss == MlpLoss::Squared) return prediction - y;
    return -y * sigmoid(-y * prediction);
}

struct MlpView {
    std::size_t features;
    std::size_t hidden;
    ConstVec hidden_weights;  // hidden x features
    ConstVec hidden_bias;
    ConstVec output_weights;
    double output_bias;

    MlpView(const LossModel& model, ConstVec w)
        : features(model.features),
          hidden(model.hidden),
          hidden_weights(w.subspan(0, model.hidden * model.features)),
          hidden_bias(w.subspan(model.hidden * model.features, model.hidden)),
          output_weights(w.subspan(model.hidden * (model.features + 1), model.hidden)),
          output_bias(w[model.dim() - 1]) {}

    double forward(ConstVec x, std::vector<double>& activations) const {
        activations.resize(hidden);
        double out = output_bias;
        for (std::size_t j = 0; j < hidden; ++j) {
            const double pre = simd::dot(hidden_weights.subspan(j * features, features), x) + hidden_bias[j];
            activations[j] = std::tanh(pre);
            out += output_weights[j] * activations[j];
        }
        return out;
    }
};

}  // namespace

std::size_t LossModel::dim() const noexcept {
    if (kind == ModelKind::Mlp) return (features + 1) * hidden + hidden + 1;
    return features;
}

void LossModel::validate() const {
    require(features >= 1, ErrorKind::InvalidConfig, "model needs at least one feature");
    require(kind != ModelKind::Mlp || hidden >= 1, ErrorKind::InvalidConfig, "MLP hidden width must be >= 1");
}

double softplus(double t) noexcept {
    if (t > 0.0) return t + std::log1p(std::exp(-t));
    return std::log1p(std::exp(t));
}

double sigmoid(double t) noexcept {
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

double per_sample_loss(const LossModel& model, ConstVec w, const Sample& z) {
    check_dims(model, w, z);
    switch (model.kind) {
        case ModelKind::Linear: {
            const double r = z.y - simd::dot(w, z.x);
            return 0.5 * r * r;
        }
        case ModelKind::Logistic:
            return softplus(-z.y * simd::dot(w, z.x));
        case ModelKind::Mlp: {
            std::vector<double> act;
            const double out = MlpView(model, w).forward(z.x, act);
            return output_loss(model.mlp_loss, out, z.y);
        }
    }
    return 0.0;
}

void per_sample_gradient(const LossModel& model, ConstVec w, const Sample& z, MutVec grad) {
    check_dims(model, w, z);
    require(grad.size() == model.dim(), ErrorKind::DimensionMismatch, "gradient buffer has wrong size");
    switch (model.kind) {
        case ModelKind::Linear: {
            const double slope = simd::dot(w, z.x) - z.y;
            for (std::size_t k = 0; k < grad.size(); ++k) grad[k] = slope * z.x[k];
            return;
        }
        case ModelKind::Logistic: {
            const double slope = -z.y * sigmoid(-z.y * simd::dot(w, z.x));
            for (std::size_t k = 0; k < grad.size(); ++k) grad[k] = slope * z.x[k];
            return;
        }
        case ModelKind::Mlp: {
            const MlpView net(model, w);
            std::vector<double> act;
            const double out = net.forward(z.x, act);
            const double slope = output_slope(model.mlp_loss, out, z.y);
            const std::size_t f = model.features;
            const std::size_t h = model.hidden;
            for (std::size_t j = 0; j < h; ++j) {
                const double back = slope * net.output_weights[j] * (1.0 - act[j] * act[j]);
                for (std::size_t k = 0; k < f; ++k) grad[j * f + k] = back * z.x[k];
                grad[h * f + j] = back;
                grad[h * (f + 1) + j] = slope * act[j];
            }
            grad[model.dim() - 1] = slope;
            return;
        }
    }
}

ParamVector per_sample_gradient(const LossModel& model, ConstVec w, const Sample& z) {
    ParamVector grad(model.dim(), 0.0);
    per_sample_gradient(model, w, z, grad);
    return grad;
}

double empirical_risk(const LossModel& model, ConstVec w, const Dataset& data) {
    require(!data.empty(), ErrorKind::EmptyInput, "empirical risk of an empty dataset");
    double total = 0.0;
    for (const auto& z : data.samples) total += per_sample_loss(model, w, z);
    return total / static_cast<double>(data.size());
}

ParamVector mean_gradient(const LossModel& model, ConstVec w, const Dataset& data) {
    require(!data.empty(), ErrorKind::EmptyInput, "gradient over an empty dataset");
    ParamVector total(model.dim(), 0.0);
    ParamVector grad(model.dim(), 0.0);
    for (const auto& z : data.samples) {
        per_sample_gradient(model, w, z, grad);
        for (std::size_t k = 0; k < total.size(); ++k) total[k] += grad[k];
    }
    const double inv = 1.0 / static_cast<double>(data.size());
    for (auto& g : total) g *= inv;
    return total;
}

}  // namespace bhfl
