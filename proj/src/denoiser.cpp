// SPDX-License-Identifier: Apache-2.0
#include "resmaster/denoiser.hpp"

#include <cmath>
#include <string>

#include "resmaster/errors.hpp"
#include "resmaster/hashing.hpp"

namespace resmaster {

void GaussianDataModel::validate() const {
    if (mean.empty()) throw InvalidArgument("GaussianDataModel: mean must have at least one entry");
    for (double m : mean) {
        if (!std::isfinite(m)) throw InvalidArgument("GaussianDataModel: mean must be finite");
    }
    if (!(std >= 0.0) || !std::isfinite(std)) throw InvalidArgument("GaussianDataModel: std must be finite and >= 0");
}

AnalyticGaussianDenoiser::AnalyticGaussianDenoiser(GaussianDataModel model) : model_(std::move(model)) {
    model_.validate();
}

LatentGrid AnalyticGaussianDenoiser::posterior_mean(const LatentGrid& z_t, int t, const NoiseSchedule& s) const {
    if (model_.mean.size() != 1 && model_.mean.size() != z_t.channels()) {
        throw InvalidArgument("AnalyticGaussianDenoiser: model has " + std::to_string(model_.mean.size()) +
                              " channel means for a " + z_t.shape_string() + " grid");
    }
    const double ab = s.alpha_bar(t);
    const double root = std::sqrt(ab);
    const double var = model_.std * model_.std;
    const double gain = root * var / (ab * var + (1.0 - ab));
    LatentGrid out = z_t;
    auto d = out.data();
    const std::size_t c = z_t.channels();
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double m = model_.mean_for(i % c);
        d[i] = m + gain * (d[i] - root * m);
    }
    return out;
}

LatentGrid AnalyticGaussianDenoiser::predict(const LatentGrid& z_t, int t, const ConditionBundle*,
                                             const NoiseSchedule& s) const {
    const double ab = s.alpha_bar(t);
    if (ab >= 1.0) {
        return LatentGrid(z_t.height(), z_t.width(), z_t.channels());
    }
    const LatentGrid mean = posterior_mean(z_t, t, s);
    const double root = std::sqrt(ab);
    const double inv_noise = 1.0 / std::sqrt(1.0 - ab);
    LatentGrid out = z_t;
    auto d = out.data();
    auto m = mean.data();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = (d[i] - root * m[i]) * inv_noise;
    return out;
}

ToyConditionedDenoiser::ToyConditionedDenoiser(ToyDenoiserDims dims, std::uint64_t seed, GaussianDataModel prior,
                                               double residual_gain)
    : dims_(dims),
      weights_(AttentionWeights::seeded(dims.channels + 2, dims.head_dim, dims.text_dim, dims.image_dim, seed)),
      output_projection_(dims.head_dim, dims.channels),
      prior_(std::move(prior)),
      residual_gain_(residual_gain) {
    if (dims.channels == 0) throw InvalidArgument("ToyConditionedDenoiser: channels must be >= 1");
    const std::uint64_t base = hash_combine(splitmix64(seed), 6);
    const double scale = 1.0 / std::sqrt(static_cast<double>(dims.head_dim));
    auto d = output_projection_.data();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = to_signed_unit(hash_combine(base, i)) * scale;
}

LatentGrid ToyConditionedDenoiser::predict(const LatentGrid& z_t, int t, const ConditionBundle* cond,
                                           const NoiseSchedule& s) const {
    if (cond == nullptr) {
        throw InvalidArgument("ToyConditionedDenoiser: a condition bundle is required");
    }
    if (z_t.channels() != dims_.channels) {
        throw InvalidArgument("ToyConditionedDenoiser: expected " + std::to_string(dims_.channels) +
                              " channels, got " + z_t.shape_string());
    }
    LatentGrid eps = prior_.predict(z_t, t, nullptr, s);

    const std::size_t c = dims_.channels;
    const std::size_t cells = z_t.height() * z_t.width();
    const double phase = static_cast<double>(t) / static_cast<double>(s.steps());
    const double time_sin = std::sin(phase * 3.0);
    const double time_cos = std::cos(phase * 3.0);
    Matrix tokens(cells, c + 2);
    auto src = z_t.data();
    for (std::size_t i = 0; i < cells; ++i) {
        auto row = tokens.row(i);
        for (std::size_t ch = 0; ch < c; ++ch) row[ch] = src[i * c + ch];
        row[c] = time_sin;
        row[c + 1] = time_cos;
    }
    const Matrix residual = matmul(attend(tokens, *cond, weights_), output_projection_);
    auto e = eps.data();
    auto r = residual.data();
    for (std::size_t i = 0; i < e.size(); ++i) e[i] += residual_gain_ * std::tanh(r[i]);
    return eps;
}

}  // namespace resmaster
