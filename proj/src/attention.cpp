// SPDX-License-Identifier: Apache-2.0
#include "resmaster/attention.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "resmaster/errors.hpp"
#include "resmaster/hashing.hpp"

namespace resmaster {
namespace {

Matrix seeded_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed, std::uint64_t salt) {
    if (rows == 0 || cols == 0) {
        throw InvalidArgument("AttentionWeights: all widths must be >= 1");
    }
    Matrix m(rows, cols);
    const double scale = 1.0 / std::sqrt(static_cast<double>(rows));
    const std::uint64_t base = hash_combine(splitmix64(seed), salt);
    auto d = m.data();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = to_signed_unit(hash_combine(base, i)) * scale;
    return m;
}

}  // namespace

AttentionWeights AttentionWeights::seeded(std::size_t d_model, std::size_t d_head, std::size_t text_dim,
                                          std::size_t image_dim, std::uint64_t seed) {
    return {
        seeded_matrix(d_model, d_head, seed, 1),
        seeded_matrix(text_dim, d_head, seed, 2),
        seeded_matrix(text_dim, d_head, seed, 3),
        seeded_matrix(image_dim, d_head, seed, 4),
        seeded_matrix(image_dim, d_head, seed, 5),
    };
}

void AttentionWeights::validate() const {
    const std::size_t d = d_head();
    if (text_key.cols() != d || text_value.cols() != d || image_key.cols() != d || image_value.cols() != d) {
        throw InvalidArgument("AttentionWeights: projections disagree on head width");
    }
    if (text_value.rows() != text_key.rows() || image_value.rows() != image_key.rows()) {
        throw InvalidArgument("AttentionWeights: key and value projections disagree on condition width");
    }
}

Matrix softmax_rows(Matrix logits) {
    for (std::size_t r = 0; r < logits.rows(); ++r) {
        auto row = logits.row(r);
        if (row.empty()) continue;
        const double peak = *std::max_element(row.begin(), row.end());
        double sum = 0.0;
        for (auto& v : row) {
            v = std::exp(v - peak);
            sum += v;
        }
        for (auto& v : row) v /= sum;
    }
    return logits;
}

Matrix attention_probabilities(const Matrix& queries, const Matrix& keys) {
    if (queries.cols() != keys.cols()) {
        throw InvalidArgument("attention: query width " + std::to_string(queries.cols()) +
                              " differs from key width " + std::to_string(keys.cols()));
    }
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(queries.cols()));
    Matrix logits(queries.rows(), keys.rows());
    for (std::size_t i = 0; i < queries.rows(); ++i) {
        auto q = queries.row(i);
        for (std::size_t j = 0; j < keys.rows(); ++j) {
            auto k = keys.row(j);
            double dot = 0.0;
            for (std::size_t t = 0; t < q.size(); ++t) dot += q[t] * k[t];
            logits(i, j) = dot * inv_sqrt_d;
        }
    }
    return softmax_rows(std::move(logits));
}

void check_attention_shapes(const Matrix& x, const ConditionBundle& bundle, const AttentionWeights& w) {
    w.validate();
    if (x.cols() != w.d_model()) {
        throw InvalidArgument("attend: input width " + std::to_string(x.cols()) + " differs from d_model " +
                              std::to_string(w.d_model()));
    }
    if (bundle.text.dim() != w.text_dim()) {
        throw InvalidArgument("attend: text embedding width " + std::to_string(bundle.text.dim()) +
                              " differs from projection input " + std::to_string(w.text_dim()));
    }
    if (bundle.image.dim() != w.image_dim()) {
        throw InvalidArgument("attend: image embedding width " + std::to_string(bundle.image.dim()) +
                              " differs from projection input " + std::to_string(w.image_dim()));
    }
}

AttentionTerms attention_terms(const Matrix& x, const ConditionBundle& bundle, const AttentionWeights& w) {
    check_attention_shapes(x, bundle, w);
    const Matrix q = matmul(x, w.query);
    const Matrix text_p = attention_probabilities(q, matmul(bundle.text.values, w.text_key));
    const Matrix image_p = attention_probabilities(q, matmul(bundle.image.values, w.image_key));
    return {
        matmul(text_p, matmul(bundle.text.values, w.text_value)),
        matmul(image_p, matmul(bundle.image.values, w.image_value)),
    };
}

Matrix attend(const Matrix& x, const ConditionBundle& bundle, const AttentionWeights& w) {
    AttentionTerms terms = attention_terms(x, bundle, w);
    if (bundle.lambda == 0.0) {
        return std::move(terms.text);
    }
    auto out = terms.text.data();
    auto img = terms.image.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += bundle.lambda * img[i];
    return std::move(terms.text);
}

}  // namespace resmaster
