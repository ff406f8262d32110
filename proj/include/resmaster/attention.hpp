// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>

#include "resmaster/conditioning.hpp"
#include "resmaster/matrix.hpp"

namespace resmaster {

/// Projections of a single-head decoupled cross-attention layer. The text
/// branch uses key/value, the image branch its own key'/value'.
struct AttentionWeights {
    Matrix query;        // d_model x d_head
    Matrix text_key;     // text_dim x d_head
    Matrix text_value;   // text_dim x d_head
    Matrix image_key;    // image_dim x d_head
    Matrix image_value;  // image_dim x d_head

    std::size_t d_model() const noexcept { return query.rows(); }
    std::size_t d_head() const noexcept { return query.cols(); }
    std::size_t text_dim() const noexcept { return text_key.rows(); }
    std::size_t image_dim() const noexcept { return image_key.rows(); }

    /// Uniform entries scaled by 1/sqrt(fan_in), from a seeded hash.
    static AttentionWeights seeded(std::size_t d_model, std::size_t d_head, std::size_t text_dim,
                                   std::size_t image_dim, std::uint64_t seed);

    /// Throws InvalidArgument when the projections disagree on d_head.
    void validate() const;
};

/// Row-wise softmax with max subtraction.
Matrix softmax_rows(Matrix logits);

/// softmax(Q K^T / sqrt(d_head)) as an n_query x n_key matrix.
Matrix attention_probabilities(const Matrix& queries, const Matrix& keys);

struct AttentionTerms {
    Matrix text;   // softmax(Q K_T^T / sqrt d) V_T
    Matrix image;  // softmax(Q K_I^T / sqrt d) V_I
};

/// Both branches separately, before weighting by lambda.
AttentionTerms attention_terms(const Matrix& x, const ConditionBundle& bundle, const AttentionWeights& w);

/// text term + lambda * image term. `x` is n x d_model; result is n x d_head.
Matrix attend(const Matrix& x, const ConditionBundle& bundle, const AttentionWeights& w);

/// Throws InvalidArgument unless x, bundle and weights have consistent widths.
void check_attention_shapes(const Matrix& x, const ConditionBundle& bundle, const AttentionWeights& w);

}  // namespace resmaster
