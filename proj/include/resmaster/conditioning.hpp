// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "resmaster/grid.hpp"
#include "resmaster/matrix.hpp"

namespace resmaster {

/// tokens x dim text condition (stands in for a text encoder's output).
struct TextEmbedding {
    Matrix values;
    std::size_t tokens() const noexcept { return values.rows(); }
    std::size_t dim() const noexcept { return values.cols(); }
};

/// tokens x dim image-prompt condition.
struct ImageEmbedding {
    Matrix values;
    std::size_t tokens() const noexcept { return values.rows(); }
    std::size_t dim() const noexcept { return values.cols(); }
};

inline constexpr double kDefaultImagePromptWeight = 0.8;

/// Everything the decoupled cross-attention needs for one patch.
struct ConditionBundle {
    ConditionBundle(TextEmbedding text, ImageEmbedding image, double lambda = kDefaultImagePromptWeight);

    TextEmbedding text;
    ImageEmbedding image;
    double lambda;
};

/// Deterministic text "encoder": each row is a seeded hash of (text, row),
/// normalized to unit length. Throws InvalidArgument on empty text.
TextEmbedding embed_text_stub(std::string_view text, std::size_t tokens, std::size_t dim, std::uint64_t seed);

/// Feature vector of a patch before projection: per-channel means, then
/// per-channel standard deviations, then an 8x8 area-averaged thumbnail
/// (row-major, channels interleaved).
std::vector<double> image_prompt_features(const LatentGrid& patch);

inline constexpr std::size_t kThumbnailSide = 8;

/// Deterministic image-prompt "encoder": projects image_prompt_features by a
/// seeded pseudo-random matrix and reshapes the result to tokens x dim.
ImageEmbedding encode_image_prompt_stub(const LatentGrid& patch, std::size_t tokens, std::size_t dim,
                                        std::uint64_t seed);

inline constexpr std::string_view kCaptionInstruction = "Describe the following image patch in detail.";
inline constexpr int kManifestVersion = 1;

/// Per-patch captions plus the prompt they fall back to.
struct CaptionManifest {
    std::string global_prompt;
    std::string instruction = std::string(kCaptionInstruction);
    std::vector<std::string> captions;  // indexed by canonical patch index
    std::vector<std::string> warnings;  // fallbacks applied while loading

    std::size_t size() const noexcept { return captions.size(); }

    /// Every patch uses the global prompt.
    static CaptionManifest uniform(std::string global_prompt, std::size_t patch_count);
};

/// Reads a manifest document (see README for the schema). Patches without a
/// caption, or with an empty one, fall back to the global prompt and a warning
/// is recorded. Throws IoError on unreadable or malformed files (with the
/// parser's line/column), on a declared patch count other than `patch_count`,
/// and on indices outside [0, patch_count).
CaptionManifest load_caption_manifest(const std::filesystem::path& path, std::size_t patch_count);

/// Same as load_caption_manifest but from an in-memory document; `origin` names it in errors.
CaptionManifest parse_caption_manifest(std::string_view text, std::size_t patch_count, const std::string& origin);

}  // namespace resmaster
