// SPDX-License-Identifier: Apache-2.0
#include "resmaster/conditioning.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "resmaster/errors.hpp"
#include "resmaster/hashing.hpp"

namespace resmaster {

ConditionBundle::ConditionBundle(TextEmbedding text_in, ImageEmbedding image_in, double lambda_in)
    : text(std::move(text_in)), image(std::move(image_in)), lambda(lambda_in) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw InvalidArgument("ConditionBundle: lambda must be finite and >= 0");
    }
    if (text.tokens() == 0 || text.dim() == 0) {
        throw InvalidArgument("ConditionBundle: empty text embedding");
    }
    if (image.tokens() == 0 || image.dim() == 0) {
        throw InvalidArgument("ConditionBundle: empty image embedding");
    }
}

TextEmbedding embed_text_stub(std::string_view text, std::size_t tokens, std::size_t dim, std::uint64_t seed) {
    if (text.empty()) {
        throw InvalidArgument("embed_text_stub: text must not be empty");
    }
    if (tokens == 0 || dim == 0) {
        throw InvalidArgument("embed_text_stub: tokens and dim must be >= 1");
    }
    const std::uint64_t base = fnv1a64(text, seed);
    Matrix m(tokens, dim);
    for (std::size_t r = 0; r < tokens; ++r) {
        const std::uint64_t row_hash = hash_combine(base, r);
        auto row = m.row(r);
        double norm2 = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            row[j] = to_signed_unit(hash_combine(row_hash, j));
            norm2 += row[j] * row[j];
        }
        if (norm2 == 0.0) {
            row[0] = 1.0;
            continue;
        }
        const double inv = 1.0 / std::sqrt(norm2);
        for (auto& v : row) v *= inv;
    }
    return {std::move(m)};
}

namespace {

// weights[o][i]: share of source index i inside output bin o (bins partition [0, in)).
std::vector<std::vector<double>> area_weights(std::size_t in, std::size_t out) {
    std::vector<std::vector<double>> w(out, std::vector<double>(in, 0.0));
    const double bin = static_cast<double>(in) / static_cast<double>(out);
    for (std::size_t o = 0; o < out; ++o) {
        const double lo = bin * static_cast<double>(o);
        const double hi = bin * static_cast<double>(o + 1);
        for (std::size_t i = 0; i < in; ++i) {
            const double overlap = std::min(hi, static_cast<double>(i + 1)) - std::max(lo, static_cast<double>(i));
            if (overlap > 0.0) w[o][i] = overlap / bin;
        }
    }
    return w;
}

}  // namespace

std::vector<double> image_prompt_features(const LatentGrid& patch) {
    if (patch.empty()) {
        throw InvalidArgument("image_prompt_features: empty patch");
    }
    const std::size_t c = patch.channels();
    const std::vector<double> means = patch.channel_means();
    std::vector<double> features(means);

    const std::size_t cells = patch.height() * patch.width();
    std::vector<double> var(c, 0.0);
    auto d = patch.data();
    for (std::size_t i = 0; i < cells; ++i) {
        for (std::size_t ch = 0; ch < c; ++ch) {
            const double dev = d[i * c + ch] - means[ch];
            var[ch] += dev * dev;
        }
    }
    for (double v : var) features.push_back(std::sqrt(v / static_cast<double>(cells)));

    const auto wy = area_weights(patch.height(), kThumbnailSide);
    const auto wx = area_weights(patch.width(), kThumbnailSide);
    for (std::size_t oy = 0; oy < kThumbnailSide; ++oy) {
        for (std::size_t ox = 0; ox < kThumbnailSide; ++ox) {
            for (std::size_t ch = 0; ch < c; ++ch) {
                double acc = 0.0;
                for (std::size_t y = 0; y < patch.height(); ++y) {
                    if (wy[oy][y] == 0.0) continue;
                    for (std::size_t x = 0; x < patch.width(); ++x) {
                        if (wx[ox][x] == 0.0) continue;
                        acc += wy[oy][y] * wx[ox][x] * patch.at(y, x, ch);
                    }
                }
                features.push_back(acc);
            }
        }
    }
    return features;
}

ImageEmbedding encode_image_prompt_stub(const LatentGrid& patch, std::size_t tokens, std::size_t dim,
                                        std::uint64_t seed) {
    if (tokens == 0 || dim == 0) {
        throw InvalidArgument("encode_image_prompt_stub: tokens and dim must be >= 1");
    }
    const std::vector<double> features = image_prompt_features(patch);
    const double scale = std::sqrt(3.0 / static_cast<double>(features.size()));
    const std::uint64_t base = splitmix64(seed ^ 0x1A6E5EEDULL);
    Matrix m(tokens, dim);
    auto out = m.data();
    for (std::size_t e = 0; e < out.size(); ++e) {
        const std::uint64_t row_hash = hash_combine(base, e);
        double acc = 0.0;
        for (std::size_t f = 0; f < features.size(); ++f) {
            acc += to_signed_unit(hash_combine(row_hash, f)) * features[f];
        }
        out[e] = acc * scale;
    }
    return {std::move(m)};
}

CaptionManifest CaptionManifest::uniform(std::string global_prompt, std::size_t patch_count) {
    CaptionManifest m;
    m.captions.assign(patch_count, global_prompt);
    m.global_prompt = std::move(global_prompt);
    return m;
}

CaptionManifest parse_caption_manifest(std::string_view text, std::size_t patch_count, const std::string& origin) {
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        // Report line/column alongside the byte offset nlohmann gives us.
        std::size_t line = 1;
        std::size_t column = 1;
        const std::size_t limit = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t i = 0; i < limit; ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        throw IoError(origin + ": malformed manifest at line " + std::to_string(line) + ", column " +
                      std::to_string(column) + ": " + e.what());
    }

    auto fail = [&](const std::string& msg) -> IoError { return IoError(origin + ": " + msg); };
    if (!doc.is_object()) throw fail("manifest must be a JSON object");
    if (!doc.contains("version") || !doc["version"].is_number_integer()) throw fail("missing integer 'version'");
    if (doc["version"].get<int>() != kManifestVersion) {
        throw fail("unsupported manifest version " + doc["version"].dump());
    }
    if (!doc.contains("global_prompt") || !doc["global_prompt"].is_string()) {
        throw fail("missing string 'global_prompt'");
    }

    CaptionManifest m;
    m.global_prompt = doc["global_prompt"].get<std::string>();
    if (doc.contains("instruction")) {
        if (!doc["instruction"].is_string()) throw fail("'instruction' must be a string");
        if (doc["instruction"].get<std::string>() != kCaptionInstruction) {
            throw fail("'instruction' must read \"" + std::string(kCaptionInstruction) + "\"");
        }
    }
    if (doc.contains("patch_count")) {
        if (!doc["patch_count"].is_number_unsigned()) throw fail("'patch_count' must be a non-negative integer");
        const auto declared = doc["patch_count"].get<std::size_t>();
        if (declared != patch_count) {
            throw fail("manifest declares " + std::to_string(declared) + " patches but the layout has " +
                       std::to_string(patch_count));
        }
    }

    std::vector<std::optional<std::string>> slots(patch_count);
    if (doc.contains("patches")) {
        const json& patches = doc["patches"];
        if (!patches.is_object()) throw fail("'patches' must be an object mapping index to caption");
        for (const auto& [key, value] : patches.items()) {
            std::size_t index = 0;
            std::size_t consumed = 0;
            try {
                index = std::stoul(key, &consumed);
            } catch (const std::exception&) {
                consumed = 0;
            }
            if (consumed != key.size() || key.empty()) throw fail("patch key '" + key + "' is not an index");
            if (index >= patch_count) {
                throw fail("patch index " + key + " outside layout of " + std::to_string(patch_count) + " patches");
            }
            if (!value.is_string()) throw fail("caption for patch " + key + " must be a string");
            slots[index] = value.get<std::string>();
        }
    }

    m.captions.reserve(patch_count);
    for (std::size_t i = 0; i < patch_count; ++i) {
        if (slots[i] && !slots[i]->empty()) {
            m.captions.push_back(*slots[i]);
        } else {
            m.captions.push_back(m.global_prompt);
            m.warnings.push_back(origin + ": patch " + std::to_string(i) +
                                 " has no caption; using the global prompt");
        }
    }
    return m;
}

CaptionManifest load_caption_manifest(const std::filesystem::path& path, std::size_t patch_count) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open manifest " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_caption_manifest(buf.str(), patch_count, path.string());
}

}  // namespace resmaster
