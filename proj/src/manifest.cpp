// SPDX-License-Identifier: Apache-2.0
#include "resmaster/manifest.hpp"

#include <json.hpp>

#include "resmaster/errors.hpp"

namespace resmaster {

std::string write_manifest(const PatchLayout& layout, const std::string& global_prompt,
                           const CaptionManifest* captions) {
    using nlohmann::ordered_json;
    if (captions && captions->size() != layout.count()) {
        throw InvalidArgument("write_manifest: caption count does not match the layout");
    }
    ordered_json rects = ordered_json::array();
    for (const auto& r : layout.rects) rects.push_back({r.top, r.left, r.height, r.width});

    ordered_json patches = ordered_json::object();
    for (std::size_t i = 0; i < layout.count(); ++i) {
        patches[std::to_string(i)] = captions ? captions->captions[i] : std::string();
    }

    ordered_json doc;
    doc["version"] = kManifestVersion;
    doc["global_prompt"] = global_prompt;
    doc["instruction"] = std::string(kCaptionInstruction);
    doc["patch_count"] = layout.count();
    doc["layout"] = {
        {"grid", {layout.grid_h, layout.grid_w}},
        {"window", {layout.win_h, layout.win_w}},
        {"stride", {layout.stride_h, layout.stride_w}},
        {"rects", rects},
    };
    doc["patches"] = patches;
    return doc.dump(2) + "\n";
}

}  // namespace resmaster
