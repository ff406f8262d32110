// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "resmaster/conditioning.hpp"
#include "resmaster/tiler.hpp"

namespace resmaster {

/// Manifest document for `layout`: version, global prompt, captioning
/// instruction, patch count, the layout geometry with every rect, and one
/// caption slot per patch. Slots are empty strings unless `captions` is given.
std::string write_manifest(const PatchLayout& layout, const std::string& global_prompt,
                           const CaptionManifest* captions = nullptr);

}  // namespace resmaster
