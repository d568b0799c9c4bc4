/*
 * Copyright (C) 2026 The Transluce Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <optional>
#include <string>

#include "transluce/synth.hpp"

namespace transluce {

inline constexpr const char* kSceneSchemaId = "transluce-scene-v1";

/// A scene document: the renderable spec plus, optionally, explicit SH
/// illumination coefficients (otherwise the direct renderer projects the
/// environment map).
struct SceneDocument {
    SceneSpec spec;
    std::optional<Sh3x9> sh;
};

/// Parses a scene JSON file. Malformed documents raise SchemaError with a
/// field diagnostic; wrong $schema raises SchemaVersionMismatchError.
SceneDocument load_scene_json(const std::string& path);
SceneDocument parse_scene_json(const std::string& text, const std::string& origin = "<string>");

std::string scene_json_text(const SceneDocument& doc);
void save_scene_json(const SceneDocument& doc, const std::string& path);

/// SH coefficients the direct renderer should use for this document:
/// explicit coefficients when present, else a seeded projection of the
/// environment map.
Sh3x9 document_sh(const SceneDocument& doc, int threads = 1);

/// Applies a "path.to.field=value" edit (e.g. "sss.alpha=0.9,0.5,0.5",
/// "sss.g=0.3", "flash_radiance=40"). Throws on unknown fields or
/// out-of-range values.
void apply_scene_edit(SceneDocument& doc, const std::string& assignment);

}  // namespace transluce
