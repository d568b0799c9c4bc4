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

#include "transluce/scene_json.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

using nlohmann::json;

namespace transluce {

// Implemented in synth.cpp.
json spec_to_json(const SceneSpec& spec);
SceneSpec spec_from_json(const json& j);

SceneDocument parse_scene_json(const std::string& text, const std::string& origin) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaError(origin + ": " + e.what());
    }
    try {
        std::string schema = j.at("$schema");
        if (schema != kSceneSchemaId)
            throw SchemaVersionMismatchError(origin + ": unsupported $schema '" + schema + "'");
        SceneDocument doc;
        doc.spec = spec_from_json(j);
        if (j.contains("illumination") && j.at("illumination").contains("sh")) {
            Sh3x9 sh{};
            const json& rows = j.at("illumination").at("sh");
            for (int c = 0; c < 3; ++c)
                for (int k = 0; k < 9; ++k) sh[c][k] = rows.at(c).at(k);
            doc.sh = sh;
        }
        doc.spec.sss.validate();
        doc.spec.camera.validate();
        return doc;
    } catch (const SchemaError&) {
        throw;
    } catch (const json::exception& e) {
        throw SchemaError(origin + ": " + e.what());
    }
}

SceneDocument load_scene_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MissingFileError("cannot open scene file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scene_json(ss.str(), path);
}

std::string scene_json_text(const SceneDocument& doc) {
    json j = spec_to_json(doc.spec);
    j["$schema"] = kSceneSchemaId;
    if (doc.sh) {
        json rows = json::array();
        for (int c = 0; c < 3; ++c) {
            json row = json::array();
            for (int k = 0; k < 9; ++k) row.push_back((*doc.sh)[c][k]);
            rows.push_back(row);
        }
        j["illumination"]["sh"] = rows;
    }
    return j.dump(2) + "\n";
}

void save_scene_json(const SceneDocument& doc, const std::string& path) {
    std::ofstream out(path);
    out << scene_json_text(doc);
    if (!out) throw IoError("cannot write scene file: " + path);
}

Sh3x9 document_sh(const SceneDocument& doc, int threads) {
    if (doc.sh) return *doc.sh;
    return project_envmap(realize_envmap(doc.spec), 200000, doc.spec.seed_illumination, threads);
}

namespace {

Spectrum parse_spectrum(const std::string& text) {
    Spectrum s;
    std::istringstream ss(text);
    std::string tok;
    int i = 0;
    while (std::getline(ss, tok, ',') && i < 3) s[i++] = std::stod(tok);
    if (i == 1) return Spectrum(s.r);
    if (i != 3) throw InvalidArgumentError("expected 1 or 3 comma-separated values: " + text);
    return s;
}

}  // namespace

void apply_scene_edit(SceneDocument& doc, const std::string& assignment) {
    size_t eq = assignment.find('=');
    if (eq == std::string::npos)
        throw InvalidArgumentError("edit must look like field=value: " + assignment);
    std::string field = assignment.substr(0, eq);
    std::string value = assignment.substr(eq + 1);

    if (field == "sss.sigma_t")
        doc.spec.sss.sigma_t = parse_spectrum(value);
    else if (field == "sss.alpha")
        doc.spec.sss.alpha = parse_spectrum(value);
    else if (field == "sss.g")
        doc.spec.sss.g = std::stod(value);
    else if (field == "flash_radiance")
        doc.spec.flash_radiance = std::stod(value);
    else if (field == "environment.yaw")
        doc.spec.env_yaw = std::stod(value);
    else if (field == "roughness.constant") {
        doc.spec.rough_constant = std::stod(value);
        doc.spec.rough_is_texture = false;
    } else
        throw InvalidArgumentError("unknown editable field: " + field);
    doc.spec.sss.validate();
    if (!(doc.spec.flash_radiance >= 0.0))
        throw OutOfRangeError("flash_radiance", doc.spec.flash_radiance);
}

}  // namespace transluce
