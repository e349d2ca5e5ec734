#pragma once

#include "homolab/surface.hpp"

#include <json.hpp>

#include <filesystem>

namespace homolab {

/// Surface specification documents.
///
///   {"type": "circle", "radius": 1, "center": [0, 0]}
///   {"type": "ellipse", "a": 2, "b": 1}
///   {"type": "square", "side": "1", "origin": ["0", "0"]}          exact rational vertices
///   {"type": "polygon", "vertices": [[0, 0], [1, 0], [0, 1]]}
///   {"type": "polygon", "radicand": 2,
///    "vertices": [[{"a": "1", "b": "0"}, {"a": "0", "b": "1/2"}], ...]}  a + b sqrt(radicand)
///   {"type": "superellipse", "a": 1, "b": 1, "p": 4}
///   {"type": "sphere", "radius": 1}
///   {"type": "ellipsoid", "axes": [1, 2, 3]}
///   {"type": "revolution", "profile": [[0, -1], [1, -1], [1, 1], [0, 1]]}  (r, z) polyline
///
/// Planar surfaces accept "rotate" (radians) and every surface "translate".
SurfaceChart surface_from_json(const nlohmann::json& spec);
SurfaceChart load_surface(const std::filesystem::path& path);

}  // namespace homolab
