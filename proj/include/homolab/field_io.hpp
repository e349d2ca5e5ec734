#pragma once

#include "homolab/periodic_field.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace homolab {

/// Field specification documents.
///
///   {"kind": "scalar", "d": 2, "modes": [{"k": [1, 0], "re": 0.5, "im": 0}]}
///   {"kind": "tensor4", "d": 2, "m": 1, "real": true,
///    "modes": [{"k": [0, 0], "re": [1, 0, 0, 1]}]}
///   {"kind": "scalar", "d": 2, "grid": {"N": 256, "samples": "a.bin"}}
///   {"kind": "scalar", "d": 2, "checkerboard": {"N": 512, "values": [1, 4]}}
///
/// Grid sample files hold row-major little-endian float64 values with shape
/// (N, ..., N, components). Relative sample paths resolve against `base_dir`.
PeriodicField field_from_json(const nlohmann::json& spec, const std::filesystem::path& base_dir = {});
PeriodicField load_field(const std::filesystem::path& path);
nlohmann::json field_to_json(const PeriodicField& field);

std::vector<double> read_binary_grid(const std::filesystem::path& path, std::size_t count);
void write_binary_grid(const std::filesystem::path& path, const std::vector<double>& values);

/// Scalar two-phase checkerboard on an n^2 grid: values[0] where exactly one
/// coordinate lies in the lower half of the cell, values[1] otherwise.
PeriodicField checkerboard(int n, double low, double high);

}  // namespace homolab
