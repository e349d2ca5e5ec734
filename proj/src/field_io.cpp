#include "homolab/field_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace homolab {

using nlohmann::json;

namespace {

std::vector<Complex> read_amplitude(const json& mode, int ncomp) {
  std::vector<Complex> amp(ncomp, 0.0);
  auto read_part = [&](const char* key, bool imag) {
    if (!mode.contains(key)) return;
    const json& part = mode.at(key);
    if (part.is_number()) {
      if (ncomp != 1) throw FieldError(std::string("mode '") + key + "' must list every component");
      amp[0] += imag ? Complex(0.0, part.get<double>()) : Complex(part.get<double>(), 0.0);
      return;
    }
    if (!part.is_array() || static_cast<int>(part.size()) != ncomp)
      throw FieldError(std::string("mode '") + key + "' has wrong component count");
    for (int c = 0; c < ncomp; ++c) {
      const double v = part[c].get<double>();
      amp[c] += imag ? Complex(0.0, v) : Complex(v, 0.0);
    }
  };
  read_part("re", false);
  read_part("im", true);
  return amp;
}

}  // namespace

PeriodicField checkerboard(int n, double low, double high) {
  if (n < 2 || n % 2 != 0) throw FieldError("checkerboard needs an even grid size");
  return PeriodicField::sampled(FieldKind::scalar, 2, 1, n,
                                [&](std::span<const double> y, std::span<double> out) {
                                  const bool a = y[0] < 0.5;
                                  const bool b = y[1] < 0.5;
                                  out[0] = (a != b) ? low : high;
                                });
}

PeriodicField field_from_json(const json& spec, const std::filesystem::path& base_dir) {
  try {
    const FieldKind kind = field_kind_from_string(spec.at("kind").get<std::string>());
    const int d = spec.value("d", 2);
    const int m = spec.value("m", 1);
    const int nc = component_count(kind, d, m);

    if (spec.contains("modes")) {
      std::vector<FourierMode> modes;
      for (const auto& mj : spec.at("modes")) {
        FourierMode mode;
        mode.k = mj.at("k").get<std::vector<int>>();
        mode.amp = read_amplitude(mj, nc);
        modes.push_back(std::move(mode));
      }
      return PeriodicField::fourier(kind, d, m, std::move(modes), spec.value("real", true));
    }
    if (spec.contains("constant")) {
      const json& c = spec.at("constant");
      std::vector<double> v = c.is_number() ? std::vector<double>{c.get<double>()} : c.get<std::vector<double>>();
      return PeriodicField::constant(kind, d, m, std::move(v));
    }
    if (spec.contains("grid")) {
      const json& g = spec.at("grid");
      const int n = g.at("N").get<int>();
      std::size_t total = nc;
      for (int i = 0; i < d; ++i) total *= static_cast<std::size_t>(n);
      std::filesystem::path path = g.at("samples").get<std::string>();
      if (path.is_relative()) path = base_dir / path;
      return PeriodicField::grid(kind, d, m, n, read_binary_grid(path, total));
    }
    if (spec.contains("checkerboard")) {
      const json& c = spec.at("checkerboard");
      const auto values = c.at("values").get<std::vector<double>>();
      if (values.size() != 2 || kind != FieldKind::scalar || d != 2)
        throw FieldError("checkerboard is a 2-D scalar field with two values");
      return checkerboard(c.at("N").get<int>(), values[0], values[1]);
    }
  } catch (const json::exception& e) {
    throw FieldError(std::string("malformed field spec: ") + e.what());
  }
  throw FieldError("field spec needs one of 'modes', 'constant', 'grid', 'checkerboard'");
}

PeriodicField load_field(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FieldError("cannot open field spec " + path.string());
  json spec;
  try {
    in >> spec;
  } catch (const json::exception& e) {
    throw FieldError("cannot parse " + path.string() + ": " + e.what());
  }
  return field_from_json(spec, path.parent_path());
}

json field_to_json(const PeriodicField& field) {
  json out;
  out["kind"] = to_string(field.kind());
  out["d"] = field.dimension();
  out["m"] = field.system_size();
  if (field.representation() == PeriodicField::Representation::grid) {
    out["grid"] = {{"N", field.grid_size()}};
    return out;
  }
  out["real"] = field.is_real();
  json modes = json::array();
  for (const auto& mode : field.modes()) {
    json re = json::array();
    json im = json::array();
    for (const auto& a : mode.amp) {
      re.push_back(a.real());
      im.push_back(a.imag());
    }
    modes.push_back({{"k", mode.k}, {"re", re}, {"im", im}});
  }
  out["modes"] = modes;
  return out;
}

std::vector<double> read_binary_grid(const std::filesystem::path& path, std::size_t count) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FieldError("cannot open grid samples " + path.string());
  std::vector<unsigned char> bytes(count * 8);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (static_cast<std::size_t>(in.gcount()) != bytes.size())
    throw FieldError("grid file " + path.string() + " is shorter than " + std::to_string(count) + " values");
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t bits = 0;
    for (int b = 7; b >= 0; --b) bits = (bits << 8) | bytes[i * 8 + b];
    out[i] = std::bit_cast<double>(bits);
  }
  return out;
}

void write_binary_grid(const std::filesystem::path& path, const std::vector<double>& values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FieldError("cannot write " + path.string());
  std::vector<unsigned char> bytes(values.size() * 8);
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(values[i]);
    for (int b = 0; b < 8; ++b) bytes[i * 8 + b] = static_cast<unsigned char>((bits >> (8 * b)) & 0xff);
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace homolab
