#include "isop/raster_io.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace isop {

namespace {

using nlohmann::json;

void write_sidecar(const RasterSet& a, const std::string& path) {
  json j;
  j["dim"] = a.dim();
  j["origin"] = std::vector<double>(a.origin().data(), a.origin().data() + a.dim());
  j["cell"] = a.cell();
  j["shape"] = std::vector<int>(a.shape().begin(), a.shape().begin() + a.dim());
  std::ofstream out(path + ".json");
  if (!out) throw std::runtime_error("cannot write " + path + ".json");
  out << j.dump(2) << '\n';
}

// Reads the next whitespace-separated PGM header token, skipping comments.
std::string pgm_token(std::istream& in) {
  std::string tok;
  char c;
  while (in.get(c)) {
    if (c == '#') {
      std::string line;
      std::getline(in, line);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(c);
  }
  return tok;
}

}  // namespace

void write_raster(const RasterSet& a, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  if (a.dim() == 2) {
    const int w = a.shape()[0], h = a.shape()[1];
    out << "P5\n" << w << ' ' << h << "\n255\n";
    std::vector<unsigned char> row(static_cast<std::size_t>(w));
    for (int r = 0; r < h; ++r) {
      const int j = h - 1 - r;
      for (int i = 0; i < w; ++i) row[static_cast<std::size_t>(i)] = a.test(a.index({i, j, 0})) ? 255 : 0;
      out.write(reinterpret_cast<const char*>(row.data()), w);
    }
  } else {
    for (std::uint64_t word : a.words())
      for (int b = 0; b < 8; ++b) out.put(static_cast<char>((word >> (8 * b)) & 0xff));
  }
  if (!out) throw std::runtime_error("failed writing " + path);
  write_sidecar(a, path);
}

RasterSet read_raster(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::optional<json> meta;
  if (std::filesystem::exists(path + ".json")) {
    std::ifstream m(path + ".json");
    meta = json::parse(m);
  }
  auto grid_from_meta = [&](int dim) {
    const auto origin = (*meta)["origin"].get<std::vector<double>>();
    const auto shape = (*meta)["shape"].get<std::vector<int>>();
    if (static_cast<int>(origin.size()) != dim || static_cast<int>(shape.size()) != dim)
      throw std::runtime_error("sidecar dimension mismatch for " + path);
    Point o(dim);
    for (int k = 0; k < dim; ++k) o(k) = origin[static_cast<std::size_t>(k)];
    std::array<int, 3> s{1, 1, 1};
    for (int k = 0; k < dim; ++k) s[k] = shape[static_cast<std::size_t>(k)];
    return RasterSet(dim, o, (*meta)["cell"].get<double>(), s);
  };

  const bool pgm = !meta || (*meta)["dim"].get<int>() == 2;
  if (pgm) {
    if (pgm_token(in) != "P5") throw std::runtime_error(path + " is not a binary PGM (P5)");
    const int w = std::stoi(pgm_token(in)), h = std::stoi(pgm_token(in)), maxval = std::stoi(pgm_token(in));
    if (w < 1 || h < 1 || maxval < 1 || maxval > 255) throw std::runtime_error("unsupported PGM header in " + path);
    RasterSet a = meta ? grid_from_meta(2) : [&] {
      const double cell = 2.0 / std::max(w, h);
      Point o(2);
      o << -0.5 * w * cell, -0.5 * h * cell;
      return RasterSet(2, o, cell, {w, h, 1});
    }();
    if (a.shape()[0] != w || a.shape()[1] != h) throw std::runtime_error("sidecar shape disagrees with PGM header");
    std::vector<unsigned char> row(static_cast<std::size_t>(w));
    for (int r = 0; r < h; ++r) {
      if (!in.read(reinterpret_cast<char*>(row.data()), w)) throw std::runtime_error("truncated PGM " + path);
      for (int i = 0; i < w; ++i)
        if (row[static_cast<std::size_t>(i)]) a.set(a.index({i, h - 1 - r, 0}));
    }
    return a;
  }
  RasterSet a = grid_from_meta(3);
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() != a.words().size() * 8) throw std::runtime_error("bit dump size mismatch in " + path);
  for (std::size_t i = 0; i < a.size(); ++i)
    if ((static_cast<unsigned char>(bytes[i >> 3]) >> (i & 7)) & 1) a.set(i);
  return a;
}

}  // namespace isop
