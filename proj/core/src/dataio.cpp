#include "asmr/dataio.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "asmr/error.hpp"

namespace asmr {

namespace {

std::string read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::TruncatedFile, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_all(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::ConfigError, "cannot write '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::ConfigError, "failed writing '" + path.string() + "'");
}

std::uint32_t get_le(std::string_view bytes, std::size_t at, int width) {
  std::uint32_t v = 0;
  for (int i = 0; i < width; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[at + static_cast<std::size_t>(i)])) << (8 * i);
  }
  return v;
}

void put_le(std::string& out, std::uint32_t v, int width) {
  for (int i = 0; i < width; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffU));
}

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

/// Reads one whitespace-delimited header integer, skipping '#' comments.
std::int64_t pnm_int(std::string_view bytes, std::size_t& pos, const std::filesystem::path& path) {
  while (pos < bytes.size()) {
    if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(bytes[pos])) != 0) {
      ++pos;
    } else {
      break;
    }
  }
  std::int64_t v = 0;
  std::size_t digits = 0;
  while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos])) != 0) {
    v = v * 10 + (bytes[pos] - '0');
    ++pos;
    ++digits;
    if (v > (1 << 24)) throw Error(ErrorCode::TruncatedFile, "header value too large in '" + path.string() + "'");
  }
  if (digits == 0) throw Error(ErrorCode::TruncatedFile, "incomplete header in '" + path.string() + "'");
  return v;
}

void write_pnm(const Grid& grid, const std::filesystem::path& path, std::size_t channels, const char* magic) {
  grid.validate();
  if (grid.dims() != 2 || grid.channels != channels) {
    throw Error(ErrorCode::HeaderMismatch, std::string(magic) + " needs a 2-D grid with " + std::to_string(channels) +
                                               " channel(s)");
  }
  std::string out = std::string(magic) + "\n" + std::to_string(grid.extents[1]) + " " +
                    std::to_string(grid.extents[0]) + "\n255\n";
  out.reserve(out.size() + grid.values.size());
  for (double v : grid.values) out.push_back(static_cast<char>(to_byte(v)));
  write_all(path, out);
}

}  // namespace

std::int64_t Grid::points() const noexcept {
  std::int64_t n = 1;
  for (auto e : extents) n *= e;
  return n;
}

void Grid::validate() const {
  if (extents.empty() || channels == 0) throw Error(ErrorCode::HeaderMismatch, "grid has no axes or channels");
  for (auto e : extents) {
    if (e <= 0) throw Error(ErrorCode::HeaderMismatch, "grid extents must be positive");
  }
  if (values.size() != static_cast<std::size_t>(points()) * channels) {
    throw Error(ErrorCode::HeaderMismatch, "grid holds " + std::to_string(values.size()) + " values, shape needs " +
                                               std::to_string(static_cast<std::size_t>(points()) * channels));
  }
}

Tensor Grid::normalized() const {
  validate();
  Shape shape(extents.begin(), extents.end());
  shape.push_back(channels);
  Tensor t(std::move(shape));
  for (std::size_t i = 0; i < values.size(); ++i) {
    t[i] = is_signed ? values[i] / peak : 2.0 * values[i] / peak - 1.0;
  }
  return t;
}

Grid Grid::denormalize(const Tensor& t, const Grid& like) {
  Grid g;
  g.extents = like.extents;
  g.channels = like.channels;
  g.peak = like.peak;
  g.is_signed = like.is_signed;
  if (t.size() != static_cast<std::size_t>(like.points()) * like.channels) {
    throw Error(ErrorCode::ShapeMismatch, "prediction size does not match the target grid");
  }
  g.values.resize(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    g.values[i] = like.is_signed ? t[i] * like.peak : (t[i] + 1.0) * 0.5 * like.peak;
  }
  return g;
}

Grid crop_center(const Grid& grid, const std::vector<std::int64_t>& extents) {
  grid.validate();
  if (extents.size() != grid.dims()) throw Error(ErrorCode::ExtentMismatch, "crop needs one extent per axis");
  std::vector<std::int64_t> offset(extents.size());
  for (std::size_t a = 0; a < extents.size(); ++a) {
    if (extents[a] <= 0 || extents[a] > grid.extents[a]) {
      throw Error(ErrorCode::ExtentMismatch, "cannot crop axis " + std::to_string(a) + " of extent " +
                                                 std::to_string(grid.extents[a]) + " to " + std::to_string(extents[a]));
    }
    offset[a] = (grid.extents[a] - extents[a]) / 2;
  }
  Grid out = grid;
  out.extents = extents;
  out.values.assign(static_cast<std::size_t>(out.points()) * grid.channels, 0.0);
  const std::size_t d = extents.size();
  for (std::int64_t p = 0; p < out.points(); ++p) {
    std::int64_t rem = p;
    std::int64_t src = 0;
    std::int64_t stride = 1;
    for (std::size_t a = d; a-- > 0;) {
      const auto x = rem % extents[a];
      rem /= extents[a];
      src += (x + offset[a]) * stride;
      stride *= grid.extents[a];
    }
    for (std::size_t c = 0; c < grid.channels; ++c) {
      out.values[static_cast<std::size_t>(p) * grid.channels + c] =
          grid.values[static_cast<std::size_t>(src) * grid.channels + c];
    }
  }
  return out;
}

Grid read_pnm(const std::filesystem::path& path) {
  const std::string bytes = read_all(path);
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    throw Error(ErrorCode::BadMagic, "'" + path.string() + "' is not a binary PGM/PPM (P5/P6)");
  }
  const std::size_t channels = bytes[1] == '5' ? 1 : 3;
  std::size_t pos = 2;
  const auto width = pnm_int(bytes, pos, path);
  const auto height = pnm_int(bytes, pos, path);
  const auto maxval = pnm_int(bytes, pos, path);
  if (maxval != 255) throw Error(ErrorCode::UnsupportedMaxval, "maxval " + std::to_string(maxval));
  if (pos >= bytes.size() || std::isspace(static_cast<unsigned char>(bytes[pos])) == 0) {
    throw Error(ErrorCode::TruncatedFile, "missing raster in '" + path.string() + "'");
  }
  ++pos;
  if (width <= 0 || height <= 0) throw Error(ErrorCode::TruncatedFile, "empty image '" + path.string() + "'");
  const auto count = static_cast<std::size_t>(width * height) * channels;
  if (bytes.size() - pos < count) {
    throw Error(ErrorCode::TruncatedFile, "'" + path.string() + "' holds " + std::to_string(bytes.size() - pos) +
                                              " of " + std::to_string(count) + " raster bytes");
  }
  Grid g;
  g.extents = {height, width};
  g.channels = channels;
  g.peak = 255.0;
  g.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) g.values[i] = static_cast<unsigned char>(bytes[pos + i]);
  return g;
}

Grid read_pgm(const std::filesystem::path& path) {
  Grid g = read_pnm(path);
  if (g.channels != 1) throw Error(ErrorCode::BadMagic, "'" + path.string() + "' is a PPM, expected PGM");
  return g;
}

Grid read_ppm(const std::filesystem::path& path) {
  Grid g = read_pnm(path);
  if (g.channels != 3) throw Error(ErrorCode::BadMagic, "'" + path.string() + "' is a PGM, expected PPM");
  return g;
}

void write_pgm(const Grid& grid, const std::filesystem::path& path) { write_pnm(grid, path, 1, "P5"); }
void write_ppm(const Grid& grid, const std::filesystem::path& path) { write_pnm(grid, path, 3, "P6"); }

Grid read_wav(const std::filesystem::path& path, std::size_t max_samples) {
  const std::string bytes = read_all(path);
  if (bytes.size() < 12 || bytes.compare(0, 4, "RIFF") != 0 || bytes.compare(8, 4, "WAVE") != 0) {
    throw Error(ErrorCode::BadMagic, "'" + path.string() + "' is not a RIFF/WAVE file");
  }
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::string_view id(bytes.data() + pos, 4);
    const std::size_t size = get_le(bytes, pos + 4, 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size() && id != "data") {
      throw Error(ErrorCode::TruncatedFile, "chunk overruns '" + path.string() + "'");
    }
    if (id == "fmt ") {
      if (size < 16) throw Error(ErrorCode::TruncatedFile, "short fmt chunk");
      const auto format = get_le(bytes, body, 2);
      const auto channels = get_le(bytes, body + 2, 2);
      const auto bits = get_le(bytes, body + 14, 2);
      if (format != 1 || channels != 1 || bits != 16) {
        throw Error(ErrorCode::UnsupportedEncoding, "need PCM16 mono, got format " + std::to_string(format) + ", " +
                                                        std::to_string(channels) + " channel(s), " +
                                                        std::to_string(bits) + " bits");
      }
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw Error(ErrorCode::UnsupportedEncoding, "data chunk before fmt chunk");
      if (body + size > bytes.size()) throw Error(ErrorCode::TruncatedFile, "data chunk overruns file");
      const std::size_t available = size / 2;
      const std::size_t wanted = max_samples == 0 ? available : max_samples;
      if (available < wanted) {
        throw Error(ErrorCode::TooShort, "'" + path.string() + "' has " + std::to_string(available) +
                                             " samples, need " + std::to_string(wanted));
      }
      Grid g;
      g.extents = {static_cast<std::int64_t>(wanted)};
      g.channels = 1;
      g.peak = 1.0;
      g.is_signed = true;
      g.values.resize(wanted);
      for (std::size_t i = 0; i < wanted; ++i) {
        const auto raw = static_cast<std::int16_t>(get_le(bytes, body + 2 * i, 2));
        g.values[i] = static_cast<double>(raw) / 32768.0;
      }
      return g;
    }
    pos = body + size + (size & 1U);
  }
  throw Error(ErrorCode::TruncatedFile, "'" + path.string() + "' has no " + (have_fmt ? "data" : "fmt") + " chunk");
}

void write_wav(const Grid& grid, const std::filesystem::path& path, std::uint32_t sample_rate) {
  grid.validate();
  if (grid.dims() != 1 || grid.channels != 1) throw Error(ErrorCode::HeaderMismatch, "WAV needs a 1-D mono grid");
  const auto n = static_cast<std::uint32_t>(grid.values.size());
  std::string out = "RIFF";
  put_le(out, 36 + 2 * n, 4);
  out += "WAVEfmt ";
  put_le(out, 16, 4);
  put_le(out, 1, 2);
  put_le(out, 1, 2);
  put_le(out, sample_rate, 4);
  put_le(out, sample_rate * 2, 4);
  put_le(out, 2, 2);
  put_le(out, 16, 2);
  out += "data";
  put_le(out, 2 * n, 4);
  for (double v : grid.values) {
    const double scaled = std::round(v / grid.peak * 32768.0);
    const auto s = static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
    put_le(out, static_cast<std::uint16_t>(s), 2);
  }
  write_all(path, out);
}

Grid read_raw_grid(const std::filesystem::path& path) {
  const std::string bytes = read_all(path);
  if (bytes.size() < 5 || bytes.compare(0, 5, "GRID1") != 0) {
    throw Error(ErrorCode::BadMagic, "'" + path.string() + "' is not a GRID1 file");
  }
  std::size_t pos = 5;
  auto next_u32 = [&]() {
    if (pos + 4 > bytes.size()) throw Error(ErrorCode::TruncatedFile, "truncated header in '" + path.string() + "'");
    const auto v = get_le(bytes, pos, 4);
    pos += 4;
    return v;
  };
  const auto dims = next_u32();
  if (dims == 0 || dims > 8) throw Error(ErrorCode::HeaderMismatch, "unsupported dimension count " + std::to_string(dims));
  Grid g;
  g.peak = 1.0;
  for (std::uint32_t a = 0; a < dims; ++a) g.extents.push_back(next_u32());
  g.channels = next_u32();
  std::size_t count = g.channels;
  for (auto e : g.extents) count *= static_cast<std::size_t>(e);
  if (count == 0 || bytes.size() - pos != 8 * count) {
    throw Error(ErrorCode::HeaderMismatch, "header describes " + std::to_string(count) + " values, payload holds " +
                                               std::to_string((bytes.size() - pos) / 8) + (((bytes.size() - pos) % 8) != 0 ? "+" : ""));
  }
  g.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) {
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[pos + 8 * i + static_cast<std::size_t>(b)]))
              << (8 * b);
    }
    g.values[i] = std::bit_cast<double>(bits);
  }
  return g;
}

void write_raw_grid(const Grid& grid, const std::filesystem::path& path) {
  grid.validate();
  std::string out = "GRID1";
  put_le(out, static_cast<std::uint32_t>(grid.dims()), 4);
  for (auto e : grid.extents) put_le(out, static_cast<std::uint32_t>(e), 4);
  put_le(out, static_cast<std::uint32_t>(grid.channels), 4);
  out.reserve(out.size() + 8 * grid.values.size());
  for (double v : grid.values) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xffU));
  }
  write_all(path, out);
}

Grid read_grid_file(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") return read_pnm(path);
  if (ext == ".wav") return read_wav(path);
  if (ext == ".grid") return read_raw_grid(path);
  throw Error(ErrorCode::BadMagic, "unrecognized data file extension '" + ext + "'");
}

void write_grid_file(const Grid& grid, const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".pgm") return write_pgm(grid, path);
  if (ext == ".ppm") return write_ppm(grid, path);
  if (ext == ".wav") return write_wav(grid, path);
  if (ext == ".grid") return write_raw_grid(grid, path);
  throw Error(ErrorCode::ConfigError, "unrecognized output extension '" + ext + "'");
}

}  // namespace asmr
