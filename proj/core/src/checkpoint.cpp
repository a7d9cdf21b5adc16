#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "asmr/error.hpp"
#include "asmr/model.hpp"

namespace asmr {

namespace {

constexpr std::string_view kMagic = "ASMR1";
constexpr std::string_view kMagicFamily = "ASMR";

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffU));
}

std::uint32_t get_u32(std::string_view in) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[i])) << (8 * i);
  return v;
}

void put_f64(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xffU));
}

double get_f64(const char* in) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[i])) << (8 * i);
  return std::bit_cast<double>(bits);
}

std::string hex_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::hex);
  return std::string(buf, ptr);
}

std::string join(const std::vector<std::size_t>& widths) {
  std::string s;
  for (std::size_t i = 0; i < widths.size(); ++i) {
    if (i != 0) s += ',';
    s += std::to_string(widths[i]);
  }
  return s;
}

[[noreturn]] void corrupt(const std::string& why) { throw Error(ErrorCode::CorruptCheckpoint, why); }

std::string encode(std::string_view kind, const SirenModel& net, const PartitionScheme* scheme,
                   const std::vector<const Tensor*>& params) {
  std::size_t count = 0;
  for (const auto* p : params) count += p->size();
  std::string header = "kind=" + std::string(kind) + "\n";
  header += "widths=" + join(net.widths) + "\n";
  header += "omega0=" + hex_double(net.omega0) + "\n";
  if (scheme != nullptr) header += "scheme=" + scheme->to_string() + "\n";
  header += "params=" + std::to_string(count) + "\n";

  std::string out(kMagic);
  put_u32(out, static_cast<std::uint32_t>(header.size()));
  out += header;
  out.reserve(out.size() + 8 * count);
  for (const auto* p : params) {
    for (double v : p->values()) put_f64(out, v);
  }
  return out;
}

std::map<std::string, std::string> parse_header(std::string_view text) {
  std::map<std::string, std::string> kv;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    if (nl == std::string_view::npos) corrupt("unterminated header line");
    const auto line = text.substr(0, nl);
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) corrupt("header line without '='");
    kv.emplace(std::string(line.substr(0, eq)), std::string(line.substr(eq + 1)));
    text.remove_prefix(nl + 1);
  }
  return kv;
}

const std::string& require(const std::map<std::string, std::string>& kv, const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end()) corrupt("header is missing '" + key + "'");
  return it->second;
}

std::vector<std::size_t> parse_widths(const std::string& text) {
  std::vector<std::size_t> widths;
  std::string_view rest = text;
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const auto tok = rest.substr(0, comma);
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size()) corrupt("bad widths '" + text + "'");
    widths.push_back(v);
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return widths;
}

double parse_hex_double(const std::string& text) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v, std::chars_format::hex);
  if (ec != std::errc{} || ptr != text.data() + text.size()) corrupt("bad omega0 '" + text + "'");
  return v;
}

void read_params(const std::vector<Tensor*>& params, std::string_view payload, std::size_t declared) {
  std::size_t count = 0;
  for (const auto* p : params) count += p->size();
  if (count != declared) corrupt("parameter count " + std::to_string(declared) + " does not match architecture");
  if (payload.size() != 8 * count) {
    corrupt("payload holds " + std::to_string(payload.size()) + " bytes, expected " + std::to_string(8 * count));
  }
  const char* cursor = payload.data();
  for (auto* p : params) {
    for (double& v : p->values()) {
      v = get_f64(cursor);
      cursor += 8;
    }
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) corrupt("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::ConfigError, "cannot write '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::ConfigError, "failed writing '" + path.string() + "'");
}

}  // namespace

std::string serialize(const SirenModel& model) { return encode("siren", model, nullptr, model.parameters()); }

std::string serialize(const AsmrModel& model) {
  return encode("asmr", model.backbone, &model.scheme, model.parameters());
}

std::variant<SirenModel, AsmrModel> deserialize(std::string_view bytes) {
  if (bytes.size() < kMagic.size() + 4) corrupt("file too short for a checkpoint header");
  if (bytes.substr(0, kMagic.size()) != kMagic) {
    if (bytes.substr(0, kMagicFamily.size()) == kMagicFamily) {
      throw Error(ErrorCode::VersionMismatch, "unsupported checkpoint version '" +
                                                  std::string(bytes.substr(0, kMagic.size())) + "'");
    }
    corrupt("bad magic");
  }
  const std::uint32_t header_len = get_u32(bytes.substr(kMagic.size(), 4));
  const std::size_t header_start = kMagic.size() + 4;
  if (bytes.size() < header_start + header_len) corrupt("truncated header");
  const auto kv = parse_header(bytes.substr(header_start, header_len));
  const auto payload = bytes.substr(header_start + header_len);

  const auto& kind = require(kv, "kind");
  const auto widths = parse_widths(require(kv, "widths"));
  const double omega0 = parse_hex_double(require(kv, "omega0"));
  std::size_t declared = 0;
  {
    const auto& p = require(kv, "params");
    auto [ptr, ec] = std::from_chars(p.data(), p.data() + p.size(), declared);
    if (ec != std::errc{} || ptr != p.data() + p.size()) corrupt("bad params count");
  }

  try {
    if (kind == "siren") {
      SirenModel m = init_siren(widths, omega0, 0);
      read_params(m.parameters(), payload, declared);
      return m;
    }
    if (kind == "asmr") {
      AsmrModel m = init_asmr(widths, omega0, PartitionScheme::parse(require(kv, "scheme")), 0);
      read_params(m.parameters(), payload, declared);
      return m;
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::CorruptCheckpoint) throw;
    corrupt(std::string("inconsistent header: ") + e.what());
  }
  throw Error(ErrorCode::VersionMismatch, "unknown model kind '" + kind + "'");
}

void save(const SirenModel& model, const std::filesystem::path& path) { write_file(path, serialize(model)); }
void save(const AsmrModel& model, const std::filesystem::path& path) { write_file(path, serialize(model)); }

std::variant<SirenModel, AsmrModel> load_model(const std::filesystem::path& path) {
  return deserialize(read_file(path));
}

SirenModel load_siren(const std::filesystem::path& path) {
  auto m = load_model(path);
  if (auto* s = std::get_if<SirenModel>(&m)) return std::move(*s);
  throw Error(ErrorCode::VersionMismatch, "'" + path.string() + "' holds an ASMR model, not a SIREN model");
}

AsmrModel load_asmr(const std::filesystem::path& path) {
  auto m = load_model(path);
  if (auto* a = std::get_if<AsmrModel>(&m)) return std::move(*a);
  throw Error(ErrorCode::VersionMismatch, "'" + path.string() + "' holds a SIREN model, not an ASMR model");
}

}  // namespace asmr
