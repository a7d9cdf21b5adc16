#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>
#include <variant>

#include "asmr/coords.hpp"
#include "asmr/dataio.hpp"
#include "asmr/metrics.hpp"
#include "asmr/model.hpp"
#include "asmr/profiler.hpp"

namespace asmr::cli {

namespace {

[[noreturn]] void config_error(const std::string& message) { throw Error(ErrorCode::ConfigError, message); }

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || text.empty()) config_error("bad value '" + text + "' for " + key);
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "1" || text == "true" || text == "yes" || text == "on") return true;
  if (text == "0" || text == "false" || text == "no" || text == "off") return false;
  config_error("bad boolean '" + text + "' for " + key);
}

std::string fmt(double v, int precision = 6) {
  std::ostringstream ss;
  ss.setf(std::ios::fixed);
  ss.precision(precision);
  ss << v;
  return ss.str();
}

std::string fmt_general(double v) {
  std::ostringstream ss;
  ss.precision(10);
  ss << v;
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) config_error("cannot write '" + path.string() + "'");
  out << text;
}

/// Flag values collected from one subcommand. Only flags that were actually
/// given override the config file.
class Overrides {
 public:
  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    options_.emplace_back(app->add_option(flag, values_[key], help), key);
  }
  void add_flag(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    flags_.emplace_back(app->add_flag(flag, help), key);
  }

  [[nodiscard]] std::map<std::string, std::string> given() const {
    std::map<std::string, std::string> kv;
    for (const auto& [opt, key] : options_) {
      if (opt->count() > 0) kv[key] = values_.at(key);
    }
    for (const auto& [opt, key] : flags_) {
      if (opt->count() > 0) kv[key] = "true";
    }
    return kv;
  }

 private:
  std::map<std::string, std::string> values_;
  std::vector<std::pair<CLI::Option*, std::string>> options_;
  std::vector<std::pair<CLI::Option*, std::string>> flags_;
};

void add_model_flags(CLI::App* app, Overrides& o) {
  o.add(app, "--model", "model", "asmr or siren");
  o.add(app, "--widths", "widths", "layer widths d_0,...,d_L, e.g. 2,256,256,256,1");
  o.add(app, "--omega0", "omega0", "sine frequency");
  o.add(app, "--scheme", "scheme", "bases of partition, e.g. 4x4x4x8 or axis0=4x4x4x8;axis1=4x4x6x8");
}

void add_train_flags(CLI::App* app, Overrides& o) {
  o.add(app, "--input", "input", "target signal (.pgm, .ppm, .wav, .grid)");
  o.add(app, "--out", "out", "output directory");
  o.add(app, "--seed", "seed", "random seed");
  o.add(app, "--iters", "iters", "training iterations");
  o.add(app, "--lr", "lr", "initial learning rate");
  o.add(app, "--lr-min", "lr_min", "cosine schedule floor");
  o.add(app, "--batch", "batch", "coordinates sampled per step (0 = full grid)");
  o.add(app, "--log-every", "log_every", "iterations between metric records");
  o.add(app, "--checkpoint-every", "checkpoint_every", "iterations between intermediate checkpoints (0 = off)");
  o.add(app, "--wav-samples", "wav_samples", "leading audio samples to fit");
  o.add_flag(app, "--crop-to-factorable", "crop_to_factorable", "center-crop the input to the scheme extents");
}

ExperimentConfig resolve_config(const std::string& config_path, const std::map<std::string, std::string>& given) {
  ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
  cfg.apply(given);
  if (cfg.model != "asmr" && cfg.model != "siren") config_error("model must be 'asmr' or 'siren'");
  return cfg;
}

Grid load_target(const ExperimentConfig& cfg) {
  if (cfg.input.empty()) config_error("no input file given (--input)");
  if (cfg.input.extension() == ".wav") return read_wav(cfg.input, cfg.wav_samples);
  return read_grid_file(cfg.input);
}

PartitionScheme resolve_scheme(const std::string& text, std::size_t dims) {
  if (text.empty()) config_error("an ASMR model needs --scheme");
  PartitionScheme s = PartitionScheme::parse(text);
  if (s.dims() == 1 && dims > 1) s = s.broadcast(dims);
  return s;
}

std::vector<std::size_t> resolve_widths(const ExperimentConfig& cfg, std::size_t dims, std::size_t channels) {
  if (cfg.widths.empty()) return {dims, 256, 256, 256, channels};
  if (cfg.widths.front() != dims || cfg.widths.back() != channels) {
    throw Error(ErrorCode::ExtentMismatch, "widths must start with the data dimension (" + std::to_string(dims) +
                                               ") and end with the channel count (" + std::to_string(channels) + ")");
  }
  return cfg.widths;
}

/// Applies the optional crop and checks the data against the scheme.
Grid prepare_target(const ExperimentConfig& cfg, Grid target, const PartitionScheme* scheme) {
  if (scheme == nullptr) return target;
  if (scheme->dims() != target.dims()) {
    throw Error(ErrorCode::ExtentMismatch, std::to_string(scheme->dims()) + "-axis scheme for " +
                                               std::to_string(target.dims()) + "-D data");
  }
  if (target.extents != scheme->extents() && cfg.crop_to_factorable) {
    target = crop_center(target, scheme->extents());
  }
  if (target.extents != scheme->extents()) {
    std::string have;
    for (auto e : target.extents) have += (have.empty() ? "" : "x") + std::to_string(e);
    throw Error(ErrorCode::ExtentMismatch, "data extents " + have + " differ from scheme " + scheme->to_string() +
                                               " (use --crop-to-factorable to center-crop)");
  }
  return target;
}

struct RunOutcome {
  std::string label;
  std::uint64_t params = 0;
  double macs_per_sample = 0.0;
  QualityReport quality;
  FitResult fit;
  Grid reconstruction;
};

std::string default_label(const ExperimentConfig& cfg, const std::vector<std::size_t>& widths) {
  if (!cfg.name.empty()) return cfg.name;
  return std::string(cfg.model == "asmr" ? "ASMR" : "SIREN") + "(" + std::to_string(widths.size() - 1) + ")";
}

/// Builds, fits and evaluates one configuration. Writes checkpoints when
/// `checkpoint_dir` is non-empty.
RunOutcome run_experiment(const ExperimentConfig& cfg, const Grid& raw_target,
                          const std::filesystem::path& checkpoint_dir, std::ostream& log) {
  RunOutcome outcome;
  const auto widths = resolve_widths(cfg, raw_target.dims(), raw_target.channels);
  outcome.label = default_label(cfg, widths);
  auto save_every = [&](const auto& model) {
    return [&, model_ptr = &model](const LogRecord& rec) {
      log << "iter " << rec.iter << " loss " << fmt(rec.loss, 8) << " psnr " << fmt(rec.psnr, 3) << '\n';
      if (!checkpoint_dir.empty() && cfg.checkpoint_every != 0 && rec.iter != 0 &&
          rec.iter % cfg.checkpoint_every == 0 && rec.iter != cfg.train.iterations) {
        save(*model_ptr, checkpoint_dir / ("model_iter" + std::to_string(rec.iter) + ".ckpt"));
      }
    };
  };
  if (cfg.model == "asmr") {
    const PartitionScheme scheme = resolve_scheme(cfg.scheme, raw_target.dims());
    const Grid target = prepare_target(cfg, raw_target, &scheme);
    AsmrModel model = init_asmr(widths, cfg.omega0, scheme, cfg.train.seed);
    outcome.fit = fit(model, target, cfg.train, save_every(model));
    outcome.reconstruction = reconstruct(model, target);
    outcome.quality = evaluate(outcome.reconstruction, target);
    const auto report = mac_asmr(widths, scheme);
    outcome.params = model.parameter_count();
    outcome.macs_per_sample = report.per_sample();
    if (!checkpoint_dir.empty()) save(model, checkpoint_dir / "model.ckpt");
  } else {
    std::optional<PartitionScheme> scheme;
    if (!cfg.scheme.empty()) scheme = resolve_scheme(cfg.scheme, raw_target.dims());
    const Grid target = prepare_target(cfg, raw_target, scheme ? &*scheme : nullptr);
    SirenModel model = init_siren(widths, cfg.omega0, cfg.train.seed);
    outcome.fit = fit(model, target, cfg.train, save_every(model));
    outcome.reconstruction = reconstruct(model, target);
    outcome.quality = evaluate(outcome.reconstruction, target);
    outcome.params = model.parameter_count();
    outcome.macs_per_sample = mac_siren(widths, static_cast<std::uint64_t>(target.points())).per_sample();
    if (!checkpoint_dir.empty()) save(model, checkpoint_dir / "model.ckpt");
  }
  return outcome;
}

std::string optional_cell(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

std::string reconstruction_name(const std::filesystem::path& input, const Grid& grid) {
  auto ext = input.extension().string();
  if (ext == ".pnm") ext = grid.channels == 3 ? ".ppm" : ".pgm";
  return "reconstruction" + ext;
}

int cmd_fit(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  const Grid target = load_target(cfg);
  std::filesystem::create_directories(cfg.out);
  const RunOutcome r = run_experiment(cfg, target, cfg.out, err);
  write_text(cfg.out / "metrics.csv", r.fit.metrics_csv());
  write_grid_file(r.reconstruction, cfg.out / reconstruction_name(cfg.input, r.reconstruction));
  out << "model,params,macs_per_sample,psnr,ssim\n"
      << r.label << ',' << r.params << ',' << fmt_general(r.macs_per_sample) << ',' << fmt(r.quality.psnr) << ','
      << optional_cell(r.quality.ssim) << '\n';
  return kOk;
}

int cmd_profile(const ExperimentConfig& cfg, std::uint64_t samples, bool sweep, std::size_t width,
                std::uint64_t base, std::size_t min_levels, std::size_t max_levels, const std::string& out_path,
                std::ostream& out) {
  std::string csv;
  if (sweep) {
    csv = depth_csv(sweep_depth(width, base, min_levels, max_levels));
  } else {
    if (cfg.widths.size() < 2) config_error("profile needs --widths");
    if (cfg.model == "asmr") {
      csv = mac_asmr(cfg.widths, resolve_scheme(cfg.scheme, cfg.widths.front())).to_csv();
    } else {
      std::uint64_t n = samples;
      if (n == 0 && !cfg.scheme.empty()) {
        n = static_cast<std::uint64_t>(resolve_scheme(cfg.scheme, cfg.widths.front()).total_points());
      }
      csv = mac_siren(cfg.widths, n == 0 ? 1 : n).to_csv();
    }
  }
  out << csv;
  if (!out_path.empty()) write_text(out_path, csv);
  return kOk;
}

int cmd_permute(const ExperimentConfig& cfg, bool mac_only, std::ostream& out, std::ostream& err) {
  std::optional<Grid> target;
  std::size_t dims = cfg.widths.empty() ? 0 : cfg.widths.front();
  if (!mac_only) {
    target = load_target(cfg);
    dims = target->dims();
  }
  if (dims == 0) config_error("permute --mac-only needs --widths");
  const PartitionScheme base = resolve_scheme(cfg.scheme, dims);
  if (base.dims() > 1) {
    for (std::size_t a = 1; a < base.dims(); ++a) {
      if (base.bases(a) != base.bases(0)) config_error("permute needs the same bases on every axis");
    }
  }
  // Distinct arrangements in lexicographic order of the sorted multiset.
  std::vector<std::int64_t> bases = base.bases(0);
  std::sort(bases.begin(), bases.end());
  std::vector<std::vector<std::int64_t>> arrangements;
  do {
    arrangements.push_back(bases);
  } while (std::next_permutation(bases.begin(), bases.end()));

  std::ostringstream csv;
  csv << "permutation,macs_per_sample,psnr,ssim\n";
  for (const auto& arrangement : arrangements) {
    const auto scheme = PartitionScheme::make(std::vector<std::vector<std::int64_t>>(dims, arrangement),
                                              base.extents());
    std::string label;
    for (auto b : arrangement) label += (label.empty() ? "" : "x") + std::to_string(b);
    ExperimentConfig run_cfg = cfg;
    run_cfg.scheme = scheme.to_string();
    const auto widths = mac_only ? cfg.widths : resolve_widths(cfg, dims, target->channels);
    const double macs = mac_asmr(widths, scheme).per_sample();
    csv << label << ',' << fmt_general(macs) << ',';
    if (mac_only) {
      csv << ",\n";
      continue;
    }
    err << "permutation " << label << '\n';
    const RunOutcome r = run_experiment(run_cfg, *target, {}, err);
    csv << fmt(r.quality.psnr) << ',' << optional_cell(r.quality.ssim) << '\n';
  }
  out << csv.str();
  if (!mac_only) {
    std::filesystem::create_directories(cfg.out);
    write_text(cfg.out / "permute.csv", csv.str());
  }
  return kOk;
}

int cmd_decompose(const std::string& coord_text, const std::string& scheme_text, std::ostream& out) {
  Coord x;
  std::string_view rest = coord_text;
  while (true) {
    const auto comma = rest.find(',');
    x.push_back(parse_number<std::int64_t>("coordinate", trim(std::string(rest.substr(0, comma)))));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  PartitionScheme scheme = PartitionScheme::parse(scheme_text);
  if (scheme.dims() == 1 && x.size() > 1) scheme = scheme.broadcast(x.size());
  const auto levels = decompose(x, scheme);
  std::string line;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (i != 0) line += ',';
    if (levels[i].size() == 1) {
      line += std::to_string(levels[i][0]);
    } else {
      line += '(';
      for (std::size_t a = 0; a < levels[i].size(); ++a) line += (a ? ":" : "") + std::to_string(levels[i][a]);
      line += ')';
    }
  }
  const Coord back = recompose(levels, scheme);
  std::string round_trip;
  for (std::size_t a = 0; a < back.size(); ++a) round_trip += (a ? "," : "") + std::to_string(back[a]);
  out << line << '\n' << "recompose=" << round_trip << '\n';
  return kOk;
}

int cmd_compare(const std::vector<std::string>& configs, const std::map<std::string, std::string>& given,
                std::ostream& out, std::ostream& err) {
  if (configs.empty()) config_error("compare needs at least one --config");
  std::vector<ExperimentConfig> cfgs;
  for (const auto& path : configs) cfgs.push_back(resolve_config(path, given));
  std::vector<Grid> targets;
  for (const auto& c : cfgs) {
    targets.push_back(load_target(c));
    if (targets.back().extents != targets.front().extents || targets.back().channels != targets.front().channels) {
      throw Error(ErrorCode::ExtentMismatch, "'" + c.input.string() + "' differs in shape from '" +
                                                 cfgs.front().input.string() + "'");
    }
  }
  std::ostringstream csv;
  csv << "model,params,macs_per_sample,psnr,ssim\n";
  for (std::size_t i = 0; i < cfgs.size(); ++i) {
    err << "config " << configs[i] << '\n';
    const RunOutcome r = run_experiment(cfgs[i], targets[i], {}, err);
    csv << r.label << ',' << r.params << ',' << fmt_general(r.macs_per_sample) << ',' << fmt(r.quality.psnr) << ','
        << optional_cell(r.quality.ssim) << '\n';
  }
  out << csv.str();
  if (given.contains("out")) {
    std::filesystem::create_directories(given.at("out"));
    write_text(std::filesystem::path(given.at("out")) / "compare.csv", csv.str());
  }
  return kOk;
}

int cmd_eval(const std::string& checkpoint, const ExperimentConfig& cfg, bool with_iou, const std::string& recon_path,
             std::ostream& out) {
  const Grid raw = load_target(cfg);
  const auto model = load_model(checkpoint);
  Grid recon;
  Grid target;
  if (const auto* a = std::get_if<AsmrModel>(&model)) {
    target = prepare_target(cfg, raw, &a->scheme);
    recon = reconstruct(*a, target);
  } else {
    const auto& s = std::get<SirenModel>(model);
    target = raw;
    if (s.widths.front() != target.dims() || s.widths.back() != target.channels) {
      throw Error(ErrorCode::ExtentMismatch, "checkpoint does not match the data's dimension or channels");
    }
    recon = reconstruct(s, target);
  }
  const QualityReport q = evaluate(recon, target, with_iou);
  out << "psnr,ssim,iou\n" << fmt(q.psnr) << ',' << optional_cell(q.ssim) << ',' << optional_cell(q.iou) << '\n';
  if (!recon_path.empty()) write_grid_file(recon, recon_path);
  return kOk;
}

}  // namespace

int exit_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NumericFailure:
      return kNumericFailure;
    case ErrorCode::BadMagic:
    case ErrorCode::TruncatedFile:
    case ErrorCode::UnsupportedMaxval:
    case ErrorCode::UnsupportedEncoding:
    case ErrorCode::TooShort:
    case ErrorCode::HeaderMismatch:
    case ErrorCode::ExtentMismatch:
    case ErrorCode::CoordOutOfRange:
    case ErrorCode::CorruptCheckpoint:
    case ErrorCode::VersionMismatch:
    case ErrorCode::TooSmall:
      return kDataError;
    default:
      return kConfigError;
  }
}

std::vector<std::size_t> parse_widths(const std::string& text) {
  std::vector<std::size_t> widths;
  std::string_view rest = text;
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    widths.push_back(parse_number<std::size_t>("widths", trim(std::string(rest.substr(0, comma)))));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  if (widths.size() < 2) config_error("widths need at least two entries");
  return widths;
}

void ExperimentConfig::apply(const std::map<std::string, std::string>& kv) {
  for (const auto& [key, value] : kv) {
    if (key == "name") name = value;
    else if (key == "model") model = value;
    else if (key == "widths") widths = parse_widths(value);
    else if (key == "omega0") omega0 = parse_number<double>(key, value);
    else if (key == "scheme") scheme = value;
    else if (key == "iters") train.iterations = parse_number<std::uint64_t>(key, value);
    else if (key == "lr") train.lr = parse_number<double>(key, value);
    else if (key == "lr_min") train.lr_min = parse_number<double>(key, value);
    else if (key == "batch") train.batch = parse_number<std::uint64_t>(key, value);
    else if (key == "seed") train.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "log_every") train.log_every = parse_number<std::uint64_t>(key, value);
    else if (key == "input") input = value;
    else if (key == "out") out = value;
    else if (key == "crop_to_factorable") crop_to_factorable = parse_bool(key, value);
    else if (key == "checkpoint_every") checkpoint_every = parse_number<std::uint64_t>(key, value);
    else if (key == "wav_samples") wav_samples = parse_number<std::size_t>(key, value);
    else config_error("unknown config key '" + key + "'");
  }
}

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) config_error("line " + std::to_string(lineno) + ": expected key=value");
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot open config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  ExperimentConfig cfg;
  cfg.apply(parse_key_values(ss.str()));
  // Relative data paths resolve against the config file's directory.
  if (!cfg.input.empty() && cfg.input.is_relative() && !std::filesystem::exists(cfg.input)) {
    cfg.input = path.parent_path() / cfg.input;
  }
  return cfg;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-resolution coordinate networks with activation-sharing inference", "asmr"};
  app.require_subcommand(1);

  std::string config_path;

  auto* fit_cmd = app.add_subcommand("fit", "fit a model to a signal and write metrics, checkpoint and reconstruction");
  Overrides fit_over;
  fit_cmd->add_option("--config", config_path, "key=value experiment file");
  add_model_flags(fit_cmd, fit_over);
  add_train_flags(fit_cmd, fit_over);

  auto* profile_cmd = app.add_subcommand("profile", "analytic MAC and parameter report as CSV");
  Overrides profile_over;
  std::uint64_t samples = 0;
  bool sweep = false;
  std::size_t sweep_width = 256;
  std::uint64_t sweep_base = 2;
  std::size_t min_levels = 3;
  std::size_t max_levels = 7;
  std::string profile_out;
  profile_cmd->add_option("--config", config_path, "key=value experiment file");
  add_model_flags(profile_cmd, profile_over);
  profile_cmd->add_option("--samples", samples, "SIREN sample count when no scheme is given");
  profile_cmd->add_flag("--sweep-depth", sweep, "uniform-base depth sweep instead of a single report");
  profile_cmd->add_option("--width", sweep_width, "hidden width for --sweep-depth");
  profile_cmd->add_option("--base", sweep_base, "uniform base for --sweep-depth");
  profile_cmd->add_option("--min-levels", min_levels, "first depth for --sweep-depth");
  profile_cmd->add_option("--max-levels", max_levels, "last depth for --sweep-depth");
  profile_cmd->add_option("--out", profile_out, "also write the CSV here");

  auto* permute_cmd = app.add_subcommand("permute", "fit every distinct arrangement of a base multiset");
  Overrides permute_over;
  bool mac_only = false;
  permute_cmd->add_option("--config", config_path, "key=value experiment file");
  add_model_flags(permute_cmd, permute_over);
  add_train_flags(permute_cmd, permute_over);
  permute_cmd->add_flag("--mac-only", mac_only, "report MACs only, without fitting");

  auto* decompose_cmd = app.add_subcommand("decompose", "print the per-level coordinates of a grid coordinate");
  std::string coord_text;
  std::string decompose_scheme;
  decompose_cmd->add_option("x", coord_text, "coordinate, comma-separated per axis")->required();
  decompose_cmd->add_option("--scheme", decompose_scheme, "bases of partition")->required();

  auto* compare_cmd = app.add_subcommand("compare", "fit several configurations on the same data");
  Overrides compare_over;
  std::vector<std::string> compare_configs;
  compare_cmd->add_option("--config,configs", compare_configs, "experiment files");
  add_train_flags(compare_cmd, compare_over);

  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint against a signal");
  std::string checkpoint;
  std::string eval_input;
  std::size_t eval_wav_samples = 32000;
  bool with_iou = false;
  bool eval_crop = false;
  std::string recon_path;
  eval_cmd->add_option("--checkpoint", checkpoint, "model checkpoint")->required();
  eval_cmd->add_option("--input", eval_input, "target signal")->required();
  eval_cmd->add_option("--wav-samples", eval_wav_samples, "leading audio samples to compare");
  eval_cmd->add_flag("--iou", with_iou, "also report IoU of the thresholded occupancy");
  eval_cmd->add_option("--out", recon_path, "write the reconstruction here");
  eval_cmd->add_flag("--crop-to-factorable", eval_crop, "center-crop the input to the checkpoint's scheme extents");

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (fit_cmd->parsed()) return cmd_fit(resolve_config(config_path, fit_over.given()), out, err);
    if (profile_cmd->parsed()) {
      return cmd_profile(resolve_config(config_path, profile_over.given()), samples, sweep, sweep_width, sweep_base,
                         min_levels, max_levels, profile_out, out);
    }
    if (permute_cmd->parsed()) return cmd_permute(resolve_config(config_path, permute_over.given()), mac_only, out, err);
    if (decompose_cmd->parsed()) return cmd_decompose(coord_text, decompose_scheme, out);
    if (compare_cmd->parsed()) return cmd_compare(compare_configs, compare_over.given(), out, err);
    if (eval_cmd->parsed()) {
      ExperimentConfig cfg;
      cfg.input = eval_input;
      cfg.wav_samples = eval_wav_samples;
      cfg.crop_to_factorable = eval_crop;
      return cmd_eval(checkpoint, cfg, with_iou, recon_path, out);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
  return kConfigError;
}

}  // namespace asmr::cli
