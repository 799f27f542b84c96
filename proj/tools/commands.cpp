#include "commands.hpp"

#include "svg_plot.hpp"

#include "geomimu/gcb1.hpp"
#include "geomimu/giw1.hpp"
#include "geomimu/gmc1.hpp"
#include "geomimu/gmx1.hpp"
#include "geomimu/gpw1.hpp"
#include "geomimu/kernels.hpp"
#include "geomimu/objectives.hpp"
#include "geomimu/placement.hpp"
#include "geomimu/setup_sampler.hpp"
#include "geomimu/tokenizer.hpp"
#include "geomimu/verify/fixtures.hpp"
#include "geomimu/verify/suites.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace geomimu::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr double kDegree = std::numbers::pi / 180.0;

// ---------------------------------------------------------------- helpers

void write_text(const std::string& path, const std::string& text, bool force) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(text.data());
  write_file_atomic(path, std::span<const std::uint8_t>(p, text.size()), force);
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") != std::string::npos) lines.push_back(line);
  }
  return lines;
}

json parse_json(const std::string& text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw IoError("malformed JSON in " + where + ": " + e.what());
  }
}

std::string magic_of(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  char m[4] = {0, 0, 0, 0};
  in.read(m, 4);
  return std::string(m, static_cast<std::size_t>(in.gcount()));
}

void require_seed(const CLI::Option* seed) {
  if (seed->count() == 0) throw ValidationError("missing --seed");
}

json vec3_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from(const json& j, const char* field) {
  const json& a = j.at(field);
  if (!a.is_array() || a.size() != 3) throw ValidationError(std::string("noise prior field ") + field + " needs 3 numbers");
  return {a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
}

json prior_json(const NoisePrior& p) {
  return {{"source_id", p.source_id},
          {"accel_std", vec3_json(p.accel_std)},
          {"gyro_std", vec3_json(p.gyro_std)},
          {"accel_bias", vec3_json(p.accel_bias)},
          {"gyro_bias", vec3_json(p.gyro_bias)}};
}

NoisePrior prior_from(const json& j) {
  NoisePrior p;
  p.accel_std = vec3_from(j, "accel_std");
  p.gyro_std = vec3_from(j, "gyro_std");
  p.accel_bias = j.contains("accel_bias") ? vec3_from(j, "accel_bias") : Vec3::Zero();
  p.gyro_bias = j.contains("gyro_bias") ? vec3_from(j, "gyro_bias") : Vec3::Zero();
  p.source_id = j.value("source_id", std::string());
  if ((p.accel_std.array() < 0).any() || (p.gyro_std.array() < 0).any())
    throw ValidationError("noise prior standard deviations must be non-negative");
  return p;
}

// Accepts a single prior object, an array of them, or {"priors": [...]}.
std::vector<NoisePrior> load_priors(const std::vector<std::string>& paths) {
  std::vector<NoisePrior> priors;
  for (const auto& path : paths) {
    if (path == "none") continue;
    const Bytes bytes = read_file(path);
    json j = parse_json(std::string(bytes.begin(), bytes.end()), path);
    if (j.is_object() && j.contains("priors")) j = j["priors"];
    if (!j.is_array()) j = json::array({j});
    try {
      for (const auto& item : j) {
        priors.push_back(prior_from(item));
        if (priors.back().source_id.empty()) priors.back().source_id = fs::path(path).stem().string();
      }
    } catch (const json::exception& e) {
      throw IoError("bad noise prior in " + path + ": " + e.what());
    }
  }
  return priors;
}

struct Scene {
  BodyModel body;
  MotionSequence motion;
};

Scene load_scene(const std::string& body_path, const std::string& motion_path, double rate) {
  Scene scene;
  scene.body = load_motion_container(fs::path(body_path)).body;
  scene.body.validate();
  auto container = load_motion_container(fs::path(motion_path.empty() ? body_path : motion_path));
  if (!container.motion) throw ValidationError((motion_path.empty() ? body_path : motion_path) + " holds no motion");
  scene.motion = std::move(*container.motion);
  scene.motion.validate();
  if (scene.motion.segments != scene.body.segment_count())
    throw ValidationError("motion has " + std::to_string(scene.motion.segments) + " segments, body has " +
                          std::to_string(scene.body.segment_count()));
  if (rate > 0.0 && rate != scene.motion.rate) scene.motion = resample_motion(scene.motion, rate);
  return scene;
}

json placement_json(const BodyModel& body, const PlacementCandidate& c) {
  json frame = json::array();
  for (int col = 0; col < 3; ++col)
    for (int row = 0; row < 3; ++row) frame.push_back(c.surface_frame(row, col));
  return {{"segment", c.segment},
          {"segment_name", body.segment_names[c.segment]},
          {"vertex", c.vertex},
          {"frame", frame},
          {"offset", vec3_json(c.offset)},
          {"degenerate", c.degenerate}};
}

std::vector<PlacementCandidate> load_placements(const std::string& path, const BodyModel& body) {
  std::vector<PlacementCandidate> out;
  for (const auto& line : read_lines(path)) {
    const json j = parse_json(line, path);
    try {
      PlacementCandidate c;
      c.segment = j.at("segment").get<std::size_t>();
      c.vertex = j.at("vertex").get<std::size_t>();
      const json& f = j.at("frame");
      if (!f.is_array() || f.size() != 9) throw ValidationError("placement frame needs 9 numbers");
      for (int col = 0; col < 3; ++col)
        for (int row = 0; row < 3; ++row) c.surface_frame(row, col) = f[static_cast<std::size_t>(3 * col + row)].get<double>();
      c.offset = vec3_from(j, "offset");
      c.degenerate = j.value("degenerate", false);
      if (c.segment >= body.segment_count() || c.vertex >= body.vertex_count())
        throw ValidationError("placement refers to segment " + std::to_string(c.segment) + ", vertex " +
                              std::to_string(c.vertex) + " outside the body");
      out.push_back(c);
    } catch (const json::exception& e) {
      throw IoError("bad placement record in " + path + ": " + e.what());
    }
  }
  if (out.empty()) throw ValidationError(path + " holds no placements");
  return out;
}

void maybe_plot(const std::string& path, const Signal& samples, double rate, const std::string& title, bool force) {
  if (path.empty()) return;
  write_text(path, render_signal_svg(samples, rate, title), force);
}

// Segment s of a graph window as a T×6 signal.
Signal segment_signal(const GraphWindow& w, std::size_t s) {
  Signal out(static_cast<Eigen::Index>(w.frames), 6);
  for (std::size_t t = 0; t < w.frames; ++t)
    for (std::size_t c = 0; c < 6; ++c) out(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(c)) = w.at(t, s, c);
  return out;
}

// Runs body(i) for i in [0, n) across the OpenMP team; the first exception
// in index order is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct FeaturizedCorpus {
  std::vector<std::string> ids;
  std::vector<std::vector<std::size_t>> visible;
  std::vector<Latent> latents;
};

// Masked views of every pair through the deterministic stand-in encoder.
FeaturizedCorpus featurize_shard(const PretrainingShard& shard, std::size_t latent_dim) {
  const FeatureProjection projection(featurize_width(shard.segments), latent_dim, kFeaturizeSeed);
  FeaturizedCorpus corpus;
  const std::size_t n = shard.pairs.size();
  corpus.ids.resize(2 * n);
  corpus.visible.resize(2 * n);
  corpus.latents.resize(2 * n);
  parallel_for(n, [&](std::size_t i) {
    const auto& p = shard.pairs[i];
    corpus.ids[2 * i] = p.pair_id + "/A";
    corpus.ids[2 * i + 1] = p.pair_id + "/B";
    corpus.visible[2 * i] = p.visible_a;
    corpus.visible[2 * i + 1] = p.visible_b;
    corpus.latents[2 * i] = reference_featurize(apply_mask(p.a, p.visible_a), projection);
    corpus.latents[2 * i + 1] = reference_featurize(apply_mask(p.b, p.visible_b), projection);
  });
  return corpus;
}

FeaturizedCorpus load_latent_corpus(const std::string& latents_path, const std::string& shard_path,
                                    std::size_t latent_dim) {
  if (latents_path.empty() == shard_path.empty()) throw ValidationError("give exactly one of --latents or --featurize");
  if (!shard_path.empty()) return featurize_shard(read_pretraining_shard(fs::path(shard_path)), latent_dim);
  MatrixBundle bundle = read_matrix_bundle(fs::path(latents_path));
  FeaturizedCorpus corpus;
  for (std::size_t i = 0; i < bundle.matrices.size(); ++i) {
    if (static_cast<std::size_t>(bundle.matrices[i].cols()) != latent_dim)
      throw ValidationError("latent " + std::to_string(i) + " has width " + std::to_string(bundle.matrices[i].cols()) +
                            ", expected " + std::to_string(latent_dim));
    corpus.ids.push_back(bundle.names.empty() ? "m" + std::to_string(i) : bundle.names[i]);
    corpus.visible.emplace_back();
    corpus.latents.push_back(std::move(bundle.matrices[i]));
  }
  if (corpus.latents.empty()) throw ValidationError(latents_path + " holds no latents");
  return corpus;
}

void add_force(CLI::App* sub, bool& force) { sub->add_flag("--force", force, "Overwrite existing outputs"); }

CLI::Option* add_seed(CLI::App* sub, std::uint64_t& seed) {
  return sub->add_option("--seed", seed, "Run seed (required)");
}

// ---------------------------------------------------------------- commands

struct PlacementsArgs {
  std::string body, motion, out;
  bool force = false;
};

int cmd_placements(const PlacementsArgs& a) {
  const Scene scene = load_scene(a.body, a.motion, 0.0);
  const auto candidates = enumerate_placements(scene.body, scene.motion);
  std::string text;
  std::size_t degenerate = 0;
  for (const auto& c : candidates) {
    text += placement_json(scene.body, c).dump() + "\n";
    degenerate += c.degenerate ? 1 : 0;
  }
  write_text(a.out, text, a.force);
  std::cout << "OK placements " << candidates.size() << " candidates " << degenerate << " degenerate\n";
  return 0;
}

struct SimulateArgs {
  std::string body, motion, placements = "all", out, plot;
  std::vector<std::string> noise{"none"};
  double rate = 60.0;
  std::size_t window = 300, stride = 0;
  bool include_degenerate = false, force = false;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
};

int cmd_simulate(const SimulateArgs& a) {
  require_seed(a.seed_opt);
  const Scene scene = load_scene(a.body, a.motion, a.rate);
  const auto priors = load_priors(a.noise);
  std::vector<PlacementCandidate> candidates;
  if (a.placements == "all") {
    for (const auto& c : enumerate_placements(scene.body, scene.motion))
      if (a.include_degenerate || !c.degenerate) candidates.push_back(c);
  } else {
    candidates = load_placements(a.placements, scene.body);
  }
  if (candidates.empty()) throw ValidationError("no placements to simulate");
  const auto starts = window_starts(scene.motion.frames, a.window, a.stride ? a.stride : a.window);

  // Noise-free signals over the whole motion, one per placement; windows
  // are cut from them and get their own noise stream.
  std::vector<kernels::SimulationJob> jobs(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) jobs[i].candidate = &candidates[i];
  const auto full = kernels::simulate_batch_parallel(scene.motion, jobs, default_gravity());

  WindowArchive archive;
  archive.rate = scene.motion.rate;
  archive.segment_names = scene.body.segment_names;
  archive.windows.resize(candidates.size() * starts.size());
  parallel_for(candidates.size(), [&](std::size_t i) {
    const auto& c = candidates[i];
    const NoisePrior* prior = assign_noise_prior(priors, a.seed, c.segment, c.vertex);
    for (std::size_t k = 0; k < starts.size(); ++k) {
      ArchivedWindow& w = archive.windows[i * starts.size() + k];
      w.window_id = scene.body.segment_names[c.segment] + "/v" + std::to_string(c.vertex) + "/w" + std::to_string(k);
      w.segment = c.segment;
      w.vertex = c.vertex;
      w.start_frame = starts[k];
      w.seed = derive_seed(a.seed, {c.segment, c.vertex, k});
      ImuWindow iw;
      iw.samples = full[i].samples.middleRows(static_cast<Eigen::Index>(starts[k]), static_cast<Eigen::Index>(a.window));
      iw.rate = archive.rate;
      if (prior) {
        Rng rng(w.seed);
        iw = apply_noise(iw, *prior, rng);
        w.noise_prior_id = prior->source_id;
      }
      w.samples = std::move(iw.samples);
    }
  });
  write_file_atomic(a.out, write_window_archive(archive), a.force);
  maybe_plot(a.plot, archive.windows.front().samples, archive.rate, archive.windows.front().window_id, a.force);
  std::cout << "OK simulate " << archive.windows.size() << " windows " << candidates.size() << " placements "
            << starts.size() << " starts\n";
  return 0;
}

struct EstimateArgs {
  std::string stream, out, id;
  double rate = 0.0;
  QuietWindowConfig cfg;
  bool force = false;
};

int cmd_estimate_noise(const EstimateArgs& a) {
  std::vector<std::array<double, 7>> rows;
  std::size_t line_no = 0;
  for (const auto& line : read_lines(a.stream)) {
    ++line_no;
    std::array<double, 7> r{};
    std::stringstream ss(line);
    std::string cell;
    std::size_t n = 0;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      if (n >= 7) throw ValidationError(a.stream + ":" + std::to_string(line_no) + ": expected 7 columns");
      char* end = nullptr;
      r[n++] = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) numeric = false;
    }
    if (!numeric && rows.empty() && line_no == 1) continue;  // header
    if (!numeric || n != 7) throw ValidationError(a.stream + ":" + std::to_string(line_no) + ": expected 7 numeric columns");
    rows.push_back(r);
  }
  if (rows.size() < 2) throw ValidationError(a.stream + " holds fewer than two samples");
  double rate = a.rate;
  if (rate <= 0.0) {
    std::vector<double> dt;
    for (std::size_t i = 1; i < rows.size(); ++i) dt.push_back(rows[i][0] - rows[i - 1][0]);
    std::nth_element(dt.begin(), dt.begin() + static_cast<std::ptrdiff_t>(dt.size() / 2), dt.end());
    const double median = dt[dt.size() / 2];
    if (!(median > 0.0)) throw ValidationError("timestamps must increase");
    rate = 1.0 / median;
  }
  Signal stream(static_cast<Eigen::Index>(rows.size()), 6);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int c = 0; c < 6; ++c) stream(static_cast<Eigen::Index>(i), c) = rows[i][static_cast<std::size_t>(c) + 1];
  const std::string id = a.id.empty() ? fs::path(a.stream).stem().string() : a.id;
  const NoisePrior prior = estimate_noise_prior(stream, rate, a.cfg, id);
  json out = prior_json(prior);
  out["rate"] = rate;
  out["samples"] = rows.size();
  write_text(a.out, out.dump(2) + "\n", a.force);
  std::cout << "OK estimate-noise 1 prior " << rows.size() << " samples\n";
  return 0;
}

struct SampleViewsArgs {
  std::string giw, body, motion, out, plot;
  bool simulate = false, include_degenerate = false, force = false;
  std::vector<std::string> noise{"none"};
  double rate = 60.0, in_plane_deg = 180.0, tilt_deg = 10.0;
  std::size_t window = 300, stride = 0, pairs = 0, mask_min = 1, mask_max = 5;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
};

int cmd_sample_views(const SampleViewsArgs& a) {
  require_seed(a.seed_opt);
  if (a.giw.empty() == !a.simulate) throw ValidationError("give exactly one of --giw or --simulate");
  if (a.pairs == 0) throw ValidationError("--pairs must be at least 1");
  if (a.mask_min < 1 || a.mask_min > a.mask_max) throw ValidationError("need 1 <= --mask-min <= --mask-max");

  ViewConfig cfg;
  cfg.in_plane_range = a.in_plane_deg * kDegree;
  cfg.tilt_range = a.tilt_deg * kDegree;
  cfg.include_degenerate = a.include_degenerate;
  cfg.window_frames = a.window;
  cfg.run_seed = a.seed;

  PretrainingShard shard;
  shard.pairs.resize(a.pairs);
  std::function<std::pair<ViewPair, std::size_t>(Rng&)> make_pair;
  double rate = a.rate;

  // Archive route state.
  WindowArchive archive;
  std::vector<std::pair<std::size_t, std::vector<std::vector<const ArchivedWindow*>>>> groups;
  // Simulation route state.
  Scene scene;
  CandidatePool pool;
  std::vector<std::size_t> starts;

  if (!a.giw.empty()) {
    archive = read_window_archive(fs::path(a.giw));
    const std::size_t S = archive.segment_names.size();
    if (archive.windows.empty()) throw ValidationError(a.giw + " holds no windows");
    std::map<std::size_t, std::vector<std::vector<const ArchivedWindow*>>> by_start;
    for (const auto& w : archive.windows) {
      if (w.samples.rows() != archive.windows.front().samples.rows())
        throw ValidationError("archive windows differ in length");
      if (w.segment >= S) throw ValidationError("archive window " + w.window_id + " has an unknown segment");
      auto& g = by_start[w.start_frame];
      g.resize(S);
      g[w.segment].push_back(&w);
    }
    for (auto& [start, g] : by_start)
      if (std::all_of(g.begin(), g.end(), [](const auto& opts) { return !opts.empty(); })) groups.emplace_back(start, std::move(g));
    if (groups.empty()) throw ValidationError("no start frame in the archive covers every segment");
    shard.frames = static_cast<std::size_t>(archive.windows.front().samples.rows());
    shard.segments = S;
    shard.segment_names = archive.segment_names;
    rate = archive.rate;
    make_pair = [&](Rng& rng) {
      const auto& [start, options] = groups[uniform_index(rng, groups.size())];
      std::vector<std::size_t> counts;
      for (const auto& o : options) counts.push_back(o.size());
      ViewPair vp;
      vp.spec_a = sample_full_view(counts, cfg, rng);
      vp.spec_b = sample_full_view(counts, cfg, rng);
      vp.a = build_view_from_archive(options, vp.spec_a, ViewId::kA);
      vp.b = build_view_from_archive(options, vp.spec_b, ViewId::kB);
      return std::pair{std::move(vp), start};
    };
  } else {
    if (a.body.empty()) throw ValidationError("--simulate needs --body");
    scene = load_scene(a.body, a.motion, a.rate);
    cfg.priors = load_priors(a.noise);
    pool = group_candidates(enumerate_placements(scene.body, scene.motion), scene.body.segment_count(),
                            a.include_degenerate);
    starts = window_starts(scene.motion.frames, a.window, a.stride ? a.stride : a.window);
    shard.frames = a.window;
    shard.segments = scene.body.segment_count();
    shard.segment_names = scene.body.segment_names;
    make_pair = [&](Rng& rng) {
      const std::size_t start = starts[uniform_index(rng, starts.size())];
      return std::pair{build_paired_views(scene.motion, pool, cfg, start, rng), start};
    };
  }

  parallel_for(a.pairs, [&](std::size_t i) {
    Rng rng(derive_seed(a.seed, {i}));
    auto [vp, start] = make_pair(rng);
    PretrainingPair& p = shard.pairs[i];
    p.pair_id = "p" + std::to_string(i);
    p.start_frame = start;
    p.a = std::move(vp.a);
    p.b = std::move(vp.b);
    p.a.window_id = p.pair_id + "/A";
    p.b.window_id = p.pair_id + "/B";
    p.visible_a = sample_visibility_mask(shard.segments, rng, a.mask_min, a.mask_max);
    p.visible_b = sample_visibility_mask(shard.segments, rng, a.mask_min, a.mask_max);
  });
  export_pretraining_shard(shard, a.out, a.force);
  if (!a.plot.empty()) {
    const auto& first = shard.pairs.front();
    const std::size_t s = first.visible_a.front();
    maybe_plot(a.plot, segment_signal(first.a, s), rate, first.pair_id + "/A " + shard.segment_names[s], a.force);
  }
  std::cout << "OK sample-views " << shard.pairs.size() << " pairs " << shard.segments << " segments "
            << shard.frames << " frames\n";
  return 0;
}

struct PqArgs {
  std::string latents, featurize, books, tokens, out, log;
  FitConfig fit;
  bool force = false;
  CLI::Option* seed_opt = nullptr;
};

int cmd_pq_train(PqArgs a) {
  require_seed(a.seed_opt);
  const FeaturizedCorpus corpus = load_latent_corpus(a.latents, a.featurize, a.fit.P * a.fit.dim);
  const FitResult fit = fit_codebooks(corpus.latents, a.fit);
  for (const auto& w : fit.warnings) std::cerr << "warning: " << w << "\n";
  for (const auto& e : fit.log) {
    std::cerr << "epoch " << e.epoch << " commitment " << e.commitment << " perplexity";
    for (double p : e.perplexity) std::cerr << " " << p;
    std::cerr << " refreshed " << e.refreshed << "\n";
  }
  write_file_atomic(a.out, write_codebooks(fit.books), a.force);
  std::size_t chunks = 0;
  for (const auto& l : corpus.latents) chunks += static_cast<std::size_t>(l.rows());
  std::cout << "OK pq train " << fit.books.P << " codebooks " << fit.books.K << " codes " << chunks << " chunks\n";
  return 0;
}

int cmd_pq_encode(const PqArgs& a) {
  const Codebooks books = read_codebooks(fs::path(a.books));
  const FeaturizedCorpus corpus = load_latent_corpus(a.latents, a.featurize, books.width());
  std::string text;
  std::size_t tokens = 0;
  for (std::size_t i = 0; i < corpus.latents.size(); ++i) {
    TokenSequence seq;
    seq.window_id = corpus.ids[i];
    seq.visible_segments = corpus.visible[i];
    seq.tokens = interleave_tokens(quantize(corpus.latents[i], books).indices);
    tokens += seq.tokens.size();
    text += to_json(seq).dump() + "\n";
  }
  write_text(a.out, text, a.force);
  std::cout << "OK pq encode " << corpus.latents.size() << " sequences " << tokens << " tokens\n";
  return 0;
}

int cmd_pq_featurize(const PqArgs& a) {
  const FeaturizedCorpus corpus = load_latent_corpus("", a.featurize, a.fit.P * a.fit.dim);
  MatrixBundle bundle;
  bundle.names = corpus.ids;
  bundle.matrices = corpus.latents;
  write_file_atomic(a.out, write_matrix_bundle(bundle), a.force);
  std::cout << "OK pq featurize " << bundle.matrices.size() << " latents\n";
  return 0;
}

int cmd_pq_stats(const PqArgs& a) {
  const Codebooks books = read_codebooks(fs::path(a.books));
  std::vector<TokenSequence> corpus;
  for (const auto& line : read_lines(a.tokens)) corpus.push_back(token_sequence_from_json(parse_json(line, a.tokens)));
  const auto report = codebook_diagnostics(assignment_histograms(corpus, books.P, books.K), corpus);
  json j = {{"sequences", report.sequences},
            {"distinct_sequences", report.distinct_sequences},
            {"collision_rate", report.collision_rate},
            {"codebooks", json::array()}};
  for (const auto& h : report.books)
    j["codebooks"].push_back({{"K", h.K},
                              {"used", h.used},
                              {"assignments", h.assignments},
                              {"usage_rate", h.usage_rate},
                              {"dead_ratio", h.dead_ratio},
                              {"perplexity", h.perplexity},
                              {"top1_mass", h.top1_mass},
                              {"top10_mass", h.top10_mass}});
  if (!a.out.empty()) write_text(a.out, j.dump(2) + "\n", a.force);
  std::cout << j.dump(2) << "\n";
  std::cout << "OK pq stats " << report.sequences << " sequences " << report.books.size() << " codebooks\n";
  return 0;
}

struct LossArgs {
  std::string name, inputs;
  double tau = std::numeric_limits<double>::quiet_NaN();  // NaN: per-loss default
  std::size_t P = 2, latent_dim = 128;
};

// Matrices grouped by the name part before ':' ("preds:0", "preds:1", ...).
std::map<std::string, std::vector<Eigen::MatrixXd>> group_matrices(MatrixBundle bundle) {
  if (bundle.names.empty()) throw ValidationError("loss inputs need named matrices");
  std::map<std::string, std::vector<Eigen::MatrixXd>> groups;
  for (std::size_t i = 0; i < bundle.matrices.size(); ++i) {
    const std::string& n = bundle.names[i];
    groups[n.substr(0, n.find(':'))].push_back(std::move(bundle.matrices[i]));
  }
  return groups;
}

const std::vector<Eigen::MatrixXd>& group(const std::map<std::string, std::vector<Eigen::MatrixXd>>& g,
                                          const std::string& name) {
  auto it = g.find(name);
  if (it == g.end()) throw ValidationError("loss inputs lack matrices named " + name);
  return it->second;
}

const Eigen::MatrixXd& single(const std::map<std::string, std::vector<Eigen::MatrixXd>>& g, const std::string& name) {
  const auto& v = group(g, name);
  if (v.size() != 1) throw ValidationError("expected exactly one matrix named " + name);
  return v.front();
}

int cmd_loss(LossArgs a) {
  static const std::map<std::string, double> default_tau = {
      {"mcvpcl", ObjectiveDefaults::encoder_tau},   {"infonce", ObjectiveDefaults::encoder_tau},
      {"itc", ObjectiveDefaults::motion_language_tau}, {"label", ObjectiveDefaults::motion_language_tau},
      {"commitment", 0.0},                          {"smooth_l1", 0.0}};
  const auto known = default_tau.find(a.name);
  if (known == default_tau.end())
    throw ValidationError("unknown loss: " + a.name + " (mcvpcl, infonce, itc, label, commitment, smooth_l1)");
  const double tau = std::isnan(a.tau) ? known->second : a.tau;

  double value = 0.0;
  const std::string magic = magic_of(a.inputs);
  if (magic == "GPW1") {
    if (a.name != "mcvpcl" && a.name != "infonce")
      throw ValidationError("loss " + a.name + " does not take a GPW1 shard");
    const PretrainingShard shard = read_pretraining_shard(fs::path(a.inputs));
    const FeatureProjection projection(featurize_width(shard.segments), a.latent_dim, kFeaturizeSeed);
    std::vector<Latent> pab, tb, pba, ta;
    for (const auto& p : shard.pairs) {
      pab.push_back(reference_featurize(apply_mask(p.a, p.visible_a), projection));
      tb.push_back(reference_featurize(p.b, projection));
      pba.push_back(reference_featurize(apply_mask(p.b, p.visible_b), projection));
      ta.push_back(reference_featurize(p.a, projection));
    }
    value = a.name == "mcvpcl" ? mcvpcl_loss(pab, tb, pba, ta, tau) : infonce_cross_view(pab, tb, tau);
  } else if (magic == "GMX1") {
    const auto g = group_matrices(read_matrix_bundle(fs::path(a.inputs)));
    if (a.name == "mcvpcl") {
      value = mcvpcl_loss(group(g, "preds_ab"), group(g, "targets_b"), group(g, "preds_ba"), group(g, "targets_a"), tau);
    } else if (a.name == "infonce") {
      value = infonce_cross_view(group(g, "preds"), group(g, "targets"), tau);
    } else if (a.name == "itc") {
      value = itc_loss(EmbeddingBatch(single(g, "imu")), EmbeddingBatch(single(g, "text")), tau);
    } else if (a.name == "label") {
      const auto& ids = single(g, "labels");
      std::vector<std::string> labels;
      char buf[32];
      for (Eigen::Index i = 0; i < ids.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.9g", ids.data()[i]);
        labels.emplace_back(buf);
      }
      value = label_contrastive_loss(EmbeddingBatch(single(g, "embeddings"), labels), tau);
    } else if (a.name == "commitment") {
      value = commitment_loss(single(g, "chunks"), single(g, "codes"), a.P);
    } else {
      value = smooth_l1(single(g, "x"), single(g, "y"));
    }
  } else if (magic == "GIW1") {
    throw ValidationError("loss inputs from a GIW1 archive need paired views; run sample-views first");
  } else {
    throw IoError("bad magic: " + a.inputs + " is not a GPW1 shard or GMX1 bundle");
  }
  std::printf("%.12g\n", value);
  std::printf("OK loss %s 1 value\n", a.name.c_str());
  return 0;
}

int cmd_verify(const std::string& suite) {
  const verify::SuiteResult result = verify::run_suite(suite);
  verify::print_suite(std::cout, result);
  std::size_t passed = 0;
  for (const auto& c : result.checks) passed += c.passed ? 1 : 0;
  if (!result.passed()) {
    std::cerr << "verify: " << result.checks.size() - passed << " checks failed\n";
    return 1;
  }
  std::cout << "OK verify " << passed << " checks\n";
  return 0;
}

struct FixtureArgs {
  std::string out;
  std::size_t segments = 3;
  double seconds = 10.0, rate = 60.0;
  bool posed = false, body_only = false, cube = false, force = false;
};

int cmd_make_fixture(const FixtureArgs& a) {
  if (a.cube) {
    const BodyModel body = fixtures::cube_body();
    write_file_atomic(a.out, write_motion_container(body, nullptr), a.force);
    std::cout << "OK make-fixture 2 segments 8 vertices 0 frames\n";
    return 0;
  }
  if (a.segments < 2) throw ValidationError("--segments must be at least 2");
  const BodyModel body = fixtures::tube_chain_body(a.segments);
  MotionSequence motion = fixtures::fixture_motion(a.segments, a.seconds, a.rate);
  if (a.posed) fixtures::attach_posed_vertices(body, motion);
  write_file_atomic(a.out, write_motion_container(body, a.body_only ? nullptr : &motion), a.force);
  std::cout << "OK make-fixture " << body.segment_count() << " segments " << body.vertex_count() << " vertices "
            << (a.body_only ? 0 : motion.frames) << " frames\n";
  return 0;
}

std::size_t env_threads() {
  const char* env = std::getenv("GEOMIMU_THREADS");
  if (!env || !*env) return 0;
  char* end = nullptr;
  const unsigned long long n = std::strtoull(env, &end, 10);
  if (*end != '\0') throw ValidationError("GEOMIMU_THREADS must be a non-negative integer");
  return static_cast<std::size_t>(n);
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"geomimu: wearable IMU simulation and tokenization toolkit", "geomimu"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();
  std::size_t threads = 0;
  auto* threads_opt = app.add_option("--threads", threads, "Worker threads (default: GEOMIMU_THREADS, then all cores)");

  std::function<int()> action;

  PlacementsArgs pl;
  auto* placements = app.add_subcommand("placements", "Enumerate sensor placement candidates");
  placements->add_option("--body", pl.body, "Body GMC1")->required();
  placements->add_option("--motion", pl.motion, "Motion GMC1 (default: the body file)");
  placements->add_option("--out", pl.out, "Output JSONL")->required();
  add_force(placements, pl.force);
  placements->callback([&] { action = [&] { return cmd_placements(pl); }; });

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Simulate IMU windows for placements");
  simulate->add_option("--body", sim.body, "Body GMC1")->required();
  simulate->add_option("--motion", sim.motion, "Motion GMC1 (default: the body file)");
  simulate->add_option("--placements", sim.placements, "'all' or a placements JSONL")->capture_default_str();
  simulate->add_flag("--include-degenerate", sim.include_degenerate, "Keep degenerate-frame candidates with 'all'");
  simulate->add_option("--noise", sim.noise, "Noise prior JSON files, or 'none'")->take_all();
  simulate->add_option("--rate", sim.rate, "Output rate in Hz")->capture_default_str();
  simulate->add_option("--window", sim.window, "Frames per window")->capture_default_str();
  simulate->add_option("--stride", sim.stride, "Frames between window starts (default: --window)");
  sim.seed_opt = add_seed(simulate, sim.seed);
  simulate->add_option("--out", sim.out, "Output GIW1")->required();
  simulate->add_option("--plot", sim.plot, "SVG of the first window");
  add_force(simulate, sim.force);
  simulate->callback([&] { action = [&] { return cmd_simulate(sim); }; });

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate-noise", "Estimate a noise prior from a resting stream");
  estimate->add_option("--stream", est.stream, "CSV with t,ax,ay,az,gx,gy,gz")->required();
  estimate->add_option("--out", est.out, "Output prior JSON")->required();
  estimate->add_option("--gyro-gate", est.cfg.gyro_gate, "Per-axis gyro std gate (rad/s)")->capture_default_str();
  estimate->add_option("--accel-gate", est.cfg.accel_gate, "Per-axis accel std gate (m/s^2)")->capture_default_str();
  estimate->add_option("--window-s", est.cfg.window_seconds, "Quiet window length (s)")->capture_default_str();
  estimate->add_option("--stride-s", est.cfg.stride_seconds, "Quiet window stride (s)")->capture_default_str();
  estimate->add_option("--rate", est.rate, "Sample rate (default: from timestamps)");
  estimate->add_option("--id", est.id, "Prior id (default: stream file stem)");
  add_force(estimate, est.force);
  estimate->callback([&] { action = [&] { return cmd_estimate_noise(est); }; });

  SampleViewsArgs sv;
  auto* views = app.add_subcommand("sample-views", "Sample paired full views with visibility masks");
  views->add_option("--giw", sv.giw, "Window archive to draw views from");
  views->add_flag("--simulate", sv.simulate, "Simulate views from --body/--motion instead");
  views->add_option("--body", sv.body, "Body GMC1 (with --simulate)");
  views->add_option("--motion", sv.motion, "Motion GMC1 (default: the body file)");
  views->add_option("--noise", sv.noise, "Noise prior JSON files, or 'none'")->take_all();
  views->add_option("--rate", sv.rate, "Rate in Hz (with --simulate)")->capture_default_str();
  views->add_option("--window", sv.window, "Frames per window (with --simulate)")->capture_default_str();
  views->add_option("--stride", sv.stride, "Frames between window starts (default: --window)");
  views->add_flag("--include-degenerate", sv.include_degenerate, "Allow degenerate-frame candidates");
  views->add_option("--pairs", sv.pairs, "Number of view pairs")->required();
  views->add_option("--mask-min", sv.mask_min, "Fewest visible segments")->capture_default_str();
  views->add_option("--mask-max", sv.mask_max, "Most visible segments")->capture_default_str();
  views->add_option("--in-plane-deg", sv.in_plane_deg, "In-plane mount range (±deg)")->capture_default_str();
  views->add_option("--tilt-deg", sv.tilt_deg, "Tilt mount range (±deg)")->capture_default_str();
  sv.seed_opt = add_seed(views, sv.seed);
  views->add_option("--out", sv.out, "Output GPW1")->required();
  views->add_option("--plot", sv.plot, "SVG of a visible segment of the first A view");
  add_force(views, sv.force);
  views->callback([&] { action = [&] { return cmd_sample_views(sv); }; });

  PqArgs pq;
  auto* pq_cmd = app.add_subcommand("pq", "Product-quantization tokenizer");
  pq_cmd->require_subcommand(1);
  auto* train = pq_cmd->add_subcommand("train", "Fit product codebooks");
  train->add_option("--latents", pq.latents, "GMX1 bundle of T'x(P*dim) latents");
  train->add_option("--featurize", pq.featurize, "GPW1 shard through the reference featurizer");
  train->add_option("--P", pq.fit.P, "Codebooks")->capture_default_str();
  train->add_option("--K", pq.fit.K, "Codes per codebook")->capture_default_str();
  train->add_option("--dim", pq.fit.dim, "Code vector size")->capture_default_str();
  train->add_option("--decay", pq.fit.decay, "EMA decay")->capture_default_str();
  train->add_option("--epochs", pq.fit.epochs, "Epochs")->capture_default_str();
  train->add_option("--batch", pq.fit.batch_rows, "Latent rows per mini-batch")->capture_default_str();
  train->add_option("--dead-threshold", pq.fit.dead_threshold, "Dead-code fraction of mean usage")->capture_default_str();
  pq.seed_opt = add_seed(train, pq.fit.seed);
  train->add_option("--out", pq.out, "Output GCB1")->required();
  add_force(train, pq.force);
  train->callback([&] { action = [&] { return cmd_pq_train(pq); }; });

  auto* encode = pq_cmd->add_subcommand("encode", "Tokenize latents");
  encode->add_option("--books", pq.books, "GCB1 codebooks")->required();
  encode->add_option("--latents", pq.latents, "GMX1 bundle of latents");
  encode->add_option("--featurize", pq.featurize, "GPW1 shard through the reference featurizer");
  encode->add_option("--out", pq.out, "Output tokens JSONL")->required();
  add_force(encode, pq.force);
  encode->callback([&] { action = [&] { return cmd_pq_encode(pq); }; });

  auto* feat = pq_cmd->add_subcommand("featurize", "Export reference-featurizer latents of masked views");
  feat->add_option("--featurize", pq.featurize, "GPW1 shard")->required();
  feat->add_option("--P", pq.fit.P, "Codebooks (latent width is P*dim)")->capture_default_str();
  feat->add_option("--dim", pq.fit.dim, "Code vector size")->capture_default_str();
  feat->add_option("--out", pq.out, "Output GMX1")->required();
  add_force(feat, pq.force);
  feat->callback([&] { action = [&] { return cmd_pq_featurize(pq); }; });

  auto* stats = pq_cmd->add_subcommand("stats", "Codebook health of a token corpus");
  stats->add_option("--books", pq.books, "GCB1 codebooks")->required();
  stats->add_option("--tokens", pq.tokens, "Tokens JSONL")->required();
  stats->add_option("--out", pq.out, "Also write the report JSON here");
  add_force(stats, pq.force);
  stats->callback([&] { action = [&] { return cmd_pq_stats(pq); }; });

  LossArgs loss;
  auto* loss_cmd = app.add_subcommand("loss", "Evaluate a reference loss");
  loss_cmd->add_option("name", loss.name, "mcvpcl, infonce, itc, label, commitment or smooth_l1")->required();
  loss_cmd->add_option("--inputs", loss.inputs, "GPW1 shard or GMX1 matrix bundle")->required();
  loss_cmd->add_option("--tau", loss.tau, "Temperature (default per loss)");
  loss_cmd->add_option("--P", loss.P, "Codebooks (commitment)")->capture_default_str();
  loss_cmd->add_option("--latent-dim", loss.latent_dim, "Featurizer width for GPW1 inputs")->capture_default_str();
  loss_cmd->callback([&] { action = [&] { return cmd_loss(loss); }; });

  std::string suite = "all";
  auto* verify_cmd = app.add_subcommand("verify", "Run the built-in property suites");
  verify_cmd->add_option("--suite", suite, "kinematics, frames, masking, losses, pq, formats or all")->capture_default_str();
  verify_cmd->callback([&] { action = [&] { return cmd_verify(suite); }; });

  FixtureArgs fx;
  auto* fixture = app.add_subcommand("make-fixture", "Write the bundled tube-chain body and motion");
  fixture->add_option("--out", fx.out, "Output GMC1")->required();
  fixture->add_option("--segments", fx.segments, "Links in the chain")->capture_default_str();
  fixture->add_option("--seconds", fx.seconds, "Motion length")->capture_default_str();
  fixture->add_option("--rate", fx.rate, "Motion rate in Hz")->capture_default_str();
  fixture->add_flag("--posed", fx.posed, "Store posed vertices");
  fixture->add_flag("--body-only", fx.body_only, "Omit the motion");
  fixture->add_flag("--cube", fx.cube, "Write the minimal two-segment cube body instead");
  add_force(fixture, fx.force);
  fixture->callback([&] { action = [&] { return cmd_make_fixture(fx); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    const CLI::App* where = &app;
    for (const CLI::App* sub = &app; sub;) {
      where = sub;
      const auto subs = sub->get_subcommands();
      sub = subs.empty() ? nullptr : subs.front();
    }
    std::cerr << "error: " << e.what() << "\n\n" << where->help();
    return 1;
  }

  try {
    std::size_t n = threads_opt->count() ? threads : env_threads();
    kernels::set_thread_count(n);
    return action ? action() : 1;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace geomimu::cli
