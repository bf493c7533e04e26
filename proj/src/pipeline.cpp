#include "popmap/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "popmap/allocate.hpp"
#include "popmap/errors.hpp"
#include "popmap/nn/cascade.hpp"
#include "popmap/nn/model_io.hpp"
#include "popmap/nn/train.hpp"
#include "popmap/render.hpp"
#include "popmap/textio.hpp"
#include "popmap/threadpool.hpp"
#include "popmap/urban.hpp"
#include "popmap/validate.hpp"

namespace popmap {

namespace {

using nlohmann::json;

nn::Tensor tensor_from_pixels(const std::vector<float>& px, std::size_t side) {
  nn::Tensor t(1, static_cast<int>(side), static_cast<int>(side));
  for (std::size_t i = 0; i < t.size(); ++i) t.v[i] = px[i];
  return t;
}

// 256 px window anchored at cell block (wr, wc); zero padding past the
// tile edge keeps the model input shape fixed.
nn::Tensor cut_seg_window(const ImageTile& tile, std::size_t wr, std::size_t wc) {
  const std::size_t px = kSegmentPatchPx;
  nn::Tensor t(1, static_cast<int>(px), static_cast<int>(px));
  const std::size_t r0 = wr * px, c0 = wc * px;
  for (std::size_t r = 0; r < px; ++r) {
    if (r0 + r >= tile.height()) break;
    for (std::size_t c = 0; c < px; ++c) {
      if (c0 + c >= tile.width()) break;
      t.v[r * px + c] = tile.at(r0 + r, c0 + c);
    }
  }
  return t;
}

std::string timestamp_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&tt, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

void write_json(const json& j, const std::filesystem::path& path) {
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace

DetectResult detect_tile(const ImageTile& tile, const nn::SegNetModel& classifier,
                         const nn::FeedbackModel& segmenter,
                         const DetectParams& params) {
  if (classifier.input_px != static_cast<int>(kClassifyPatchPx))
    throw ValidationError("detect: classifier input size must be 64");
  if (segmenter.input_px != static_cast<int>(kSegmentPatchPx))
    throw ValidationError("detect: segmenter input size must be 256");
  const std::size_t ppc = kClassifyPatchPx;
  if (tile.width() < ppc || tile.height() < ppc)
    throw ValidationError("detect: tile smaller than one window");

  const std::size_t crows = tile.height() / ppc, ccols = tile.width() / ppc;
  GeoGrid cell_grid(tile.grid.origin_lat, tile.grid.origin_lon,
                    tile.grid.res_arcsec * static_cast<double>(ppc), crows, ccols);

  DetectResult res;
  res.scores = Raster<double>(cell_grid, 0.0, kDefaultNoData);
  res.built = RasterU8(cell_grid, 0, kNoDataU8);

  // Prefilter: smooth for the edge detector only; the models see raw pixels.
  const ImageTile smoothed = smooth(tile, params.smooth_radius);
  const RasterU8 edges = detect_edges(smoothed, params.edge_low, params.edge_high);
  const std::vector<LineSegment> segments =
      extract_lines(edges, params.hough_min_support);
  const PatchSet candidates = candidate_patches(tile, segments);
  res.windows_total = candidates.windows_total;
  res.windows_candidate = candidates.patches.size();

  // Classifier scores, one window per output cell.
  std::vector<double> window_scores(candidates.patches.size(), 0.0);
  parallel_for(candidates.patches.size(), params.threads, [&](std::size_t i) {
    const Patch& p = candidates.patches[i];
    nn::SegNetTrace trace;
    window_scores[i] =
        nn::segnet_forward(classifier, tensor_from_pixels(p.pixels, ppc), trace);
  });
  for (std::size_t i = 0; i < candidates.patches.size(); ++i) {
    const Patch& p = candidates.patches[i];
    if (p.window_row < crows && p.window_col < ccols)
      res.scores.at(p.window_row, p.window_col) = window_scores[i];
  }
  for (std::size_t i = 0; i < res.scores.values.size(); ++i)
    res.built.values[i] = res.scores.values[i] >= params.cascade_tau ? 1 : 0;

  // Footprints on segmentation windows that contain a positive cell.
  const std::size_t span = kSegmentPatchPx / ppc;  // cells per segmentation window
  const std::size_t srows = (crows + span - 1) / span;
  const std::size_t scols = (ccols + span - 1) / span;
  std::vector<std::size_t> active;
  for (std::size_t wr = 0; wr < srows; ++wr)
    for (std::size_t wc = 0; wc < scols; ++wc) {
      bool positive = false;
      for (std::size_t r = wr * span; r < std::min((wr + 1) * span, crows) && !positive;
           ++r)
        for (std::size_t c = wc * span; c < std::min((wc + 1) * span, ccols) && !positive;
             ++c)
          positive = res.built.at(r, c) == 1;
      if (positive) active.push_back(wr * scols + wc);
    }

  Raster<double> footprint_frac(cell_grid, 0.0, kDefaultNoData);
  std::vector<std::vector<double>> window_frac(active.size());
  parallel_for(active.size(), params.threads, [&](std::size_t k) {
    const std::size_t wr = active[k] / scols, wc = active[k] % scols;
    const nn::Tensor input = cut_seg_window(tile, wr, wc);
    const nn::FeedbackSegmentResult seg =
        nn::feedback_segment(segmenter, input, params.feedback_passes);
    // Per-cell share of footprint pixels within the window's cell block.
    std::vector<double>& fr = window_frac[k];
    fr.assign(span * span, 0.0);
    for (std::size_t cr = 0; cr < span; ++cr)
      for (std::size_t cc = 0; cc < span; ++cc) {
        std::size_t on = 0;
        for (std::size_t y = cr * ppc; y < (cr + 1) * ppc; ++y)
          for (std::size_t x = cc * ppc; x < (cc + 1) * ppc; ++x)
            if (seg.relevance.v[y * kSegmentPatchPx + x] >=
                params.footprint_threshold)
              ++on;
        fr[cr * span + cc] =
            static_cast<double>(on) / static_cast<double>(ppc * ppc);
      }
  });
  for (std::size_t k = 0; k < active.size(); ++k) {
    const std::size_t wr = active[k] / scols, wc = active[k] % scols;
    for (std::size_t cr = 0; cr < span; ++cr)
      for (std::size_t cc = 0; cc < span; ++cc) {
        const std::size_t r = wr * span + cr, c = wc * span + cc;
        if (r < crows && c < ccols)
          footprint_frac.at(r, c) = window_frac[k][cr * span + cc];
      }
  }

  res.fraction = nn::cascade(res.scores, footprint_frac, params.cascade_tau);
  for (const std::uint8_t b : res.built.values) res.cells_built += b;
  return res;
}

void write_meta(const std::filesystem::path& artifact, const std::string& stage,
                const KeyValues& cfg) {
  std::ostringstream ss;
  ss << "stage = " << stage << "\n";
  ss << "config_hash = " << cfg.stable_hash() << "\n";
  ss << "created = " << timestamp_utc() << "\n";
  std::filesystem::path meta = artifact;
  meta += ".meta";
  write_text_file(meta, ss.str());
}

void stage_synth(const KeyValues& cfg, std::uint64_t seed_override, bool has_seed) {
  WorldSpec spec = read_worldspec(cfg.require_string("worldspec"));
  if (has_seed) spec.seed = seed_override;
  const std::filesystem::path out = cfg.require_string("out_dir");
  std::filesystem::create_directories(out);

  const World world = generate(spec);
  write_tile_pgm(world.imagery, out / "imagery.pgm");
  write_grid_ascii(world.truth_built, out / "truth_built.asc");
  write_grid_ascii(world.truth_fraction, out / "truth_fraction.asc");
  write_grid_ascii(world.admin_coarse, out / "admin_coarse.asc");
  write_grid_ascii(world.admin_fine, out / "admin_fine.asc");
  write_census_csv(world.census_coarse, out / "census_coarse.csv");
  write_census_csv(world.census_fine, out / "census_fine.csv");
  write_nesting_csv(world.nesting, out / "nesting.csv");
  write_points_csv(world.households, out / "households.csv");
  write_worldspec(spec, out / "worldspec.txt");

  const double neg_ratio = cfg.get_double("corpus_negatives_per_positive", 1.0);
  write_corpus(make_corpus(world, kClassifyPatchPx, neg_ratio, spec.seed ^ 0x5eedu),
               out / "corpus_cls");
  write_corpus(make_corpus(world, kSegmentPatchPx, neg_ratio, spec.seed ^ 0x5ee5u),
               out / "corpus_seg");

  for (const char* name :
       {"imagery.pgm", "truth_built.asc", "truth_fraction.asc", "admin_coarse.asc",
        "admin_fine.asc", "census_coarse.csv", "census_fine.csv", "nesting.csv",
        "households.csv"})
    write_meta(out / name, "synth", cfg);
}

namespace {

std::vector<nn::TrainSample> corpus_to_samples(const PatchSet& set) {
  std::vector<nn::TrainSample> samples;
  for (const Patch& p : set.patches) {
    if (!p.label) continue;
    samples.push_back({tensor_from_pixels(p.pixels, p.size_px),
                       *p.label == PatchLabel::kBuilding ? 1 : 0});
  }
  return samples;
}

void write_loss_csv(const nn::TrainResult& res, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "epoch,loss\n";
  for (std::size_t e = 0; e < res.loss_trace.size(); ++e)
    out << e + 1 << ',' << fmt_double(res.loss_trace[e]) << '\n';
  write_text_file(path, out.str());
}

}  // namespace

void stage_train(const KeyValues& cfg, std::uint64_t seed_override, bool has_seed) {
  nn::TrainConfig tc;
  tc.lr = cfg.get_double("train_lr", 0.15);
  tc.epochs = static_cast<int>(cfg.get_int("train_epochs", 30));
  tc.batch = static_cast<int>(cfg.get_int("train_batch", 8));
  tc.init_scale = cfg.get_double("train_init_scale", 1.0);
  tc.seed = cfg.get_u64("seed", 1);
  if (has_seed) tc.seed = seed_override;

  const PatchSet cls = read_corpus(cfg.require_string("corpus_cls"));
  nn::SegNetModel segnet =
      nn::SegNetModel::make(static_cast<int>(kClassifyPatchPx), {8, 16, 32},
                            tc.seed, tc.init_scale);
  nn::TrainResult r1 = train(segnet, corpus_to_samples(cls), tc);
  if (r1.aborted) throw ValidationError("train: classifier " + r1.abort_reason);
  const std::filesystem::path segnet_path = cfg.require_string("model_segnet_out");
  save_model(segnet, segnet_path);
  write_loss_csv(r1, segnet_path.string() + ".loss.csv");
  write_meta(segnet_path, "train", cfg);

  const PatchSet seg = read_corpus(cfg.require_string("corpus_seg"));
  nn::TrainConfig tseg = tc;
  tseg.epochs = static_cast<int>(cfg.get_int("train_epochs_seg", tc.epochs));
  tseg.lr = cfg.get_double("train_lr_seg", tc.lr);
  nn::FeedbackModel feedback =
      nn::FeedbackModel::make(static_cast<int>(kSegmentPatchPx), {4, 8, 16},
                              tseg.seed, tseg.init_scale);
  nn::TrainResult r2 = train(feedback, corpus_to_samples(seg), tseg);
  if (r2.aborted) throw ValidationError("train: segmenter " + r2.abort_reason);
  const std::filesystem::path feedback_path = cfg.require_string("model_feedback_out");
  save_model(feedback, feedback_path);
  write_loss_csv(r2, feedback_path.string() + ".loss.csv");
  write_meta(feedback_path, "train", cfg);
}

void stage_detect(const KeyValues& cfg, int threads) {
  const ImageTile tile = read_tile(cfg.require_string("imagery"));
  const nn::SegNetModel classifier = nn::load_segnet(cfg.require_string("model_segnet"));
  const nn::FeedbackModel segmenter =
      nn::load_feedback(cfg.require_string("model_feedback"));

  DetectParams p;
  p.smooth_radius = static_cast<int>(cfg.get_int("smooth_radius", 1));
  p.edge_low = static_cast<float>(cfg.get_double("edge_low", 0.06));
  p.edge_high = static_cast<float>(cfg.get_double("edge_high", 0.14));
  p.hough_min_support = static_cast<int>(cfg.get_int("hough_min_support", 25));
  p.feedback_passes = static_cast<int>(cfg.get_int("feedback_passes", 2));
  p.footprint_threshold = cfg.get_double("footprint_threshold", 0.5);
  p.cascade_tau = cfg.get_double("cascade_tau", 0.5);
  p.threads = threads;
  if (!(p.cascade_tau >= 0.0 && p.cascade_tau <= 1.0))
    throw ConfigError("cascade_tau must be in [0,1]");

  const std::filesystem::path out = cfg.require_string("out_dir");
  std::filesystem::create_directories(out);
  const DetectResult res = detect_tile(tile, classifier, segmenter, p);

  write_grid_ascii(res.built, out / "built.asc");
  write_grid_ascii(res.fraction, out / "fraction.asc");
  write_grid_ascii(res.scores, out / "scores.asc");

  json report;
  report["windows_total"] = res.windows_total;
  report["windows_candidate"] = res.windows_candidate;
  report["candidate_fraction"] =
      res.windows_total == 0
          ? 0.0
          : static_cast<double>(res.windows_candidate) /
                static_cast<double>(res.windows_total);
  report["cells_built"] = res.cells_built;
  report["built_fraction"] =
      res.built.values.empty()
          ? 0.0
          : static_cast<double>(res.cells_built) /
                static_cast<double>(res.built.values.size());
  write_json(report, out / "detect_report.json");
  for (const char* name : {"built.asc", "fraction.asc", "scores.asc",
                           "detect_report.json"})
    write_meta(out / name, "detect", cfg);
}

void stage_allocate(const KeyValues& cfg) {
  const RasterU8 built = read_grid_ascii_u8(cfg.require_string("built"));
  const Raster<double> frac = read_grid_ascii(cfg.require_string("fraction"));
  const CensusTable census = read_census_csv(cfg.require_string("census"));
  const RasterI32 admin = read_grid_ascii_i32(cfg.require_string("admin"));
  const std::filesystem::path out = cfg.require_string("out_dir");
  std::filesystem::create_directories(out);

  const AllocationResult uni = allocate_uniform(census, admin, built);
  const AllocationResult fra = allocate_fractional(census, admin, frac);
  write_grid_ascii(uni.population, out / "population_uniform.asc");
  write_grid_ascii(fra.population, out / "population_fractional.asc");
  write_unallocated_csv(uni.unallocated, out / "unallocated_uniform.csv");
  write_unallocated_csv(fra.unallocated, out / "unallocated_fractional.csv");

  // Conservation audit: per-unit allocated sums against the census.
  json report;
  auto conservation = [&](const Raster<double>& pop,
                          const std::vector<UnallocatedEntry>& unallocated) {
    std::unordered_map<std::int32_t, double> sums;
    for (std::size_t i = 0; i < admin.values.size(); ++i)
      if (admin.values[i] != admin.nodata) sums[admin.values[i]] += pop.values[i];
    std::set<std::int32_t> skip;
    for (const UnallocatedEntry& e : unallocated) skip.insert(e.unit_id);
    double max_rel = 0.0;
    for (const CensusRecord& r : census.records) {
      if (r.population <= 0.0 || skip.count(r.unit_id) != 0) continue;
      const double got = sums.count(r.unit_id) != 0 ? sums.at(r.unit_id) : 0.0;
      max_rel = std::max(max_rel, std::fabs(got - r.population) / r.population);
    }
    return max_rel;
  };
  report["conservation_max_rel_error_uniform"] =
      conservation(uni.population, uni.unallocated);
  report["conservation_max_rel_error_fractional"] =
      conservation(fra.population, fra.unallocated);
  report["unallocated_units_uniform"] = uni.unallocated.size();
  report["unallocated_units_fractional"] = fra.unallocated.size();

  // Optional uncertainty experiment against a finer census level.
  if (cfg.has("census_fine") && cfg.has("admin_fine")) {
    const CensusTable fine_census = read_census_csv(cfg.require_string("census_fine"));
    const RasterI32 fine_admin = read_grid_ascii_i32(cfg.require_string("admin_fine"));
    const std::string method = cfg.get_string("uncertainty_method", "uniform");
    const UncertaintyReport rep = estimate_uncertainty(
        census, admin, fine_census, fine_admin, built, frac,
        method == "fractional" ? AllocMethod::kFractional : AllocMethod::kUniform);
    json u;
    u["method"] = method;
    u["fine_units"] = rep.ratios.size();
    u["skipped_zero_estimate"] = rep.skipped_zero_estimate;
    u["log_std"] = rep.log_std;
    u["error_factor"] = rep.error_factor;
    u["log_std_weighted"] = rep.log_std_weighted;
    u["error_factor_weighted"] = rep.error_factor_weighted;
    report["uncertainty"] = u;

    std::ostringstream ratios;
    ratios << "fine_id,truth,estimate,log_ratio\n";
    for (const FineUnitRatio& r : rep.ratios)
      ratios << r.fine_id << ',' << fmt_double(r.truth) << ','
             << fmt_double(r.estimate) << ',' << fmt_double(r.log_ratio) << '\n';
    write_text_file(out / "uncertainty_ratios.csv", ratios.str());
    write_meta(out / "uncertainty_ratios.csv", "allocate", cfg);
  }

  write_json(report, out / "allocate_report.json");
  for (const char* name :
       {"population_uniform.asc", "population_fractional.asc",
        "unallocated_uniform.csv", "unallocated_fractional.csv",
        "allocate_report.json"})
    write_meta(out / name, "allocate", cfg);
}

void stage_clusters(const KeyValues& cfg, int threads) {
  const Raster<double> pop = read_grid_ascii(cfg.require_string("population"));
  const std::size_t factor =
      static_cast<std::size_t>(cfg.get_int("km_factor", 30));
  const double density_min = cfg.get_double("cluster_density_min", 300.0);
  const double pop_min = cfg.get_double("cluster_pop_min", 5000.0);
  const int connectivity = static_cast<int>(cfg.get_int("cluster_connectivity", 4));
  const double bin_km = cfg.get_double("cdf_bin_km", 1.0);
  const std::filesystem::path out = cfg.require_string("out_dir");
  std::filesystem::create_directories(out);

  const ClusterMap cm =
      find_urban_clusters(pop, factor, density_min, pop_min, connectivity);
  write_grid_ascii(cm.labels, out / "clusters.asc");
  std::ostringstream list;
  list << "cluster_id,population,cells\n";
  for (const ClusterInfo& ci : cm.clusters)
    list << ci.id << ',' << fmt_double(ci.population) << ',' << ci.cells << '\n';
  write_text_file(out / "cluster_list.csv", list.str());
  render_clusters(cm.labels, out / "clusters.ppm");

  // Throws when no cluster exists; the CLI maps that to a nonzero exit.
  const DistanceCdfResult cdf = distance_cdf(cm.pop_km, cm, bin_km, threads);
  auto write_cdf = [&](const DistanceCdf& c, const std::filesystem::path& path) {
    std::ostringstream ss;
    ss << "distance_km,cum_population_fraction\n";
    for (std::size_t i = 0; i < c.edges_km.size(); ++i)
      ss << fmt_double(c.edges_km[i]) << ',' << fmt_double(c.cum_fraction[i]) << '\n';
    write_text_file(path, ss.str());
  };
  auto write_pct = [&](const CdfPercentiles& p, const std::filesystem::path& path) {
    std::ostringstream ss;
    ss << "p,distance_km\n";
    ss << "0.9," << fmt_double(p.d90) << '\n';
    ss << "0.95," << fmt_double(p.d95) << '\n';
    ss << "0.99," << fmt_double(p.d99) << '\n';
    write_text_file(path, ss.str());
  };
  write_cdf(cdf.all_pop, out / "cdf_all.csv");
  write_pct(cdf.pct_all, out / "percentiles_all.csv");
  if (cdf.rural_only.total_population > 0.0) {
    write_cdf(cdf.rural_only, out / "cdf_rural.csv");
    write_pct(cdf.pct_rural, out / "percentiles_rural.csv");
  }
  for (const char* name : {"clusters.asc", "cluster_list.csv", "cdf_all.csv",
                           "percentiles_all.csv", "clusters.ppm"})
    write_meta(out / name, "clusters", cfg);
}

void stage_validate(const KeyValues& cfg, int threads) {
  const RasterU8 pred = read_grid_ascii_u8(cfg.require_string("pred"));
  const std::filesystem::path out = cfg.require_string("out_dir");
  std::filesystem::create_directories(out);

  json summary;
  if (cfg.has("truth")) {
    const RasterU8 truth = read_grid_ascii_u8(cfg.require_string("truth"));
    try {
      if (!same_grid(pred.grid, truth.grid))
        throw ValidationError("pred/truth grid mismatch");
      const PrecisionRecall pr = precision_recall(pred.values, truth.values);
      summary["pr"] = pr.precision ? json(*pr.precision) : json(nullptr);
      summary["re"] = pr.recall ? json(*pr.recall) : json(nullptr);
      std::ostringstream ss;
      ss << "tp,fp,fn,tn,precision,recall\n";
      ss << pr.counts.tp << ',' << pr.counts.fp << ',' << pr.counts.fn << ','
         << pr.counts.tn << ','
         << (pr.precision ? fmt_double(*pr.precision) : std::string()) << ','
         << (pr.recall ? fmt_double(*pr.recall) : std::string()) << '\n';
      write_text_file(out / "pr.csv", ss.str());
      write_meta(out / "pr.csv", "validate", cfg);

      const std::size_t factor =
          static_cast<std::size_t>(cfg.get_int("region_factor", 2));
      const std::optional<double> rr = region_recall(pred, truth, factor);
      summary["region_recall"] = rr ? json(*rr) : json(nullptr);
      std::ostringstream rs;
      rs << "factor,recall\n"
         << factor << ',' << (rr ? fmt_double(*rr) : std::string()) << '\n';
      write_text_file(out / "region_recall.csv", rs.str());
      write_meta(out / "region_recall.csv", "validate", cfg);
    } catch (const ValidationError& e) {
      summary["pr_error"] = e.what();
    }
  } else {
    summary["pr_skipped"] = "no truth raster configured";
  }

  if (cfg.has("compare_b") && cfg.has("compare_c")) {
    try {
      const RasterU8 b = read_grid_ascii_u8(cfg.require_string("compare_b"));
      const RasterU8 c = read_grid_ascii_u8(cfg.require_string("compare_c"));
      const CrossCompareResult cc = cross_compare(pred, b, c);
      summary["agreement_histogram"] = cc.table.counts;
      std::ostringstream ss;
      ss << "code_abc,count\n";
      for (int code = 0; code < 8; ++code) {
        const std::string bits = {static_cast<char>('0' + ((code >> 2) & 1)),
                                  static_cast<char>('0' + ((code >> 1) & 1)),
                                  static_cast<char>('0' + (code & 1))};
        ss << bits << ',' << cc.table.counts[static_cast<std::size_t>(code)] << '\n';
      }
      write_text_file(out / "agreement.csv", ss.str());
      std::ostringstream comps;
      comps << "rank,component_label,cells\n";
      for (std::size_t i = 0; i < cc.components.size() && i < 500; ++i)
        comps << i + 1 << ',' << cc.components[i].label << ','
              << cc.components[i].cells << '\n';
      write_text_file(out / "disagreement_components.csv", comps.str());
      write_meta(out / "agreement.csv", "validate", cfg);
      write_meta(out / "disagreement_components.csv", "validate", cfg);
    } catch (const ValidationError& e) {
      summary["agreement_error"] = e.what();
    }
  } else {
    summary["agreement_skipped"] = "need both compare_b and compare_c";
  }

  if (cfg.has("households")) {
    try {
      const std::vector<GeoPoint> pts =
          read_points_csv(cfg.require_string("households"));
      const double radius = cfg.get_double("coincidence_radius_m", 100.0);
      const CoincidenceResult co = household_coincidence(pts, pred, radius, threads);
      summary["coincidence_fraction"] = co.fraction;
      std::ostringstream ss;
      ss << "lat,lon,distance_km,matched\n";
      for (std::size_t i = 0; i < pts.size(); ++i)
        ss << fmt_double(pts[i].lat) << ',' << fmt_double(pts[i].lon) << ','
           << fmt_double(co.distance_km[i]) << ',' << int(co.matched[i]) << '\n';
      write_text_file(out / "coincidence.csv", ss.str());
      write_meta(out / "coincidence.csv", "validate", cfg);
    } catch (const ValidationError& e) {
      summary["coincidence_error"] = e.what();
    }
  } else {
    summary["coincidence_skipped"] = "no household points configured";
  }

  write_json(summary, out / "validation_summary.json");
  write_meta(out / "validation_summary.json", "validate", cfg);
}

}  // namespace popmap
