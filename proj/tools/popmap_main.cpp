#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "popmap/errors.hpp"
#include "popmap/pipeline.hpp"
#include "popmap/render.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;
constexpr int kExitConfig = 4;

struct GlobalArgs {
  std::string config_path;
  int threads = 1;
  std::uint64_t seed = 0;
  bool has_seed = false;
};

popmap::KeyValues load_config(const GlobalArgs& g) {
  if (g.config_path.empty())
    throw popmap::ConfigError("missing --config <path>");
  return popmap::KeyValues::load(g.config_path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "popmap: settlement detection and population mapping pipeline\n"
      "Stages exchange data through files; see README.md for formats."};
  app.require_subcommand(1);

  GlobalArgs g;
  app.add_option("--config", g.config_path, "flat key-value config file")
      ->envname("POPMAP_CONFIG");
  app.add_option("--threads", g.threads, "worker threads (never affects results)");
  auto* seed_opt = app.add_option("--seed", g.seed, "seed override for synth/train");

  auto* synth = app.add_subcommand("synth", "generate a synthetic world");
  auto* train = app.add_subcommand("train", "train classifier and segmenter");
  auto* detect = app.add_subcommand("detect", "imagery -> built/fraction rasters");
  auto* allocate = app.add_subcommand("allocate", "census -> population rasters");
  auto* clusters = app.add_subcommand("clusters", "urban clusters and distance CDF");
  auto* validate = app.add_subcommand("validate", "scoring battery");

  auto* render_cmd = app.add_subcommand("render", "raster -> PPM image");
  std::string render_input, render_style = "fraction", render_out;
  render_cmd->add_option("--input", render_input, "raster (ASCII grid)")->required();
  render_cmd->add_option("--style", render_style,
                         "binary|fraction|population-log|clusters");
  render_cmd->add_option("--out", render_out, "output PPM path")->required();

  CLI11_PARSE(app, argc, argv);
  g.has_seed = seed_opt->count() > 0;

  try {
    if (synth->parsed()) {
      popmap::stage_synth(load_config(g), g.seed, g.has_seed);
    } else if (train->parsed()) {
      popmap::stage_train(load_config(g), g.seed, g.has_seed);
    } else if (detect->parsed()) {
      popmap::stage_detect(load_config(g), g.threads);
    } else if (allocate->parsed()) {
      popmap::stage_allocate(load_config(g));
    } else if (clusters->parsed()) {
      popmap::stage_clusters(load_config(g), g.threads);
    } else if (validate->parsed()) {
      popmap::stage_validate(load_config(g), g.threads);
    } else if (render_cmd->parsed()) {
      const popmap::RenderStyle style = popmap::parse_render_style(render_style);
      if (style == popmap::RenderStyle::kClusters)
        popmap::render_clusters(popmap::read_grid_ascii_i32(render_input), render_out);
      else
        popmap::render(popmap::read_grid_ascii(render_input), style, render_out);
    }
  } catch (const popmap::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const popmap::ParseError& e) {
    std::fprintf(stderr, "parse error: %s\n", e.what());
    return kExitIo;
  } catch (const popmap::IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return kExitIo;
  } catch (const popmap::ValidationError& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
