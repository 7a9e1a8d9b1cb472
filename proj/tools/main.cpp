// Apache License, Version 2.0, refer to LICENSE.txt
//
// homedet: detect home cell towers from call detail records, measure how
// strongly the decision rules disagree, validate the resulting population
// counts, and map their spatial structure. All stages exchange plain CSV /
// GeoJSON files and write a JSON manifest describing every run.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "homedet/compare.hpp"
#include "homedet/csv.hpp"
#include "homedet/error.hpp"
#include "homedet/hda.hpp"
#include "homedet/ingest.hpp"
#include "homedet/io.hpp"
#include "homedet/spatial_stats.hpp"
#include "homedet/synth.hpp"
#include "homedet/timeutil.hpp"
#include "homedet/validate.hpp"
#include "homedet/voronoi.hpp"

namespace {

using namespace homedet;

#ifndef HOMEDET_VERSION
#define HOMEDET_VERSION "0.0.0"
#endif

std::string now_utc() {
  return format_iso8601_utc(static_cast<UnixSeconds>(std::time(nullptr)));
}

RunManifest new_manifest(const std::string& command) {
  RunManifest m;
  m.command = command;
  m.version = HOMEDET_VERSION;
  m.created_utc = now_utc();
  return m;
}

void write_manifest(RunManifest& m, const std::string& primary_output,
                    const std::string& explicit_path) {
  const std::string path =
      explicit_path.empty() ? primary_output + ".manifest.json" : explicit_path;
  write_file(path, manifest_json(m));
}

void add_config(RunManifest& m, const std::string& key, const std::string& value) {
  m.config.emplace_back(key, value);
}

TowerNetwork load_network(const std::string& towers_path) {
  return TowerNetwork::build(read_towers_csv(towers_path));
}

// Shared flags of the ingest-like commands.
struct PeriodArgs {
  std::string months;
  double tz_offset_hours = 2.0;
  std::string window = "19:00-09:00";
};

void add_period_flags(CLI::App* cmd, PeriodArgs& args) {
  cmd->add_option("--months", args.months,
                  "study months, inclusive range YYYY-MM:YYYY-MM or a single YYYY-MM")
      ->required();
  cmd->add_option("--tz", args.tz_offset_hours,
                  "UTC offset in hours used for local dates and the night window");
  cmd->add_option("--window", args.window, "night window HH:MM-HH:MM, wraps over midnight");
}

AggregateConfig make_aggregate_config(const PeriodArgs& args) {
  AggregateConfig cfg;
  cfg.periods = parse_month_range(args.months, args.tz_offset_hours);
  cfg.tz_offset_hours = args.tz_offset_hours;
  cfg.window = parse_window(args.window);
  return cfg;
}

std::string table_filename(const HomeTable& t) {
  return "homes_" + std::string(rule_name(t.rule)) + "_" + t.period + ".csv";
}

int cmd_ingest(const std::string& cdr, const std::string& towers, const PeriodArgs& period_args,
               bool strict, unsigned workers, const std::string& out,
               const std::string& manifest_path) {
  const TowerNetwork net = load_network(towers);
  const AggregateConfig cfg = make_aggregate_config(period_args);
  const IngestResult result = ingest_file(cdr, net, cfg, strict, workers);
  write_file(out, aggregates_csv_string(result, net, cfg));
  std::cout << ingest_report_string(result.report, cfg.periods);

  RunManifest m = new_manifest("ingest");
  manifest_add_input(m, cdr);
  manifest_add_input(m, towers);
  add_config(m, "months", period_args.months);
  add_config(m, "tz", format_tz(period_args.tz_offset_hours));
  add_config(m, "window", period_args.window);
  add_config(m, "strict", strict ? "1" : "0");
  m.outputs.push_back(out);
  write_manifest(m, out, manifest_path);
  return 0;
}

int cmd_detect(const std::string& aggregates, const std::string& towers,
               const std::string& rules_spec, double radius_m, unsigned workers,
               const std::string& out_dir, const std::string& manifest_path) {
  const TowerNetwork net = load_network(towers);
  const std::vector<Rule> rules = parse_rules(rules_spec);
  const AggregatesFile agg = read_aggregates_csv(aggregates, net);
  std::vector<std::string> labels = agg.period_labels;
  {
    // files may lack period metadata; fall back to index labels
    std::uint32_t max_period = 0;
    for (const auto& s : agg.summaries) max_period = std::max(max_period, s.period);
    while (labels.size() <= max_period) labels.push_back("p" + std::to_string(labels.size()));
  }

  std::filesystem::create_directories(out_dir);
  RunManifest m = new_manifest("detect");
  manifest_add_input(m, aggregates);
  manifest_add_input(m, towers);
  add_config(m, "rules", rules_spec);
  add_config(m, "radius", std::to_string(radius_m));

  std::string first_output;
  for (Rule rule : rules) {
    const auto tables = run_hda(rule, agg.summaries, net, labels, radius_m, workers);
    for (const auto& table : tables) {
      const std::string path = (std::filesystem::path(out_dir) / table_filename(table)).string();
      write_file(path, home_table_csv_string(table, net));
      m.outputs.push_back(path);
      if (first_output.empty()) first_output = path;
      std::cout << rule_name(table.rule) << " " << table.period << ": " << table.rows.size()
                << " homes, " << table.l1_ties << " L1 ties\n";
    }
  }
  if (first_output.empty()) throw_data("no summaries in '" + aggregates + "'");
  write_manifest(m, (std::filesystem::path(out_dir) / "detect").string(), manifest_path);
  return 0;
}

int cmd_compare(const std::vector<std::string>& table_paths, const std::string& towers,
                bool missing_as_mismatch, const std::string& out,
                const std::string& manifest_path) {
  const TowerNetwork net = load_network(towers);
  std::vector<HomeTable> tables;
  tables.reserve(table_paths.size());
  for (const auto& path : table_paths) tables.push_back(read_home_table_csv(path, net));

  // group per period, emit one matrix block per period
  std::vector<std::string> periods;
  for (const auto& t : tables)
    if (std::find(periods.begin(), periods.end(), t.period) == periods.end())
      periods.push_back(t.period);
  std::sort(periods.begin(), periods.end());

  const MissingPolicy policy =
      missing_as_mismatch ? MissingPolicy::count_as_mismatch : MissingPolicy::omit;
  std::vector<SmcResult> all;
  for (const auto& period : periods) {
    std::vector<HomeTable> group;
    for (auto& t : tables)
      if (t.period == period) group.push_back(t);
    if (group.size() < 2)
      throw_data("period '" + period + "' has only one table; nothing to compare");
    auto block = smc_matrix(group, policy);
    all.insert(all.end(), block.begin(), block.end());
  }
  write_file(out, smc_csv_string(all));
  for (const auto& r : all)
    if (r.rule_a != r.rule_b)
      std::cout << r.period << " " << rule_name(r.rule_a) << " vs " << rule_name(r.rule_b)
                << ": " << r.smc_pct << "% of " << r.n_joint << "\n";

  RunManifest m = new_manifest("compare");
  for (const auto& path : table_paths) manifest_add_input(m, path);
  manifest_add_input(m, towers);
  add_config(m, "missing_as_mismatch", missing_as_mismatch ? "1" : "0");
  m.outputs.push_back(out);
  write_manifest(m, out, manifest_path);
  return 0;
}

int cmd_validate(const std::vector<std::string>& table_paths, const std::string& towers,
                 const std::string& census_path, bool joint_nonzero, const std::string& out,
                 const std::string& manifest_path) {
  const TowerNetwork net = load_network(towers);
  const PopulationVector census = read_census_csv(census_path, net);
  std::vector<HomeTable> tables;
  tables.reserve(table_paths.size());
  for (const auto& path : table_paths) tables.push_back(read_home_table_csv(path, net));

  const auto reports = validate_against_census(tables, census, net, joint_nonzero);
  write_file(out, csm_csv_string(reports));
  for (const auto& r : reports) {
    char line[160];
    std::snprintf(line, sizeof line, "%s %s: %.6f deg (gap to 0 deg: %.6f)\n",
                  std::string(rule_name(r.rule)).c_str(), r.period.c_str(), r.csm_deg, r.csm_deg);
    std::cout << line;
  }

  RunManifest m = new_manifest("validate");
  for (const auto& path : table_paths) manifest_add_input(m, path);
  manifest_add_input(m, towers);
  manifest_add_input(m, census_path);
  add_config(m, "joint_nonzero", joint_nonzero ? "1" : "0");
  m.outputs.push_back(out);
  write_manifest(m, out, manifest_path);
  return 0;
}

int cmd_hotspots(const std::string& towers, const std::string& values_path,
                 const std::string& table_path, const std::string& scheme, double band_m,
                 int confidence, const std::string& ratio_to, unsigned workers,
                 const std::string& out_geojson, const std::string& out_csv,
                 const std::string& manifest_path) {
  if (values_path.empty() == table_path.empty())
    throw Error(Errc::usage, "exactly one of --values and --table is required");
  const TowerNetwork net = load_network(towers);
  const std::string in_values = values_path.empty() ? table_path : values_path;
  const PopulationVector values =
      values_path.empty() ? population_counts(read_home_table_csv(table_path, net), net)
                          : read_census_csv(values_path, net);

  Tessellation tess = voronoi(net, workers);
  SpatialWeights weights = scheme == "band" ? SpatialWeights::distance_band(net, band_m)
                                            : SpatialWeights::voronoi_adjacency(tess, net);
  const std::vector<double> z = gi_star(values.values, weights);
  const HotspotMap map = classify(z, confidence);

  LogRatioMap lr;
  const LogRatioMap* lr_ptr = nullptr;
  if (!ratio_to.empty()) {
    const PopulationVector denom = read_census_csv(ratio_to, net);
    lr = log_ratio(values.values, denom.values);
    lr_ptr = &lr;
    std::cout << "log_ratio skipped " << lr.skipped << " tower(s) with a zero side\n";
  }

  RunManifest m = new_manifest("hotspots");
  manifest_add_input(m, towers);
  manifest_add_input(m, in_values);
  if (!ratio_to.empty()) manifest_add_input(m, ratio_to);
  add_config(m, "scheme", weights.scheme());
  if (scheme == "band") add_config(m, "band_m", std::to_string(band_m));
  add_config(m, "confidence", std::to_string(confidence));

  if (!out_geojson.empty()) {
    write_file(out_geojson, hotspot_geojson(tess, net, values.values, map, lr_ptr));
    m.outputs.push_back(out_geojson);
  }
  if (!out_csv.empty()) {
    write_file(out_csv, hotspot_csv_string(net, values.values, map, lr_ptr,
                                           "scheme=" + weights.scheme()));
    m.outputs.push_back(out_csv);
  }
  std::size_t hot = 0, cold = 0;
  for (auto c : map.cls) {
    hot += c == SpotClass::hot;
    cold += c == SpotClass::cold;
  }
  std::cout << hot << " hot, " << cold << " cold of " << map.cls.size() << " towers at "
            << confidence << "%\n";
  write_manifest(m, out_geojson.empty() ? out_csv : out_geojson, manifest_path);
  return 0;
}

int cmd_voronoi(const std::string& towers, unsigned workers, const std::string& out_geojson,
                const std::string& manifest_path) {
  const TowerNetwork net = load_network(towers);
  const Tessellation tess = voronoi(net, workers);
  write_file(out_geojson, voronoi_geojson(tess, net));
  std::cout << tess.cells.size() << " cells for " << net.size() << " towers\n";

  RunManifest m = new_manifest("voronoi");
  manifest_add_input(m, towers);
  m.outputs.push_back(out_geojson);
  write_manifest(m, out_geojson, manifest_path);
  return 0;
}

int cmd_synth_generate(const std::string& world_path, std::uint64_t seed,
                       const std::string& out_dir, const std::string& manifest_path) {
  SynthConfig cfg = parse_synth_config(read_file(world_path), world_path);
  cfg.seed = seed;
  validate_config(cfg);
  const World world = generate_world(cfg);

  std::filesystem::create_directories(out_dir);
  const std::string stamp = "seed=" + std::to_string(cfg.seed);
  const auto dir = std::filesystem::path(out_dir);
  const std::string towers_path = (dir / "towers.csv").string();
  const std::string truth_path = (dir / "truth.csv").string();
  const std::string census_path = (dir / "census.csv").string();
  const std::string config_path = (dir / "world.cfg").string();
  write_file(towers_path, towers_csv_string(world.net.towers(), stamp));
  write_file(truth_path, truth_csv_string(world.truth, world.net, stamp));
  write_file(census_path,
             census_csv_string(census_from_truth(world.truth, world.net), world.net, stamp));
  write_file(config_path, "# " + stamp + "\n" + synth_config_string(cfg));
  std::cout << world.net.size() << " towers, " << world.truth.users.size() << " users retained of "
            << cfg.n_users << "\n";

  RunManifest m = new_manifest("synth generate");
  manifest_add_input(m, world_path);
  m.seed = cfg.seed;
  m.outputs = {towers_path, truth_path, census_path, config_path};
  write_manifest(m, (dir / "synth").string(), manifest_path);
  return 0;
}

int cmd_synth_simulate(const std::string& world_path, std::uint64_t seed,
                       const PeriodArgs& period_args, const std::string& out,
                       const std::string& manifest_path) {
  SynthConfig cfg = parse_synth_config(read_file(world_path), world_path);
  cfg.seed = seed;
  cfg.tz_offset_hours = period_args.tz_offset_hours;
  cfg.window = parse_window(period_args.window);
  validate_config(cfg);
  const World world = generate_world(cfg);
  const auto periods = parse_month_range(period_args.months, cfg.tz_offset_hours);

  // one file, header written once
  std::string content;
  for (std::size_t i = 0; i < periods.size(); ++i) {
    std::string part = simulate_cdr_csv(world, periods[i]);
    // strip the comment + header of every part after the first
    std::size_t begin = 0;
    if (i > 0) {
      begin = part.find('\n') + 1;         // "# seed=..." line
      begin = part.find('\n', begin) + 1;  // header row
    }
    content.append(part, begin, part.size() - begin);
  }
  write_file(out, content);
  std::uint64_t data_rows = 0;
  for_each_csv_line(content, [&](std::string_view, std::size_t) {
    ++data_rows;
    return true;
  });
  std::cout << (data_rows > 0 ? data_rows - 1 : 0) << " records over " << periods.size()
            << " period(s)\n";

  RunManifest m = new_manifest("synth simulate");
  manifest_add_input(m, world_path);
  m.seed = cfg.seed;
  add_config(m, "months", period_args.months);
  add_config(m, "tz", format_tz(cfg.tz_offset_hours));
  add_config(m, "window", format_window(cfg.window));
  m.outputs.push_back(out);
  write_manifest(m, out, manifest_path);
  return 0;
}

int cmd_synth_evaluate(const std::string& table_path, const std::string& truth_path,
                       const std::string& towers, const std::string& aggregates_path,
                       double within_m, const std::string& out,
                       const std::string& manifest_path) {
  const TowerNetwork net = load_network(towers);
  const HomeTable table = read_home_table_csv(table_path, net);
  const GroundTruth truth = read_truth_csv(truth_path, net);

  EvaluateOptions opts;
  opts.within_radius_m = within_m;
  AggregatesFile agg;
  if (!aggregates_path.empty()) {
    agg = read_aggregates_csv(aggregates_path, net);
    opts.summaries = &agg.summaries;
    for (std::uint32_t p = 0; p < agg.period_labels.size(); ++p)
      if (agg.period_labels[p] == table.period) opts.period_index = p;
  }
  const AccuracyReport report = evaluate(table, truth, net, opts);
  write_file(out, accuracy_csv_string(report));
  char line[160];
  std::snprintf(line, sizeof line, "%s %s: %.3f%% exact, %.3f%% within %.0f m (%llu users)\n",
                std::string(rule_name(report.rule)).c_str(), report.period.c_str(),
                report.all().hit_rate_pct(), report.all().within_pct(), within_m,
                static_cast<unsigned long long>(report.all().n));
  std::cout << line;

  RunManifest m = new_manifest("synth evaluate");
  manifest_add_input(m, table_path);
  manifest_add_input(m, truth_path);
  manifest_add_input(m, towers);
  if (!aggregates_path.empty()) manifest_add_input(m, aggregates_path);
  add_config(m, "within_m", std::to_string(within_m));
  m.outputs.push_back(out);
  write_manifest(m, out, manifest_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"home tower detection from call detail records"};
  app.set_version_flag("--version", HOMEDET_VERSION);
  app.require_subcommand(1);

  std::string manifest_path;
  app.add_option("--manifest", manifest_path,
                 "run manifest path (default: <output>.manifest.json)");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "reduce a CDR stream to per-user tower activity");
  std::string in_cdr, in_towers, out_path;
  PeriodArgs period_args;
  bool strict = false;
  unsigned workers = 1;
  ingest->add_option("--cdr", in_cdr, "CDR CSV (optionally .gz)")->required();
  ingest->add_option("--towers", in_towers, "tower CSV")->required();
  add_period_flags(ingest, period_args);
  ingest->add_flag("--strict", strict, "fail on the first malformed record");
  ingest->add_option("--workers", workers, "parser threads (output independent of it)");
  ingest->add_option("--out", out_path, "aggregates CSV")->required();
  ingest->set_config("--config");

  // detect
  auto* detect = app.add_subcommand("detect", "run decision rules over aggregates");
  std::string in_aggregates, rules_spec = "all", out_dir;
  double radius_m = 1000.0;
  detect->add_option("--aggregates", in_aggregates, "aggregates CSV from ingest")->required();
  detect->add_option("--towers", in_towers, "tower CSV")->required();
  detect->add_option("--rules", rules_spec, "all, or ids/names: 1,3 or activities,time");
  detect->add_option("--radius", radius_m, "perimeter radius in meters for the space rules");
  detect->add_option("--workers", workers, "worker threads");
  detect->add_option("--out-dir", out_dir, "directory for homes_<rule>_<period>.csv")->required();
  detect->set_config("--config");

  // compare
  auto* compare = app.add_subcommand("compare", "pairwise L1 agreement between tables");
  std::vector<std::string> table_paths;
  bool missing_as_mismatch = false;
  compare->add_option("--tables", table_paths, "home table CSVs (>= 2 per period)")
      ->required()
      ->expected(-1);
  compare->add_option("--towers", in_towers, "tower CSV")->required();
  compare->add_flag("--missing-as-mismatch", missing_as_mismatch,
                    "count users detected by only one table as mismatches");
  compare->add_option("--out", out_path, "matrix CSV")->required();
  compare->set_config("--config");

  // validate
  auto* validate = app.add_subcommand("validate", "angle between table counts and a census");
  std::string census_path;
  bool joint_nonzero = false;
  validate->add_option("--tables", table_paths, "home table CSVs")->required()->expected(-1);
  validate->add_option("--towers", in_towers, "tower CSV")->required();
  validate->add_option("--census", census_path, "census CSV tower_id,population")->required();
  validate->add_flag("--joint-nonzero", joint_nonzero,
                     "restrict each comparison to towers positive on both sides");
  validate->add_option("--out", out_path, "report CSV")->required();
  validate->set_config("--config");

  // hotspots
  auto* hotspots = app.add_subcommand("hotspots", "local z-scores over per-tower values");
  std::string values_path, table_path, scheme = "voronoi", ratio_to, out_geojson, out_csv;
  double band_m = 5000.0;
  int confidence = 90;
  hotspots->add_option("--towers", in_towers, "tower CSV")->required();
  hotspots->add_option("--values", values_path, "per-tower values CSV (tower_id,population)");
  hotspots->add_option("--table", table_path, "home table CSV; values become homes per tower");
  hotspots->add_option("--scheme", scheme, "voronoi or band")
      ->check(CLI::IsMember({"voronoi", "band"}));
  hotspots->add_option("--band-m", band_m, "distance band in meters for --scheme band");
  hotspots->add_option("--confidence", confidence, "90, 95 or 99")
      ->check(CLI::IsMember({90, 95, 99}));
  hotspots->add_option("--ratio-to", ratio_to,
                       "second values CSV; adds log(values/ratio_to) per tower");
  hotspots->add_option("--workers", workers, "worker threads");
  hotspots->add_option("--out-geojson", out_geojson, "cell polygons with z and class");
  hotspots->add_option("--out-csv", out_csv, "long-format CSV");
  hotspots->set_config("--config");

  // voronoi
  auto* vor = app.add_subcommand("voronoi", "tower coverage cells clipped to the boundary");
  vor->add_option("--towers", in_towers, "tower CSV")->required();
  vor->add_option("--workers", workers, "worker threads");
  vor->add_option("--out-geojson", out_geojson, "FeatureCollection output")->required();
  vor->set_config("--config");

  // synth
  auto* synth = app.add_subcommand("synth", "synthetic worlds with planted ground truth");
  synth->require_subcommand(1);
  std::string world_path, truth_path, aggregates_path;
  std::uint64_t seed = 0;
  double within_m = 1000.0;

  auto* generate = synth->add_subcommand("generate", "towers, users and ground truth");
  generate->add_option("--world", world_path, "world config, key=value lines")->required();
  generate->add_option("--seed", seed, "generator seed")->required();
  generate->add_option("--out-dir", out_dir, "output directory")->required();

  auto* simulate = synth->add_subcommand("simulate", "CDR stream for the configured months");
  simulate->add_option("--world", world_path, "world config, key=value lines")->required();
  simulate->add_option("--seed", seed, "generator seed")->required();
  add_period_flags(simulate, period_args);
  simulate->add_option("--out", out_path, "CDR CSV (optionally .gz)")->required();

  auto* evaluate = synth->add_subcommand("evaluate", "detected homes vs planted homes");
  evaluate->add_option("--table", table_path, "home table CSV")->required();
  evaluate->add_option("--truth", truth_path, "ground truth CSV")->required();
  evaluate->add_option("--towers", in_towers, "tower CSV")->required();
  evaluate->add_option("--aggregates", aggregates_path,
                       "aggregates CSV; enables the low-activity subgroup");
  evaluate->add_option("--within-m", within_m, "radius for the near-miss rate");
  evaluate->add_option("--out", out_path, "accuracy CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    app.exit(e);
    return static_cast<int>(Errc::usage);
  }

  try {
    if (*ingest)
      return cmd_ingest(in_cdr, in_towers, period_args, strict, workers, out_path, manifest_path);
    if (*detect)
      return cmd_detect(in_aggregates, in_towers, rules_spec, radius_m, workers, out_dir,
                        manifest_path);
    if (*compare)
      return cmd_compare(table_paths, in_towers, missing_as_mismatch, out_path, manifest_path);
    if (*validate)
      return cmd_validate(table_paths, in_towers, census_path, joint_nonzero, out_path,
                          manifest_path);
    if (*hotspots) {
      if (out_geojson.empty() && out_csv.empty())
        throw_usage("hotspots needs --out-geojson and/or --out-csv");
      return cmd_hotspots(in_towers, values_path, table_path, scheme, band_m, confidence,
                          ratio_to, workers, out_geojson, out_csv, manifest_path);
    }
    if (*vor) return cmd_voronoi(in_towers, workers, out_geojson, manifest_path);
    if (*synth) {
      if (*generate) return cmd_synth_generate(world_path, seed, out_dir, manifest_path);
      if (*simulate)
        return cmd_synth_simulate(world_path, seed, period_args, out_path, manifest_path);
      if (*evaluate)
        return cmd_synth_evaluate(table_path, truth_path, in_towers, aggregates_path, within_m,
                                  out_path, manifest_path);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(Errc::data);
  }
  return 0;
}
