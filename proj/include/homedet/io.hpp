// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "homedet/compare.hpp"
#include "homedet/hda.hpp"
#include "homedet/ingest.hpp"
#include "homedet/spatial_stats.hpp"
#include "homedet/synth.hpp"
#include "homedet/validate.hpp"
#include "homedet/voronoi.hpp"

namespace homedet {

// One table per file: `rule,period,user_id,l1,score_l1,l2,score_l2,l3,score_l3`
// (l2/l3 empty when fewer towers were ranked).
std::string home_table_csv_string(const HomeTable& t, const TowerNetwork& net,
                                  const std::string& stamp = {});
HomeTable read_home_table_csv(const std::string& path, const TowerNetwork& net);

// `period,rule_a,rule_b,n_joint,n_match,smc_pct`
std::string smc_csv_string(std::span<const SmcResult> results, const std::string& stamp = {});

// `rule,period,cosine,csm_deg`
std::string csm_csv_string(std::span<const CsmReport> reports, const std::string& stamp = {});

// `tower_id,value,z,class[,log_ratio]` (log_ratio column present when lr is,
// empty where undefined)
std::string hotspot_csv_string(const TowerNetwork& net, const Eigen::VectorXd& values,
                               const HotspotMap& map, const LogRatioMap* lr,
                               const std::string& stamp = {});

// FeatureCollection, one Feature per tower carrying its (possibly shared)
// Voronoi cell polygon and `tower_id`, `area_m2`.
std::string voronoi_geojson(const Tessellation& tess, const TowerNetwork& net);

// As above plus `value`, `z`, `class` and optional `log_ratio` properties.
std::string hotspot_geojson(const Tessellation& tess, const TowerNetwork& net,
                            const Eigen::VectorXd& values, const HotspotMap& map,
                            const LogRatioMap* lr);

// Human-readable ingest accounting, one line per counter plus per-period
// observed day counts.
std::string ingest_report_string(const IngestReport& report, std::span<const Period> periods);

struct RunManifest {
  std::string command;
  std::string version;
  std::vector<std::pair<std::string, std::string>> config;  // resolved key -> value
  std::vector<std::pair<std::string, std::string>> inputs;  // path -> sha256
  std::vector<std::string> outputs;
  std::optional<std::uint64_t> seed;
  std::string created_utc;
};

// Adds `path` with its content digest to the inputs.
void manifest_add_input(RunManifest& m, const std::string& path);

std::string manifest_json(const RunManifest& m);

}  // namespace homedet
