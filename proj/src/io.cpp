// Apache License, Version 2.0, refer to LICENSE.txt
#include "homedet/io.hpp"

#include <algorithm>
#include <cstdio>

#include "json.hpp"

#include "homedet/csv.hpp"
#include "homedet/error.hpp"

namespace homedet {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

}  // namespace

std::string home_table_csv_string(const HomeTable& t, const TowerNetwork& net,
                                  const std::string& stamp) {
  std::string out;
  if (!stamp.empty()) out += "# " + stamp + "\n";
  out += "# l1_ties=" + std::to_string(t.l1_ties);
  if (t.rule == Rule::space_radius || t.rule == Rule::time_space)
    out += " radius_m=" + fmt("%.17g", t.radius_m);
  out += "\n";
  out += "rule,period,user_id,l1,score_l1,l2,score_l2,l3,score_l3\n";
  const std::string prefix = std::string(rule_name(t.rule)) + "," + t.period + ",";
  for (const auto& row : t.rows) {
    out += prefix;
    out += row.user_id;
    for (int i = 0; i < 3; ++i) {
      out += ',';
      if (i < row.n_ranked) {
        out += net.tower(row.towers[static_cast<std::size_t>(i)]).id;
        out += ',';
        out += std::to_string(row.scores[static_cast<std::size_t>(i)]);
      } else {
        out += ',';
      }
    }
    out += '\n';
  }
  return out;
}

HomeTable read_home_table_csv(const std::string& path, const TowerNetwork& net) {
  const std::string text = read_file(path);
  constexpr std::string_view kHeader = "rule,period,user_id,l1,score_l1,l2,score_l2,l3,score_l3";
  HomeTable table;
  bool seen_header = false;
  bool first_row = true;
  std::vector<std::string_view> fields;
  for_each_csv_line(text, [&](std::string_view line, std::size_t lineno) {
    if (!seen_header) {
      if (line != kHeader)
        throw_data(path + ": expected header '" + std::string(kHeader) + "'");
      seen_header = true;
      return true;
    }
    if (split_fields(line, fields) != 9)
      throw_data(path + ":" + std::to_string(lineno) + ": expected 9 fields");
    const auto rule = parse_rule(fields[0]);
    if (!rule)
      throw_data(path + ":" + std::to_string(lineno) + ": unknown rule '" +
                 std::string(fields[0]) + "'");
    if (first_row) {
      table.rule = *rule;
      table.period = std::string(fields[1]);
      first_row = false;
    } else if (*rule != table.rule || fields[1] != table.period) {
      throw_data(path + ":" + std::to_string(lineno) +
                 ": table mixes rules or periods (expected " +
                 std::string(rule_name(table.rule)) + "/" + table.period + ")");
    }
    if (!is_safe_id(fields[2]))
      throw_data(path + ":" + std::to_string(lineno) + ": bad user id");
    DetectionResult row;
    row.user_id.assign(fields[2]);
    for (int i = 0; i < 3; ++i) {
      const std::string_view tower = fields[3 + 2 * static_cast<std::size_t>(i)];
      const std::string_view score = fields[4 + 2 * static_cast<std::size_t>(i)];
      if (tower.empty()) {
        if (!score.empty())
          throw_data(path + ":" + std::to_string(lineno) + ": score without tower");
        break;
      }
      const auto idx = net.index_of(tower);
      if (!idx)
        throw_data(path + ":" + std::to_string(lineno) + ": unknown tower '" +
                   std::string(tower) + "'");
      const auto s = parse_u64(score);
      if (!s || *s == 0)
        throw_data(path + ":" + std::to_string(lineno) + ": scores must be positive integers");
      row.towers[static_cast<std::size_t>(i)] = *idx;
      row.scores[static_cast<std::size_t>(i)] = *s;
      row.n_ranked = static_cast<std::uint8_t>(i + 1);
    }
    if (row.n_ranked == 0)
      throw_data(path + ":" + std::to_string(lineno) + ": row without an L1 tower");
    table.rows.push_back(std::move(row));
    return true;
  });
  if (!seen_header) throw_data(path + ": empty input, missing header");
  std::sort(table.rows.begin(), table.rows.end(),
            [](const DetectionResult& a, const DetectionResult& b) {
              return a.user_id < b.user_id;
            });
  for (std::size_t i = 1; i < table.rows.size(); ++i)
    if (table.rows[i].user_id == table.rows[i - 1].user_id)
      throw_data(path + ": duplicate user '" + table.rows[i].user_id + "'");
  return table;
}

std::string smc_csv_string(std::span<const SmcResult> results, const std::string& stamp) {
  std::string out;
  if (!stamp.empty()) out += "# " + stamp + "\n";
  out += "period,rule_a,rule_b,n_joint,n_match,smc_pct\n";
  for (const auto& r : results) {
    out += r.period;
    out += ',';
    out += rule_name(r.rule_a);
    out += ',';
    out += rule_name(r.rule_b);
    out += ',';
    out += std::to_string(r.n_joint);
    out += ',';
    out += std::to_string(r.n_match);
    out += ',';
    out += fmt("%.6f", r.smc_pct);
    out += '\n';
  }
  return out;
}

std::string csm_csv_string(std::span<const CsmReport> reports, const std::string& stamp) {
  std::string out;
  if (!stamp.empty()) out += "# " + stamp + "\n";
  out += "rule,period,cosine,csm_deg\n";
  for (const auto& r : reports) {
    out += rule_name(r.rule);
    out += ',';
    out += r.period;
    out += ',';
    out += fmt("%.12f", r.cosine);
    out += ',';
    out += fmt("%.9f", r.csm_deg);
    out += '\n';
  }
  return out;
}

namespace {

const char* class_name(SpotClass c) {
  switch (c) {
    case SpotClass::hot: return "hot";
    case SpotClass::cold: return "cold";
    case SpotClass::neutral: return "neutral";
  }
  return "?";
}

}  // namespace

std::string hotspot_csv_string(const TowerNetwork& net, const Eigen::VectorXd& values,
                               const HotspotMap& map, const LogRatioMap* lr,
                               const std::string& stamp) {
  if (map.z.size() != net.size() || values.size() != static_cast<Eigen::Index>(net.size()))
    throw_data("hotspot map does not match the network size");
  std::string out;
  if (!stamp.empty()) out += "# " + stamp + "\n";
  out += "# confidence=" + std::to_string(map.confidence) + "\n";
  out += lr ? "tower_id,value,z,class,log_ratio\n" : "tower_id,value,z,class\n";
  for (std::size_t i = 0; i < net.size(); ++i) {
    out += net.tower(i).id;
    out += ',';
    out += fmt("%.17g", values[static_cast<Eigen::Index>(i)]);
    out += ',';
    out += fmt("%.9f", map.z[i]);
    out += ',';
    out += class_name(map.cls[i]);
    if (lr) {
      out += ',';
      if (lr->defined[i]) out += fmt("%.9f", lr->value[i]);
    }
    out += '\n';
  }
  return out;
}

namespace {

ordered_json ring_coordinates(const std::vector<LonLat>& ring) {
  ordered_json coords = ordered_json::array();
  for (const auto& p : ring) coords.push_back(ordered_json::array({p.lon, p.lat}));
  if (!ring.empty()) coords.push_back(ordered_json::array({ring[0].lon, ring[0].lat}));
  return ordered_json::array({std::move(coords)});
}

ordered_json polygon_feature(const VoronoiCell& cell, const std::string& tower_id) {
  ordered_json f;
  f["type"] = "Feature";
  f["geometry"] = {{"type", "Polygon"}, {"coordinates", ring_coordinates(cell.polygon_lonlat)}};
  f["properties"] = {{"tower_id", tower_id}, {"area_m2", cell.area_m2}};
  return f;
}

}  // namespace

std::string voronoi_geojson(const Tessellation& tess, const TowerNetwork& net) {
  ordered_json fc;
  fc["type"] = "FeatureCollection";
  ordered_json features = ordered_json::array();
  for (std::size_t t = 0; t < net.size(); ++t)
    features.push_back(polygon_feature(tess.cell_for(static_cast<std::uint32_t>(t)),
                                       net.tower(t).id));
  fc["features"] = std::move(features);
  return fc.dump(1) + "\n";
}

std::string hotspot_geojson(const Tessellation& tess, const TowerNetwork& net,
                            const Eigen::VectorXd& values, const HotspotMap& map,
                            const LogRatioMap* lr) {
  if (map.z.size() != net.size() || values.size() != static_cast<Eigen::Index>(net.size()))
    throw_data("hotspot map does not match the network size");
  ordered_json fc;
  fc["type"] = "FeatureCollection";
  fc["properties"] = {{"confidence", map.confidence}};
  ordered_json features = ordered_json::array();
  for (std::size_t t = 0; t < net.size(); ++t) {
    ordered_json f =
        polygon_feature(tess.cell_for(static_cast<std::uint32_t>(t)), net.tower(t).id);
    f["properties"]["value"] = values[static_cast<Eigen::Index>(t)];
    f["properties"]["z"] = map.z[t];
    f["properties"]["class"] = class_name(map.cls[t]);
    if (lr) {
      if (lr->defined[t]) f["properties"]["log_ratio"] = lr->value[t];
      else f["properties"]["log_ratio"] = nullptr;
    }
    features.push_back(std::move(f));
  }
  fc["features"] = std::move(features);
  return fc.dump(1) + "\n";
}

std::string ingest_report_string(const IngestReport& report, std::span<const Period> periods) {
  std::string out;
  out += "rows_read=" + std::to_string(report.rows_read) + "\n";
  out += "rows_ok=" + std::to_string(report.rows_ok) + "\n";
  out += "rows_malformed=" + std::to_string(report.rows_malformed) + "\n";
  out += "rows_unknown_tower=" + std::to_string(report.rows_unknown_tower) + "\n";
  out += "rows_out_of_window=" + std::to_string(report.rows_out_of_window) + "\n";
  for (std::size_t p = 0; p < report.observed_days.size(); ++p) {
    out += "period." + (p < periods.size() ? periods[p].label : std::to_string(p)) +
           ".days=" + std::to_string(report.observed_days[p]) + "\n";
  }
  return out;
}

void manifest_add_input(RunManifest& m, const std::string& path) {
  m.inputs.emplace_back(path, sha256_file_hex(path));
}

std::string manifest_json(const RunManifest& m) {
  ordered_json j;
  j["command"] = m.command;
  j["version"] = m.version;
  ordered_json cfg = ordered_json::object();
  for (const auto& [k, v] : m.config) cfg[k] = v;
  j["config"] = std::move(cfg);
  ordered_json inputs = ordered_json::object();
  for (const auto& [path, digest] : m.inputs) inputs[path] = digest;
  j["inputs"] = std::move(inputs);
  j["outputs"] = m.outputs;
  if (m.seed) j["seed"] = *m.seed;
  j["created_utc"] = m.created_utc;
  return j.dump(1) + "\n";
}

}  // namespace homedet
