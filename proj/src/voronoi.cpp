// Apache License, Version 2.0, refer to LICENSE.txt
#include "homedet/voronoi.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <thread>

#include "homedet/error.hpp"

namespace homedet {

namespace {

constexpr std::int32_t kBoundaryTag = -1;

struct TaggedVertex {
  PlanarPoint p;
  std::int32_t tag;  // generator index that produced the edge leaving this vertex, or boundary
};

using TaggedRing = std::vector<TaggedVertex>;

// Clips `ring` against the half-plane of points closer to `g` than to `q`
// (the bisector keep-side). Edges created on the bisector are tagged with
// `q_idx`; surviving edge pieces keep their original tags.
void clip_half_plane(const TaggedRing& ring, const PlanarPoint& g, const PlanarPoint& q,
                     std::int32_t q_idx, TaggedRing& out) {
  out.clear();
  const std::size_t n = ring.size();
  if (n == 0) return;
  const double nx = q.x - g.x;
  const double ny = q.y - g.y;
  const double mx = (q.x + g.x) / 2;
  const double my = (q.y + g.y) / 2;
  // side(p) <= 0 means p is on g's side of the bisector (kept)
  auto side = [&](const PlanarPoint& p) { return (p.x - mx) * nx + (p.y - my) * ny; };

  double sa = side(ring[0].p);
  for (std::size_t i = 0; i < n; ++i) {
    const TaggedVertex& a = ring[i];
    const TaggedVertex& b = ring[(i + 1) % n];
    const double sb = side(b.p);
    const bool a_in = sa <= 0;
    const bool b_in = sb <= 0;
    if (a_in) {
      out.push_back(a);
      if (!b_in) {
        const double t = sa / (sa - sb);
        // the edge leaving this intersection runs along the bisector
        out.push_back(TaggedVertex{{a.p.x + t * (b.p.x - a.p.x), a.p.y + t * (b.p.y - a.p.y)}, q_idx});
      }
    } else if (b_in) {
      const double t = sa / (sa - sb);
      out.push_back(TaggedVertex{{a.p.x + t * (b.p.x - a.p.x), a.p.y + t * (b.p.y - a.p.y)}, a.tag});
    }
    sa = sb;
  }
}

double max_dist2_to(const TaggedRing& ring, const PlanarPoint& g) {
  double m = 0;
  for (const TaggedVertex& v : ring) {
    const double dx = v.p.x - g.x;
    const double dy = v.p.y - g.y;
    m = std::max(m, dx * dx + dy * dy);
  }
  return m;
}

}  // namespace

Tessellation voronoi(const TowerNetwork& net, unsigned workers) {
  // merge towers that share exact coordinates into one generator
  std::map<std::pair<double, double>, std::uint32_t> gen_of_pos;
  std::vector<PlanarPoint> gens;             // generator positions
  std::vector<std::vector<std::uint32_t>> members;  // generator -> tower indices (ascending: towers sorted)
  std::vector<std::uint32_t> gen_of_tower(net.size());
  for (std::uint32_t t = 0; t < net.size(); ++t) {
    const auto key = std::make_pair(net.tower(t).lon, net.tower(t).lat);
    auto [it, inserted] = gen_of_pos.emplace(key, static_cast<std::uint32_t>(gens.size()));
    if (inserted) {
      gens.push_back(net.planar(t));
      members.emplace_back();
    }
    gen_of_tower[t] = it->second;
    members[it->second].push_back(t);
  }

  const std::size_t ng = gens.size();
  if (ng < 3) throw_degenerate("voronoi needs at least 3 distinct tower positions");
  {
    // collinearity: max triangle area against the extent scale
    double scale = 0;
    for (const PlanarPoint& p : gens)
      scale = std::max({scale, std::abs(p.x - gens[0].x), std::abs(p.y - gens[0].y)});
    bool non_collinear = false;
    for (std::size_t i = 2; i < ng && !non_collinear; ++i) {
      const double cross = (gens[1].x - gens[0].x) * (gens[i].y - gens[0].y) -
                           (gens[1].y - gens[0].y) * (gens[i].x - gens[0].x);
      if (std::abs(cross) > 1e-9 * scale * scale) non_collinear = true;
    }
    if (!non_collinear) throw_degenerate("voronoi towers are collinear");
  }

  const Ring& boundary = net.boundary_planar();
  for (std::uint32_t t = 0; t < net.size(); ++t)
    if (!point_in_ring(net.planar(t), boundary))
      throw_data("tower '" + net.tower(t).id + "' lies outside the boundary polygon");

  TaggedRing boundary_tagged;
  boundary_tagged.reserve(boundary.size());
  for (const PlanarPoint& p : boundary) boundary_tagged.push_back(TaggedVertex{p, kBoundaryTag});

  struct RawCell {
    Ring ring;
    std::vector<std::uint32_t> adjacent;  // generator indices
  };
  std::vector<RawCell> raw(ng);

  auto build_cell = [&](std::size_t gi) {
    const PlanarPoint g = gens[gi];
    // candidates ascending by distance; clip until no remaining candidate's
    // bisector can reach the cell (d/2 beyond the farthest cell vertex)
    std::vector<std::pair<double, std::uint32_t>> cand;
    cand.reserve(ng - 1);
    for (std::uint32_t j = 0; j < ng; ++j) {
      if (j == gi) continue;
      const double dx = gens[j].x - g.x;
      const double dy = gens[j].y - g.y;
      cand.emplace_back(dx * dx + dy * dy, j);
    }
    std::sort(cand.begin(), cand.end());

    TaggedRing cell = boundary_tagged;
    TaggedRing scratch;
    double r2 = max_dist2_to(cell, g);
    for (const auto& [d2, j] : cand) {
      if (d2 > 4.0 * r2) break;
      clip_half_plane(cell, g, gens[j], static_cast<std::int32_t>(j), scratch);
      cell.swap(scratch);
      if (cell.size() < 3) break;
      r2 = max_dist2_to(cell, g);
    }
    if (cell.size() < 3)
      throw_degenerate("voronoi produced an empty cell (degenerate geometry)");

    RawCell& rc = raw[gi];
    rc.ring.reserve(cell.size());
    for (const TaggedVertex& v : cell) rc.ring.push_back(v.p);
    // neighbors: generators whose bisector contributes an edge of nonzero length
    const std::size_t n = cell.size();
    for (std::size_t i = 0; i < n; ++i) {
      if (cell[i].tag < 0) continue;
      const PlanarPoint& a = cell[i].p;
      const PlanarPoint& b = cell[(i + 1) % n].p;
      if (std::hypot(b.x - a.x, b.y - a.y) > 1e-9)
        rc.adjacent.push_back(static_cast<std::uint32_t>(cell[i].tag));
    }
    std::sort(rc.adjacent.begin(), rc.adjacent.end());
    rc.adjacent.erase(std::unique(rc.adjacent.begin(), rc.adjacent.end()), rc.adjacent.end());
  };

  workers = std::max(1u, workers);
  if (workers == 1 || ng < 64) {
    for (std::size_t gi = 0; gi < ng; ++gi) build_cell(gi);
  } else {
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mu;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w]() {
        try {
          for (std::size_t gi = w; gi < ng; gi += workers) build_cell(gi);
        } catch (...) {
          std::lock_guard lock(error_mu);
          if (!error) error = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
  }

  // adjacency can come out one-sided on near-degenerate slivers; symmetrize
  for (std::uint32_t gi = 0; gi < ng; ++gi)
    for (std::uint32_t gj : raw[gi].adjacent)
      if (!std::binary_search(raw[gj].adjacent.begin(), raw[gj].adjacent.end(), gi)) {
        raw[gj].adjacent.insert(
            std::lower_bound(raw[gj].adjacent.begin(), raw[gj].adjacent.end(), gi), gi);
      }

  // order cells by representative (lowest) tower id; towers are id-sorted so
  // tower index order is id order
  std::vector<std::uint32_t> order(ng);
  for (std::uint32_t gi = 0; gi < ng; ++gi) order[gi] = gi;
  std::sort(order.begin(), order.end(),
            [&](std::uint32_t a, std::uint32_t b) { return members[a][0] < members[b][0]; });
  std::vector<std::uint32_t> cell_index_of_gen(ng);
  for (std::uint32_t c = 0; c < ng; ++c) cell_index_of_gen[order[c]] = c;

  Tessellation tess;
  tess.cells.resize(ng);
  tess.cell_of_tower.resize(net.size());
  for (std::uint32_t t = 0; t < net.size(); ++t)
    tess.cell_of_tower[t] = cell_index_of_gen[gen_of_tower[t]];
  for (std::uint32_t c = 0; c < ng; ++c) {
    const std::uint32_t gi = order[c];
    VoronoiCell& cell = tess.cells[c];
    for (std::uint32_t t : members[gi]) cell.tower_ids.push_back(net.tower(t).id);
    cell.polygon = std::move(raw[gi].ring);
    cell.polygon_lonlat.reserve(cell.polygon.size());
    for (const PlanarPoint& p : cell.polygon)
      cell.polygon_lonlat.push_back(net.projection().inverse(p));
    cell.area_m2 = ring_area(cell.polygon);
    for (std::uint32_t gj : raw[gi].adjacent) cell.neighbor_cells.push_back(cell_index_of_gen[gj]);
    std::sort(cell.neighbor_cells.begin(), cell.neighbor_cells.end());
  }
  return tess;
}

}  // namespace homedet
