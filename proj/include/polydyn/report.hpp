#pragma once

#include <string>
#include <vector>

#include "cycles.hpp"
#include "hyperbolic.hpp"
#include "io.hpp"
#include "puzzle.hpp"
#include "sector.hpp"

namespace polydyn {

inline Json to_json(const std::vector<Complex>& pts) {
  Json a = Json::array();
  for (Complex z : pts) a.push_back(to_json(z));
  return a;
}

inline Json to_json(const CycleInfo& c) {
  return {{"period", c.period}, {"points", to_json(c.points)}, {"multiplier", to_json(c.multiplier)},
          {"abs_multiplier", std::abs(c.multiplier)}, {"kind", to_string(c.kind)}};
}

inline Json to_json(const CycleReport& r) {
  Json cyc = Json::array();
  for (const auto& c : r.cycles) cyc.push_back(to_json(c));
  return {{"cycles", cyc}, {"roots_in_box", r.roots_in_box}, {"warnings", r.warnings}};
}

inline Json to_json(const BasinReport& r) {
  Json cyc = Json::array();
  for (const auto& c : r.cycles) cyc.push_back(to_json(c));
  Json crit = Json::array();
  for (const auto& c : r.critical) {
    Json e = {{"point", to_json(c.point)}, {"multiplicity", c.multiplicity}, {"fate", to_string(c.fate)},
              {"iterations", c.iterations}, {"level", c.level}};
    if (c.cycle >= 0) e["cycle"] = c.cycle;
    crit.push_back(e);
  }
  return {{"attracting_cycles", cyc}, {"critical", crit}, {"attracted_count", r.attracted_count}, {"warnings", r.warnings}};
}

inline Json to_json(const Combinatorics& c) {
  return {{"t_minus", to_json(c.t_minus)}, {"t_plus", to_json(c.t_plus)}, {"theta_minus", to_json(c.theta_minus)},
          {"theta_plus", to_json(c.theta_plus)}, {"z_minus", to_json(c.z_minus)}, {"z_plus", to_json(c.z_plus)}};
}

inline Json to_json(const Sector& S) {
  return {{"combinatorics", to_json(S.comb)}, {"outer_potential", S.outer_potential}, {"boundary", to_json(S.boundary)}};
}

inline Json to_json(const LimbApproximation& L) {
  Json steps = Json::array();
  for (const auto& s : L.steps)
    steps.push_back({{"combinatorics", to_json(s.comb)}, {"s", s.s}, {"s_prime", s.s_prime}, {"diameter", s.diameter}});
  return {{"root", to_json(L.root)}, {"root_status", to_string(L.root_status)}, {"steps", steps}};
}

inline Json to_json(const SeparabilityReport& r) {
  Json e = Json::array();
  for (const auto& x : r.entries) {
    Json j = {{"n", x.n}, {"omega", to_json(x.omega)}, {"separated", x.separated}, {"searched", x.searched}};
    if (x.witness) j["witness"] = to_json(*x.witness);
    if (!x.note.empty()) j["note"] = x.note;
    e.push_back(j);
  }
  return {{"verdict", r.all_separated() ? "separated" : "not separated"}, {"entries", e}};
}

inline Json to_json(const Puzzle& P, bool boundaries = true) {
  Json levels = Json::array();
  for (const auto& lvl : P.levels) {
    Json pieces = Json::array();
    for (const auto& piece : lvl) {
      Json gaps = Json::array();
      for (const auto& g : piece.gaps) gaps.push_back(Json::array({to_json(g.a), to_json(g.b)}));
      Json j = {{"id", piece.id()}, {"index", piece.index}, {"parent", piece.parent}, {"gaps", gaps},
                {"diameter", piece.diameter()}};
      if (boundaries) j["boundary"] = to_json(piece.boundary);
      pieces.push_back(j);
    }
    levels.push_back(pieces);
  }
  Json counts = Json::array();
  for (const auto& lvl : P.levels) counts.push_back(lvl.size());
  return {{"t_star", to_json(P.t_star)}, {"theta_star", to_json(P.theta_star)}, {"z_star", to_json(P.z_star)},
          {"s", P.s}, {"s_prime", P.s_prime}, {"piece_counts", counts}, {"levels", levels}};
}

inline Json to_json(const std::vector<ImpressionLink>& chain) {
  Json a = Json::array();
  for (const auto& l : chain) a.push_back({{"depth", l.depth}, {"piece", l.piece}, {"diameter", l.diameter}});
  return a;
}

inline Json to_json(const DisjointType& t) {
  return {{"verdict", t.value ? "disjoint type" : "not disjoint type"}, {"value", t.value}, {"rationale", t.rationale}};
}

inline Json to_json(const CenterResult& c) {
  return {{"center", to_json(c.a)}, {"polynomial", to_json(build_marked(c.a))}, {"residual", c.residual},
          {"iterations", c.iterations}};
}

inline Json to_json(const LamComparison& c) {
  Json diff = Json::array(), un = Json::array();
  for (const auto& [a, b] : c.diff) diff.push_back(Json::array({to_json(a), to_json(b)}));
  for (const auto& a : c.unresolved) un.push_back(to_json(a));
  return {{"verdict", to_string(c.verdict)}, {"diff", diff}, {"unresolved", un}};
}

inline Json to_json(const ProbeReport& r) {
  Json j = {{"verdict", to_string(r.verdict)}, {"rationale", r.rationale}, {"laminations", to_json(r.laminations)},
            {"julia_critical_f", r.julia_critical_f}, {"julia_critical_g", r.julia_critical_g}};
  if (r.disjoint_f) j["disjoint_f"] = to_json(*r.disjoint_f);
  if (r.disjoint_g) j["disjoint_g"] = to_json(*r.disjoint_g);
  if (r.center_f) j["center_f"] = to_json(*r.center_f);
  if (r.center_g) j["center_g"] = to_json(*r.center_g);
  if (std::isfinite(r.center_distance)) j["center_distance"] = r.center_distance;
  return j;
}

}  // namespace polydyn
