#include "twoweight/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace tw {

Json interval_to_json(const DyadicInterval& interval) {
  return Json{{"n", interval.level()}, {"j", interval.index()}};
}

DyadicInterval interval_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("n") || !j.contains("j"))
    throw std::invalid_argument("interval: expected {\"n\":int,\"j\":int}");
  return DyadicInterval(j.at("n").get<int>(), j.at("j").get<std::uint64_t>());
}

Json lattice_interval_to_json(const LatticeInterval& interval) {
  return Json{{"depth", interval.depth},
              {"lo", interval.lo},
              {"hi", interval.hi},
              {"left", interval.left()},
              {"right", interval.right()}};
}

Json measure_to_json(const AtomicMeasure& nu) {
  Json atoms = Json::array();
  for (const Atom& a : nu.atoms()) atoms.push_back({{"k", a.cell}, {"mass", a.mass}});
  return Json{{"K", nu.depth()}, {"atoms", std::move(atoms)}};
}

AtomicMeasure measure_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("K") || !j.contains("atoms"))
    throw std::invalid_argument("measure: expected {\"K\":int,\"atoms\":[...]} ");
  const int depth = j.at("K").get<int>();
  std::vector<Atom> atoms;
  for (const Json& a : j.at("atoms")) {
    if (!a.contains("k") || !a.contains("mass"))
      throw std::invalid_argument("measure: atom needs \"k\" and \"mass\"");
    atoms.push_back({a.at("k").get<std::int64_t>(), a.at("mass").get<double>()});
  }
  std::sort(atoms.begin(), atoms.end(), [](const Atom& x, const Atom& y) { return x.cell < y.cell; });
  return AtomicMeasure(depth, std::move(atoms));
}

Json pair_to_json(const MeasurePair& pair) {
  return Json{{"spec_version", kSpecVersion},
              {"sigma", measure_to_json(pair.sigma())},
              {"w", measure_to_json(pair.w())}};
}

MeasurePair pair_from_json(const Json& j, GridConfig grid) {
  if (!j.is_object() || !j.contains("sigma") || !j.contains("w"))
    throw std::invalid_argument("pair: expected {\"sigma\":...,\"w\":...}");
  AtomicMeasure sigma = measure_from_json(j.at("sigma"));
  AtomicMeasure w = measure_from_json(j.at("w"));
  grid.max_depth = sigma.depth();
  return MeasurePair(std::move(sigma), std::move(w), grid);
}

MeasurePair load_pair(const std::string& path, GridConfig grid) {
  return pair_from_json(load_json(path), grid);
}

void save_pair(const MeasurePair& pair, const std::string& path) {
  atomic_write(path, pair_to_json(pair).dump(2) + "\n");
}

namespace {

Json witness_to_json(const IntervalWitness& witness) {
  return Json{{"value", witness.value}, {"interval", lattice_interval_to_json(witness.interval)}};
}

}  // namespace

Json constants_to_json(const ConstantsReport& report) {
  Json norm{{"value", report.norm},
            {"power_value", report.norm_detail.power_value},
            {"power_iterations", report.norm_detail.power_iterations},
            {"power_converged", report.norm_detail.power_converged},
            {"power_restarted", report.norm_detail.power_restarted},
            {"sigma_singular_vector", report.norm_detail.right_singular},
            {"w_singular_vector", report.norm_detail.left_singular}};
  return Json{{"spec_version", kSpecVersion},
              {"a2", report.a2},
              {"testing_sw", report.testing_sw},
              {"testing_ws", report.testing_ws},
              {"norm", report.norm},
              {"h_const", report.h_const},
              {"ratio", report.ratio},
              {"a2_witness", witness_to_json(report.a2_witness)},
              {"testing_sw_witness", witness_to_json(report.testing_sw_witness)},
              {"testing_ws_witness", witness_to_json(report.testing_ws_witness)},
              {"norm_detail", std::move(norm)}};
}

Json energy_to_json(const EnergyStopping& energy, const AtomicMeasure& sigma) {
  Json family = Json::array();
  for (const auto& info : energy.info) {
    family.push_back({{"interval", interval_to_json(info.interval)},
                      {"lhs", info.lhs},
                      {"lhs_complement_reading", info.lhs_alt},
                      {"sigma_mass", info.sigma_mass},
                      {"w_mass", info.w_mass}});
  }
  return Json{{"spec_version", kSpecVersion},
              {"c0", energy.c0},
              {"h_const", energy.h_const},
              {"family", std::move(family)},
              {"sigma_union", energy.sigma_union(sigma)},
              {"sigma_root", sigma.mass(energy.root)}};
}

Json node_to_json(const DecompositionNode& node) {
  Json classes = Json::array();
  if (node.report) {
    for (const ClassReport& rep : node.report->classes) {
      Json c{{"name", rep.name}, {"count", rep.count}, {"size", rep.size}, {"norm", rep.norm}};
      if (rep.l) c["L"] = interval_to_json(*rep.l);
      if (rep.t > 0) c["t"] = rep.t;
      classes.push_back(std::move(c));
    }
  }
  Json out{{"label", node.label},
           {"tau", node.tau},
           {"pairs", node.pair_count},
           {"norm", node.norm},
           {"leaf", node.leaf},
           {"classes", std::move(classes)}};
  if (node.report) {
    out["l_count"] = node.report->l_count;
    out["l_generations"] = node.report->l_generations;
    out["ddecay_max"] = node.report->ddecay_max;
    out["node_constant"] = node.report->node_constant;
    out["small_size_max"] = node.report->small_size_max;
    out["y_decay_constant"] = node.report->y_decay_constant;
    out["subadd_excess"] = node.report->subadd_excess;
  }
  Json kids = Json::array();
  for (const DecompositionNode& child : node.children) kids.push_back(node_to_json(child));
  out["children"] = std::move(kids);
  return out;
}

Json decomposition_to_json(const DecompositionRun& run) {
  return Json{{"spec_version", kSpecVersion},
              {"threshold", run.threshold},
              {"depth_applied", run.depth_applied},
              {"depth_bound", run.depth_bound},
              {"c_star", run.c_star},
              {"max_node_constant", run.max_node_constant},
              {"zeta_bound", run.zeta_bound},
              {"zeta_ok", run.zeta_ok},
              {"tree", node_to_json(run.root)}};
}

std::string l_collection_dot(const LCollection& l) {
  std::ostringstream out;
  out << "digraph L {\n  rankdir=BT;\n";
  auto id = [](const DyadicInterval& interval) {
    return "I" + std::to_string(interval.level()) + "_" + std::to_string(interval.index());
  };
  for (const DyadicInterval& member : l.members) {
    out << "  " << id(member) << " [label=\"" << member.to_string() << "\\ngen "
        << l.generation.at(member) << "\\ntent " << format_double(l.tent(member)) << "\"];\n";
  }
  for (const auto& [child, parent] : l.up)
    out << "  " << id(child) << " -> " << id(parent) << ";\n";
  out << "}\n";
  return out.str();
}

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string field_csv(const AtomicMeasure& nu, const std::vector<double>& values) {
  if (values.size() != nu.size())
    throw std::invalid_argument("field_csv: value count does not match atom count");
  std::ostringstream out;
  out << "atom_position,value\n";
  for (std::size_t i = 0; i < nu.size(); ++i)
    out << format_double(nu.position(i)) << "," << format_double(values[i]) << "\n";
  return out.str();
}

void atomic_write(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp);
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open: " + path);
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw std::invalid_argument("malformed JSON in " + path + ": " + e.what());
  }
  return j;
}

}  // namespace tw
