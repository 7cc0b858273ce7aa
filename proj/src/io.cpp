#include "auction/io.hpp"

#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "auction/matroid.hpp"
#include "auction/rational.hpp"
#include "auction/single_agent.hpp"

namespace auction {
namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw SchemaError(path + ": " + what);
}

std::string at(const std::string& path, const std::string& key) { return path + "." + key; }

std::string at(const std::string& path, const std::string& key, std::size_t i) {
  return path + "." + key + "[" + std::to_string(i) + "]";
}

std::string idx(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

const Json& member(const Json& node, const std::string& path, const std::string& key) {
  if (!node.is_object()) fail(path, "expected an object");
  auto it = node.find(key);
  if (it == node.end()) fail(path, "missing field '" + key + "'");
  return *it;
}

void reject_unknown_keys(const Json& node, const std::string& path,
                         std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : node.items()) {
    (void)value;
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) fail(path, "unknown field '" + key + "'");
  }
}

// Numbers may arrive as JSON numbers or as exact "p/q" / decimal strings.
double number_at(const Json& node, const std::string& path) {
  if (node.is_number()) return node.get<double>();
  if (node.is_string()) {
    try {
      return to_double(parse_rational(node.get<std::string>()));
    } catch (const StructuralError&) {
      fail(path, "string is not a number or \"p/q\" fraction: '" + node.get<std::string>() + "'");
    }
  }
  fail(path, "expected a number or a fraction string");
}

std::string string_at(const Json& node, const std::string& path) {
  if (!node.is_string()) fail(path, "expected a string");
  return node.get<std::string>();
}

// "2:H" -> global ordinal of agent 2's type H.
int resolve_type_ref(const TypeUniverse& u, const std::string& ref, const std::string& path) {
  auto colon = ref.find(':');
  if (colon == std::string::npos) fail(path, "type reference '" + ref + "' is not 'agent:label'");
  int agent = 0;
  try {
    agent = std::stoi(ref.substr(0, colon));
  } catch (const std::exception&) {
    fail(path, "type reference '" + ref + "' has no numeric agent index");
  }
  try {
    return u.ordinal(agent, ref.substr(colon + 1));
  } catch (const StructuralError& e) {
    fail(path, e.what());
  }
}

Json parse_document(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw SchemaError(std::string("document is not valid JSON: ") + e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot read '" + path + "'");
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

SupplyConstraint parse_constraint(const Json& node, const TypeUniverse& u) {
  const std::string path = "constraint";
  std::string kind = string_at(member(node, path, "kind"), at(path, "kind"));
  if (kind == "single-unit") {
    reject_unknown_keys(node, path, {"kind"});
    return single_unit_supply();
  }
  if (kind == "k-unit") {
    reject_unknown_keys(node, path, {"kind", "k"});
    const Json& kj = member(node, path, "k");
    if (!kj.is_number_integer() || kj.get<long long>() < 1)
      fail(at(path, "k"), "expected a positive integer");
    return k_unit_supply(kj.get<int>());
  }
  if (kind == "matroid") {
    reject_unknown_keys(node, path, {"kind", "blocks", "caps", "independent"});
    const int D = u.type_count();
    if (node.contains("blocks")) {
      const Json& bj = member(node, path, "blocks");
      const Json& cj = member(node, path, "caps");
      if (!bj.is_array() || !cj.is_array()) fail(path, "blocks and caps must be arrays");
      std::vector<TypeMask> blocks;
      for (std::size_t b = 0; b < bj.size(); ++b) {
        TypeMask m = 0;
        if (!bj[b].is_array()) fail(at(path, "blocks", b), "expected an array of type references");
        for (std::size_t i = 0; i < bj[b].size(); ++i) {
          std::string p = idx(at(path, "blocks", b), i);
          m |= TypeMask(1) << resolve_type_ref(u, string_at(bj[b][i], p), p);
        }
        blocks.push_back(m);
      }
      std::vector<int> caps;
      for (std::size_t c = 0; c < cj.size(); ++c) {
        if (!cj[c].is_number_integer()) fail(at(path, "caps", c), "expected an integer");
        caps.push_back(cj[c].get<int>());
      }
      try {
        return matroid_supply(partition_matroid(std::move(blocks), std::move(caps), D));
      } catch (const StructuralError& e) {
        fail(path, e.what());
      }
    }
    if (node.contains("independent")) {
      const Json& fj = member(node, path, "independent");
      if (!fj.is_array()) fail(at(path, "independent"), "expected an array of sets");
      std::vector<TypeMask> family;
      for (std::size_t s = 0; s < fj.size(); ++s) {
        if (!fj[s].is_array()) fail(at(path, "independent", s), "expected an array");
        TypeMask m = 0;
        for (std::size_t i = 0; i < fj[s].size(); ++i) {
          std::string p = idx(at(path, "independent", s), i);
          m |= TypeMask(1) << resolve_type_ref(u, string_at(fj[s][i], p), p);
        }
        family.push_back(m);
      }
      try {
        return matroid_supply(explicit_matroid(std::move(family), D));
      } catch (const StructuralError& e) {
        fail(path, e.what());
      }
    }
    fail(path, "matroid constraint needs 'blocks'+'caps' or 'independent'");
  }
  fail(at(path, "kind"), "unknown constraint kind '" + kind + "'");
}

}  // namespace

AuctionInstance parse_instance(const std::string& text) {
  Json doc = parse_document(text);
  if (!doc.is_object()) throw SchemaError("top level: expected an object");
  reject_unknown_keys(doc, "top level",
                      {"schema_version", "preference_model", "agents", "constraint", "no_subsidy"});
  if (doc.contains("schema_version") && doc["schema_version"] != 1)
    fail("schema_version", "only version 1 is understood");

  std::string default_model;
  if (doc.contains("preference_model"))
    default_model = string_at(doc["preference_model"], "preference_model");

  const Json& agents = member(doc, "top level", "agents");
  if (!agents.is_array() || agents.empty()) fail("agents", "expected a non-empty array");

  SingleAgentOptions options;
  if (doc.contains("no_subsidy")) {
    if (!doc["no_subsidy"].is_boolean()) fail("no_subsidy", "expected a boolean");
    options.no_subsidy = doc["no_subsidy"].get<bool>();
  }

  // First pass: labels and probabilities fix the universe and the mass.
  std::vector<std::vector<std::string>> labels(agents.size());
  std::vector<std::vector<double>> probs(agents.size());
  for (std::size_t a = 0; a < agents.size(); ++a) {
    std::string apath = at("top level", "agents", a);
    const Json& types = member(agents[a], apath, "types");
    reject_unknown_keys(agents[a], apath, {"types", "preference_model"});
    if (!types.is_array() || types.empty()) fail(at(apath, "types"), "expected a non-empty array");
    double sum = 0.0;
    for (std::size_t t = 0; t < types.size(); ++t) {
      std::string tpath = at(apath, "types", t);
      labels[a].push_back(string_at(member(types[t], tpath, "label"), at(tpath, "label")));
      double p = number_at(member(types[t], tpath, "probability"), at(tpath, "probability"));
      if (p < 0.0) fail(at(tpath, "probability"), "negative probability");
      probs[a].push_back(p);
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      fail(apath, "probabilities sum to " + std::to_string(sum) + ", not 1");
  }

  AuctionInstance instance;
  try {
    instance.universe = TypeUniverse(labels);
  } catch (const StructuralError& e) {
    fail("agents", e.what());
  }
  instance.mass.resize(instance.universe.type_count());
  for (std::size_t a = 0, g = 0; a < probs.size(); ++a)
    for (double p : probs[a]) instance.mass[g++] = p;

  // Second pass: preference payloads per agent.
  for (std::size_t a = 0; a < agents.size(); ++a) {
    std::string apath = at("top level", "agents", a);
    std::string model = default_model;
    if (agents[a].contains("preference_model"))
      model = string_at(agents[a]["preference_model"], at(apath, "preference_model"));
    if (model.empty()) fail(apath, "no preference_model given here or at top level");

    const Json& types = agents[a]["types"];
    const int T = static_cast<int>(types.size());
    VecXd f(T);
    for (int t = 0; t < T; ++t) f[t] = probs[a][t];

    if (model == "unit-demand") {
      int items = -1;
      MatXd values;
      for (int t = 0; t < T; ++t) {
        std::string tpath = at(apath, "types", t);
        reject_unknown_keys(types[t], tpath, {"label", "probability", "values"});
        const Json& vj = member(types[t], tpath, "values");
        if (!vj.is_array() || vj.empty()) fail(at(tpath, "values"), "expected a non-empty array");
        if (items < 0) {
          items = static_cast<int>(vj.size());
          values.resize(T, items);
        } else if (static_cast<int>(vj.size()) != items) {
          fail(at(tpath, "values"), "item count differs from this agent's other types");
        }
        for (int j = 0; j < items; ++j) {
          double v = number_at(vj[j], idx(at(tpath, "values"), j));
          if (v < 0.0) fail(idx(at(tpath, "values"), j), "negative value");
          values(t, j) = v;
        }
      }
      instance.solvers.push_back(
          std::make_shared<UnitDemandSolver>(UnitDemandPreference{values}, f, options));
    } else if (model == "private-budget") {
      PrivateBudgetPreference pref;
      pref.value.resize(T);
      pref.budget.resize(T);
      for (int t = 0; t < T; ++t) {
        std::string tpath = at(apath, "types", t);
        reject_unknown_keys(types[t], tpath, {"label", "probability", "value", "budget"});
        pref.value[t] = number_at(member(types[t], tpath, "value"), at(tpath, "value"));
        pref.budget[t] = number_at(member(types[t], tpath, "budget"), at(tpath, "budget"));
        if (pref.value[t] < 0.0) fail(at(tpath, "value"), "negative value");
        if (pref.budget[t] < 0.0) fail(at(tpath, "budget"), "negative budget");
      }
      instance.solvers.push_back(std::make_shared<PrivateBudgetSolver>(pref, f));
    } else {
      fail(at(apath, "preference_model"), "unknown preference model '" + model + "'");
    }
  }

  instance.supply = parse_constraint(member(doc, "top level", "constraint"), instance.universe);
  validate_instance(instance);
  return instance;
}

AuctionInstance load_instance(const std::string& path) { return parse_instance(read_file(path)); }

std::string serialize_instance(const AuctionInstance& instance) {
  const TypeUniverse& u = instance.universe;
  Json doc;
  doc["schema_version"] = 1;

  bool any_no_subsidy = false;
  std::vector<std::string> models;
  Json agents = Json::array();
  for (int a = 1; a <= u.agent_count(); ++a) {
    const auto& solver = instance.solvers[a - 1];
    Json types = Json::array();
    if (auto* ud = dynamic_cast<const UnitDemandSolver*>(solver.get())) {
      models.push_back("unit-demand");
      any_no_subsidy = any_no_subsidy || ud->options().no_subsidy;
      for (int t = 0; t < ud->type_count(); ++t) {
        Json row;
        row["label"] = u.label(u.first_ordinal(a) + t);
        row["probability"] = instance.mass[u.first_ordinal(a) + t];
        Json values = Json::array();
        for (int j = 0; j < ud->preference().item_count(); ++j)
          values.push_back(ud->preference().values(t, j));
        row["values"] = values;
        types.push_back(row);
      }
    } else if (auto* pb = dynamic_cast<const PrivateBudgetSolver*>(solver.get())) {
      models.push_back("private-budget");
      for (int t = 0; t < pb->type_count(); ++t) {
        Json row;
        row["label"] = u.label(u.first_ordinal(a) + t);
        row["probability"] = instance.mass[u.first_ordinal(a) + t];
        row["value"] = pb->preference().value[t];
        row["budget"] = pb->preference().budget[t];
        types.push_back(row);
      }
    } else {
      throw StructuralError("cannot serialize an unknown solver kind");
    }
    Json agent;
    agent["types"] = types;
    agents.push_back(agent);
  }
  doc["preference_model"] = models.front();
  for (std::size_t a = 0; a < models.size(); ++a)
    if (models[a] != models.front()) agents[a]["preference_model"] = models[a];
  doc["agents"] = agents;
  if (any_no_subsidy) doc["no_subsidy"] = true;

  Json constraint;
  switch (instance.supply.kind) {
    case SupplyKind::kSingleUnit:
      constraint["kind"] = "single-unit";
      break;
    case SupplyKind::kKUnit:
      constraint["kind"] = "k-unit";
      constraint["k"] = instance.supply.k;
      break;
    case SupplyKind::kMatroid: {
      const int D = u.type_count();
      if (D > 16) throw InstanceTooLargeError("explicit matroid serialization limited to 16 types");
      constraint["kind"] = "matroid";
      const MatroidOracle& m = *instance.supply.matroid;
      Json family = Json::array();
      for (TypeMask S = 0; S < (TypeMask(1) << D); ++S) {
        if (!is_independent(m, S)) continue;
        Json set = Json::array();
        for (int t = 0; t < D; ++t)
          if (S >> t & 1) set.push_back(u.qualified_label(t));
        family.push_back(set);
      }
      constraint["independent"] = family;
      break;
    }
  }
  doc["constraint"] = constraint;
  return doc.dump(2) + "\n";
}

VecXd parse_rule(const std::string& text, const TypeUniverse& u) {
  Json doc = parse_document(text);
  if (!doc.is_object()) throw SchemaError("top level: expected an object");
  reject_unknown_keys(doc, "top level", {"schema_version", "xbar"});
  if (doc.contains("schema_version") && doc["schema_version"] != 1)
    fail("schema_version", "only version 1 is understood");
  const Json& table = member(doc, "top level", "xbar");
  if (!table.is_object()) fail("xbar", "expected an object keyed by qualified type labels");
  VecXd xbar = VecXd::Zero(u.type_count());
  for (const auto& [key, value] : table.items()) {
    std::string path = "xbar['" + key + "']";
    int t = resolve_type_ref(u, key, path);
    xbar[t] = number_at(value, path);
    if (xbar[t] < 0.0) fail(path, "negative interim mass");
  }
  return xbar;
}

VecXd load_rule(const std::string& path, const TypeUniverse& u) {
  return parse_rule(read_file(path), u);
}

std::string serialize_rule(const TypeUniverse& u, const VecXd& xbar) {
  if (xbar.size() != u.type_count()) throw StructuralError("rule length does not match universe");
  Json table;
  for (int t = 0; t < u.type_count(); ++t) table[u.qualified_label(t)] = xbar[t];
  Json doc;
  doc["schema_version"] = 1;
  doc["xbar"] = table;
  return doc.dump(2) + "\n";
}

namespace {

std::string csv_cell(const Json& value) {
  std::string s = value.is_string() ? value.get<std::string>() : value.dump();
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + "\"";
}

}  // namespace

std::string render_report(const Json& report, OutputFormat format) {
  if (format == OutputFormat::kJson) return report.dump(2) + "\n";

  std::ostringstream out;
  for (const auto& [key, value] : report.items())
    if (value.is_primitive()) out << key << "," << csv_cell(value) << "\n";
  for (const auto& [key, value] : report.items()) {
    if (!value.is_array() || value.empty() || !value.front().is_object()) continue;
    out << "\n" << key << "\n";
    std::vector<std::string> columns;
    for (const auto& [col, cell] : value.front().items()) {
      (void)cell;
      columns.push_back(col);
    }
    for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
    out << "\n";
    for (const auto& row : value) {
      for (std::size_t c = 0; c < columns.size(); ++c)
        out << (c ? "," : "") << csv_cell(row.value(columns[c], Json()));
      out << "\n";
    }
  }
  return out.str();
}

Json xbar_rows(const TypeUniverse& u, const VecXd& xbar) {
  Json rows = Json::array();
  for (int t = 0; t < u.type_count(); ++t) {
    Json row;
    row["type"] = u.qualified_label(t);
    row["xbar"] = xbar[t];
    rows.push_back(row);
  }
  return rows;
}

Json table_json(const TypeUniverse& u, const TransitionTable& table) {
  const int D = u.type_count();
  Json doc;
  doc["kind"] = "transition-table";
  Json targets = Json::array();
  for (int t = 0; t < D; ++t) targets.push_back(u.qualified_label(t));
  Json sources = Json::array();
  for (int s = 0; s < D; ++s) sources.push_back(u.qualified_label(s));
  sources.push_back("start");
  Json rows = Json::array();
  for (int s = 0; s <= D; ++s) {
    Json row = Json::array();
    for (int t = 0; t < D; ++t) row.push_back(table.prob(s, t));
    rows.push_back(row);
  }
  doc["targets"] = targets;
  doc["sources"] = sources;
  doc["probabilities"] = rows;
  return doc;
}

Json mechanism_json(const TypeUniverse& u, const OptimalAuction& best) {
  if (best.table.has_value()) return table_json(u, *best.table);
  if (best.rra.has_value()) {
    Json doc;
    doc["kind"] = "priority-rounding";
    doc["supply"] = best.rra->constraint().kind;
    doc["target"] = xbar_rows(u, best.rra->target());
    return doc;
  }
  Json doc;
  doc["kind"] = "none";
  return doc;
}

}  // namespace auction
