#include "dhn/io.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace dhn {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw ValidationError(msg); }

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& context) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        known = true;
        break;
      }
    if (!known) fail("unknown key '" + it.key() + "' in " + context);
  }
}

const json& require_object(const json& obj, const char* key,
                           const std::string& context) {
  if (!obj.contains(key))
    fail("missing section '" + std::string(key) + "' in " + context);
  if (!obj.at(key).is_object())
    fail("section '" + std::string(key) + "' in " + context +
         " must be an object");
  return obj.at(key);
}

double require_number(const json& obj, const char* key,
                      const std::string& context) {
  if (!obj.contains(key))
    fail("missing key '" + std::string(key) + "' in " + context);
  if (!obj.at(key).is_number())
    fail("key '" + std::string(key) + "' in " + context + " must be a number");
  return obj.at(key).get<double>();
}

double number_or(const json& obj, const char* key, double dflt,
                 const std::string& context) {
  if (!obj.contains(key)) return dflt;
  if (!obj.at(key).is_number())
    fail("key '" + std::string(key) + "' in " + context + " must be a number");
  return obj.at(key).get<double>();
}

int integer_or(const json& obj, const char* key, int dflt,
               const std::string& context) {
  if (!obj.contains(key)) return dflt;
  if (!obj.at(key).is_number_integer())
    fail("key '" + std::string(key) + "' in " + context +
         " must be an integer");
  return obj.at(key).get<int>();
}

bool bool_or(const json& obj, const char* key, bool dflt,
             const std::string& context) {
  if (!obj.contains(key)) return dflt;
  if (!obj.at(key).is_boolean())
    fail("key '" + std::string(key) + "' in " + context + " must be a boolean");
  return obj.at(key).get<bool>();
}

std::string require_string(const json& obj, const char* key,
                           const std::string& context) {
  if (!obj.contains(key))
    fail("missing key '" + std::string(key) + "' in " + context);
  if (!obj.at(key).is_string())
    fail("key '" + std::string(key) + "' in " + context + " must be a string");
  return obj.at(key).get<std::string>();
}

std::vector<double> require_number_array(const json& obj, const char* key,
                                         const std::string& context) {
  if (!obj.contains(key))
    fail("missing key '" + std::string(key) + "' in " + context);
  const json& arr = obj.at(key);
  if (!arr.is_array())
    fail("key '" + std::string(key) + "' in " + context + " must be an array");
  std::vector<double> out;
  for (const json& v : arr) {
    if (!v.is_number())
      fail("key '" + std::string(key) + "' in " + context +
           " must contain numbers only");
    out.push_back(v.get<double>());
  }
  return out;
}

PhysicalParams parse_physical(const json& obj) {
  const std::string ctx = "physical";
  check_keys(obj,
             {"rho", "mu", "cp", "t_ambient_c", "lambda_ground",
              "lambda_insulation", "burial_depth", "casing_ratio"},
             ctx);
  PhysicalParams p;
  p.rho = number_or(obj, "rho", p.rho, ctx);
  p.mu = number_or(obj, "mu", p.mu, ctx);
  p.cp = number_or(obj, "cp", p.cp, ctx);
  p.t_ambient_c = number_or(obj, "t_ambient_c", p.t_ambient_c, ctx);
  p.lambda_ground = number_or(obj, "lambda_ground", p.lambda_ground, ctx);
  p.lambda_insulation =
      number_or(obj, "lambda_insulation", p.lambda_insulation, ctx);
  p.burial_depth = number_or(obj, "burial_depth", p.burial_depth, ctx);
  p.casing_ratio = number_or(obj, "casing_ratio", p.casing_ratio, ctx);
  return p;
}

EconomicParams parse_economics(const json& obj) {
  const std::string ctx = "economics";
  check_keys(obj,
             {"horizon_years", "discount_rate", "c_revenue", "pump_efficiency",
              "include_pump_capex"},
             ctx);
  EconomicParams e;
  e.horizon_years = number_or(obj, "horizon_years", e.horizon_years, ctx);
  e.discount_rate = number_or(obj, "discount_rate", e.discount_rate, ctx);
  e.c_revenue = number_or(obj, "c_revenue", e.c_revenue, ctx);
  e.pump_efficiency = number_or(obj, "pump_efficiency", e.pump_efficiency, ctx);
  e.include_pump_capex =
      bool_or(obj, "include_pump_capex", e.include_pump_capex, ctx);
  return e;
}

SolverOptions parse_solver(const json& obj) {
  const std::string ctx = "solver";
  check_keys(obj,
             {"q_eps", "approach_floor", "q_scale", "p_scale", "theta_scale",
              "newton_tol", "newton_max_iter", "newton_max_backtracks",
              "reference_pressure", "clip_beta", "xi_schedule",
              "demand_margin", "mu0", "mu_growth", "omega0", "omega_final",
              "eta0", "eta_final", "max_outer", "max_inner", "lbfgs_memory",
              "gamma_init", "nominal_dt", "nominal_dp"},
             ctx);
  SolverOptions s;
  s.q_eps = number_or(obj, "q_eps", s.q_eps, ctx);
  s.approach_floor = number_or(obj, "approach_floor", s.approach_floor, ctx);
  s.q_scale = number_or(obj, "q_scale", s.q_scale, ctx);
  s.p_scale = number_or(obj, "p_scale", s.p_scale, ctx);
  s.theta_scale = number_or(obj, "theta_scale", s.theta_scale, ctx);
  s.newton_tol = number_or(obj, "newton_tol", s.newton_tol, ctx);
  s.newton_max_iter = integer_or(obj, "newton_max_iter", s.newton_max_iter, ctx);
  s.newton_max_backtracks =
      integer_or(obj, "newton_max_backtracks", s.newton_max_backtracks, ctx);
  s.reference_pressure =
      number_or(obj, "reference_pressure", s.reference_pressure, ctx);
  s.clip_beta = number_or(obj, "clip_beta", s.clip_beta, ctx);
  if (obj.contains("xi_schedule")) {
    s.xi_schedule = require_number_array(obj, "xi_schedule", ctx);
    if (s.xi_schedule.empty())
      fail("key 'xi_schedule' in solver must not be empty");
    for (double xi : s.xi_schedule)
      if (xi < 0.0) fail("key 'xi_schedule' in solver must be nonnegative");
  }
  s.demand_margin = number_or(obj, "demand_margin", s.demand_margin, ctx);
  s.mu0 = number_or(obj, "mu0", s.mu0, ctx);
  s.mu_growth = number_or(obj, "mu_growth", s.mu_growth, ctx);
  s.omega0 = number_or(obj, "omega0", s.omega0, ctx);
  s.omega_final = number_or(obj, "omega_final", s.omega_final, ctx);
  s.eta0 = number_or(obj, "eta0", s.eta0, ctx);
  s.eta_final = number_or(obj, "eta_final", s.eta_final, ctx);
  s.max_outer = integer_or(obj, "max_outer", s.max_outer, ctx);
  s.max_inner = integer_or(obj, "max_inner", s.max_inner, ctx);
  s.lbfgs_memory = integer_or(obj, "lbfgs_memory", s.lbfgs_memory, ctx);
  s.gamma_init = number_or(obj, "gamma_init", s.gamma_init, ctx);
  s.nominal_dt = number_or(obj, "nominal_dt", s.nominal_dt, ctx);
  s.nominal_dp = number_or(obj, "nominal_dp", s.nominal_dp, ctx);
  return s;
}

PipeCatalog parse_catalog(const json& obj) {
  const std::string ctx = "catalog";
  check_keys(obj,
             {"diameters", "costs", "void_diameter", "fade_d_min",
              "fade_steepness"},
             ctx);
  PipeCatalog c;
  c.diameters = require_number_array(obj, "diameters", ctx);
  c.costs = require_number_array(obj, "costs", ctx);
  c.void_diameter = number_or(obj, "void_diameter", c.void_diameter, ctx);
  c.fade_d_min = number_or(obj, "fade_d_min", c.fade_d_min, ctx);
  c.fade_steepness = number_or(obj, "fade_steepness", c.fade_steepness, ctx);
  catalog_fit(c);
  return c;
}

struct ConsumerDraft {
  ConsumerData data;
  double zeta = 0.0, q_max = 0.0;
  bool has_zeta = false, has_qmax = false;
};

ConsumerDraft parse_consumer(const json& obj, const std::string& ctx) {
  check_keys(obj,
             {"demand", "radiator_coeff", "radiator_exp", "theta_house",
              "zeta", "q_max"},
             ctx);
  ConsumerDraft d;
  d.data.demand = require_number(obj, "demand", ctx);
  d.data.radiator_coeff = require_number(obj, "radiator_coeff", ctx);
  d.data.radiator_exp = require_number(obj, "radiator_exp", ctx);
  d.data.theta_house =
      number_or(obj, "theta_house", d.data.theta_house, ctx);
  if (obj.contains("zeta")) {
    d.zeta = require_number(obj, "zeta", ctx);
    d.has_zeta = true;
  }
  if (obj.contains("q_max")) {
    d.q_max = require_number(obj, "q_max", ctx);
    d.has_qmax = true;
  }
  return d;
}

ProducerData parse_producer(const json& obj, const std::string& ctx) {
  check_keys(obj,
             {"supply_temperature_c", "c_heat_capex", "c_heat_opex",
              "c_pump_capex", "c_pump_opex"},
             ctx);
  ProducerData p;
  p.supply_temperature_c = require_number(obj, "supply_temperature_c", ctx);
  p.c_heat_capex = number_or(obj, "c_heat_capex", p.c_heat_capex, ctx);
  p.c_heat_opex = number_or(obj, "c_heat_opex", p.c_heat_opex, ctx);
  p.c_pump_capex = number_or(obj, "c_pump_capex", p.c_pump_capex, ctx);
  p.c_pump_opex = number_or(obj, "c_pump_opex", p.c_pump_opex, ctx);
  return p;
}

struct EdgeDraft {
  Edge e;
  bool has_zeta = false, has_qmax = false;
};

// Explicit form: roles spelled out, both network sides present.
void parse_explicit(const json& nodes, const json& edges, NetworkGraph& g,
                    std::vector<EdgeDraft>& drafts) {
  for (const json& jn : nodes) {
    if (!jn.is_object()) fail("entries of 'nodes' must be objects");
    std::string id = require_string(jn, "id", "a node");
    const std::string ctx = "node '" + id + "'";
    check_keys(jn, {"id", "role", "x", "y"}, ctx);
    Node n;
    n.id = id;
    n.role = node_role_from_string(require_string(jn, "role", ctx));
    n.x = number_or(jn, "x", 0.0, ctx);
    n.y = number_or(jn, "y", 0.0, ctx);
    g.nodes.push_back(n);
  }
  for (const json& je : edges) {
    if (!je.is_object()) fail("entries of 'edges' must be objects");
    std::string id = require_string(je, "id", "an edge");
    const std::string ctx = "edge '" + id + "'";
    check_keys(je,
               {"id", "role", "tail", "head", "length", "zeta", "q_max",
                "consumer", "producer"},
               ctx);
    EdgeDraft d;
    d.e.id = id;
    d.e.role = edge_role_from_string(require_string(je, "role", ctx));
    d.e.tail_id = require_string(je, "tail", ctx);
    d.e.head_id = require_string(je, "head", ctx);

    if (je.contains("length") && !is_pipe(d.e.role))
      fail("key 'length' in " + ctx + " is only valid on pipes");
    if ((je.contains("zeta") || je.contains("q_max")) &&
        !is_consumer_edge(d.e.role))
      fail("keys 'zeta'/'q_max' in " + ctx +
           " are only valid on consumer edges");
    if (je.contains("consumer") && d.e.role != EdgeRole::HeatingSystem)
      fail("key 'consumer' in " + ctx +
           " is only valid on heating-system edges");
    if (je.contains("producer") && d.e.role != EdgeRole::ProducerFeed)
      fail("key 'producer' in " + ctx +
           " is only valid on producer-feed edges");

    if (is_pipe(d.e.role)) d.e.length = require_number(je, "length", ctx);
    if (je.contains("zeta")) {
      d.e.zeta = require_number(je, "zeta", ctx);
      d.has_zeta = true;
    }
    if (je.contains("q_max")) {
      d.e.q_max = require_number(je, "q_max", ctx);
      d.has_qmax = true;
    }
    if (d.e.role == EdgeRole::HeatingSystem) {
      if (!je.contains("consumer"))
        fail(ctx + " is missing its consumer data");
      ConsumerDraft c =
          parse_consumer(je.at("consumer"), "consumer of " + ctx);
      d.e.consumer = c.data;
      if (c.has_zeta) {
        if (d.has_zeta)
          fail(ctx + " specifies zeta both on the edge and in its consumer data");
        d.e.zeta = c.zeta;
        d.has_zeta = true;
      }
      if (c.has_qmax) {
        if (d.has_qmax)
          fail(ctx +
               " specifies q_max both on the edge and in its consumer data");
        d.e.q_max = c.q_max;
        d.has_qmax = true;
      }
    }
    if (d.e.role == EdgeRole::ProducerFeed) {
      if (!je.contains("producer"))
        fail(ctx + " is missing its producer data");
      d.e.producer = parse_producer(je.at("producer"), "producer of " + ctx);
    }
    drafts.push_back(d);
  }
}

// Mirrored form: only the feed side is given.  Every node gets a return
// twin '<id>_r'; streets become a feed pipe plus a reversed return pipe;
// consumer and producer attachments expand into their edge pairs.
void parse_mirrored(const json& nodes, const json& edges, NetworkGraph& g,
                    std::vector<EdgeDraft>& drafts) {
  for (const json& jn : nodes) {
    if (!jn.is_object()) fail("entries of 'nodes' must be objects");
    std::string id = require_string(jn, "id", "a node");
    const std::string ctx = "node '" + id + "'";
    check_keys(jn, {"id", "x", "y", "consumer", "producer"}, ctx);
    if (jn.contains("consumer") && jn.contains("producer"))
      fail(ctx + " cannot be both a consumer and a producer");

    Node feed, ret;
    feed.id = id;
    ret.id = id + "_r";
    feed.x = ret.x = number_or(jn, "x", 0.0, ctx);
    feed.y = ret.y = number_or(jn, "y", 0.0, ctx);

    if (jn.contains("consumer")) {
      feed.role = NodeRole::ConsumerFeed;
      ret.role = NodeRole::ConsumerReturn;
      ConsumerDraft c =
          parse_consumer(jn.at("consumer"), "consumer of " + ctx);
      EdgeDraft hs;
      hs.e.id = id + "_hs";
      hs.e.role = EdgeRole::HeatingSystem;
      hs.e.tail_id = feed.id;
      hs.e.head_id = ret.id;
      hs.e.consumer = c.data;
      hs.e.zeta = c.zeta;
      hs.e.q_max = c.q_max;
      hs.has_zeta = c.has_zeta;
      hs.has_qmax = c.has_qmax;
      EdgeDraft bp;
      bp.e.id = id + "_bp";
      bp.e.role = EdgeRole::Bypass;
      bp.e.tail_id = feed.id;
      bp.e.head_id = ret.id;
      drafts.push_back(hs);
      drafts.push_back(bp);
    } else if (jn.contains("producer")) {
      feed.role = NodeRole::ProducerFeed;
      ret.role = NodeRole::ProducerReturn;
      ProducerData p =
          parse_producer(jn.at("producer"), "producer of " + ctx);
      EdgeDraft sup;
      sup.e.id = id + "_sup";
      sup.e.role = EdgeRole::ProducerFeed;
      sup.e.tail_id = ret.id;
      sup.e.head_id = feed.id;
      sup.e.producer = p;
      EdgeDraft rl;
      rl.e.id = id + "_ret";
      rl.e.role = EdgeRole::ProducerReturn;
      rl.e.tail_id = ret.id;
      rl.e.head_id = feed.id;
      drafts.push_back(sup);
      drafts.push_back(rl);
    } else {
      feed.role = NodeRole::JunctionFeed;
      ret.role = NodeRole::JunctionReturn;
    }
    g.nodes.push_back(feed);
    g.nodes.push_back(ret);
  }
  for (const json& je : edges) {
    if (!je.is_object()) fail("entries of 'edges' must be objects");
    std::string id = require_string(je, "id", "an edge");
    const std::string ctx = "edge '" + id + "'";
    check_keys(je, {"id", "tail", "head", "length"}, ctx);
    EdgeDraft feed;
    feed.e.id = id;
    feed.e.role = EdgeRole::PipeFeed;
    feed.e.tail_id = require_string(je, "tail", ctx);
    feed.e.head_id = require_string(je, "head", ctx);
    feed.e.length = require_number(je, "length", ctx);
    EdgeDraft ret;
    ret.e.id = id + "_r";
    ret.e.role = EdgeRole::PipeReturn;
    ret.e.tail_id = feed.e.head_id + "_r";
    ret.e.head_id = feed.e.tail_id + "_r";
    ret.e.length = feed.e.length;
    drafts.push_back(feed);
    drafts.push_back(ret);
  }
}

// Derive missing valve sizings: heating systems from their demand, bypasses
// from the heating system they shadow.
void complete_sizing(std::vector<EdgeDraft>& drafts, const PhysicalParams& phys,
                     const SolverOptions& solver) {
  for (EdgeDraft& d : drafts) {
    if (d.e.role != EdgeRole::HeatingSystem) continue;
    if (d.has_zeta && d.has_qmax) continue;
    ValveSizing vs = size_consumer_valve(d.e.consumer.demand, phys,
                                         solver.nominal_dt, solver.nominal_dp);
    if (!d.has_zeta) d.e.zeta = vs.zeta;
    if (!d.has_qmax) d.e.q_max = vs.q_max;
    d.has_zeta = d.has_qmax = true;
  }
  for (EdgeDraft& d : drafts) {
    if (d.e.role != EdgeRole::Bypass) continue;
    if (d.has_zeta && d.has_qmax) continue;
    for (const EdgeDraft& hs : drafts) {
      if (hs.e.role == EdgeRole::HeatingSystem &&
          hs.e.tail_id == d.e.tail_id && hs.e.head_id == d.e.head_id) {
        if (!d.has_zeta) d.e.zeta = hs.e.zeta;
        if (!d.has_qmax) d.e.q_max = hs.e.q_max;
        d.has_zeta = d.has_qmax = true;
        break;
      }
    }
  }
}

uint64_t fnv1a64(const std::string& text) {
  uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

Problem parse_problem(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(std::string("input is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) fail("top level must be an object");
  check_keys(doc,
             {"schema_version", "name", "mirror_feed_to_return", "nodes",
              "edges", "catalog", "physical", "economics", "solver"},
             "the document");
  if (!doc.contains("schema_version"))
    fail("missing key 'schema_version' in the document");
  if (!doc.at("schema_version").is_number_integer() ||
      doc.at("schema_version").get<int>() != 1)
    fail("unsupported schema_version (expected 1)");
  if (doc.contains("name") && !doc.at("name").is_string())
    fail("key 'name' in the document must be a string");

  Problem p;
  if (doc.contains("physical")) p.physical = parse_physical(doc.at("physical"));
  if (doc.contains("economics"))
    p.economics = parse_economics(doc.at("economics"));
  if (doc.contains("solver")) p.solver = parse_solver(doc.at("solver"));
  p.catalog = parse_catalog(require_object(doc, "catalog", "the document"));

  if (!doc.contains("nodes") || !doc.at("nodes").is_array())
    fail("missing array 'nodes' in the document");
  if (!doc.contains("edges") || !doc.at("edges").is_array())
    fail("missing array 'edges' in the document");

  bool mirror = bool_or(doc, "mirror_feed_to_return", false, "the document");
  std::vector<EdgeDraft> drafts;
  if (mirror)
    parse_mirrored(doc.at("nodes"), doc.at("edges"), p.graph, drafts);
  else
    parse_explicit(doc.at("nodes"), doc.at("edges"), p.graph, drafts);
  complete_sizing(drafts, p.physical, p.solver);
  for (EdgeDraft& d : drafts) p.graph.edges.push_back(d.e);
  p.graph.finalize();
  return p;
}

Problem load_problem(const std::string& path) {
  return parse_problem(read_text_file(path));
}

PipeCatalog parse_catalog_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(std::string("catalog file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) fail("catalog file must be an object");
  return parse_catalog(doc);
}

std::string serialize_problem(const Problem& p) {
  json doc;
  doc["schema_version"] = 1;

  json nodes = json::array();
  for (const Node& n : p.graph.nodes) {
    json jn;
    jn["id"] = n.id;
    jn["role"] = to_string(n.role);
    jn["x"] = n.x;
    jn["y"] = n.y;
    nodes.push_back(jn);
  }
  doc["nodes"] = nodes;

  json edges = json::array();
  for (const Edge& e : p.graph.edges) {
    json je;
    je["id"] = e.id;
    je["role"] = to_string(e.role);
    je["tail"] = e.tail_id;
    je["head"] = e.head_id;
    if (is_pipe(e.role)) je["length"] = e.length;
    if (is_consumer_edge(e.role)) {
      je["zeta"] = e.zeta;
      je["q_max"] = e.q_max;
    }
    if (e.role == EdgeRole::HeatingSystem) {
      json jc;
      jc["demand"] = e.consumer.demand;
      jc["radiator_coeff"] = e.consumer.radiator_coeff;
      jc["radiator_exp"] = e.consumer.radiator_exp;
      jc["theta_house"] = e.consumer.theta_house;
      je["consumer"] = jc;
    }
    if (e.role == EdgeRole::ProducerFeed) {
      json jp;
      jp["supply_temperature_c"] = e.producer.supply_temperature_c;
      jp["c_heat_capex"] = e.producer.c_heat_capex;
      jp["c_heat_opex"] = e.producer.c_heat_opex;
      jp["c_pump_capex"] = e.producer.c_pump_capex;
      jp["c_pump_opex"] = e.producer.c_pump_opex;
      je["producer"] = jp;
    }
    edges.push_back(je);
  }
  doc["edges"] = edges;

  json jc;
  jc["diameters"] = p.catalog.diameters;
  jc["costs"] = p.catalog.costs;
  jc["void_diameter"] = p.catalog.void_diameter;
  jc["fade_d_min"] = p.catalog.fade_d_min;
  jc["fade_steepness"] = p.catalog.fade_steepness;
  doc["catalog"] = jc;

  json jp;
  jp["rho"] = p.physical.rho;
  jp["mu"] = p.physical.mu;
  jp["cp"] = p.physical.cp;
  jp["t_ambient_c"] = p.physical.t_ambient_c;
  jp["lambda_ground"] = p.physical.lambda_ground;
  jp["lambda_insulation"] = p.physical.lambda_insulation;
  jp["burial_depth"] = p.physical.burial_depth;
  jp["casing_ratio"] = p.physical.casing_ratio;
  doc["physical"] = jp;

  json jeco;
  jeco["horizon_years"] = p.economics.horizon_years;
  jeco["discount_rate"] = p.economics.discount_rate;
  jeco["c_revenue"] = p.economics.c_revenue;
  jeco["pump_efficiency"] = p.economics.pump_efficiency;
  jeco["include_pump_capex"] = p.economics.include_pump_capex;
  doc["economics"] = jeco;

  const SolverOptions& s = p.solver;
  json js;
  js["q_eps"] = s.q_eps;
  js["approach_floor"] = s.approach_floor;
  js["q_scale"] = s.q_scale;
  js["p_scale"] = s.p_scale;
  js["theta_scale"] = s.theta_scale;
  js["newton_tol"] = s.newton_tol;
  js["newton_max_iter"] = s.newton_max_iter;
  js["newton_max_backtracks"] = s.newton_max_backtracks;
  js["reference_pressure"] = s.reference_pressure;
  js["clip_beta"] = s.clip_beta;
  js["xi_schedule"] = s.xi_schedule;
  js["demand_margin"] = s.demand_margin;
  js["mu0"] = s.mu0;
  js["mu_growth"] = s.mu_growth;
  js["omega0"] = s.omega0;
  js["omega_final"] = s.omega_final;
  js["eta0"] = s.eta0;
  js["eta_final"] = s.eta_final;
  js["max_outer"] = s.max_outer;
  js["max_inner"] = s.max_inner;
  js["lbfgs_memory"] = s.lbfgs_memory;
  js["gamma_init"] = s.gamma_init;
  js["nominal_dt"] = s.nominal_dt;
  js["nominal_dp"] = s.nominal_dp;
  doc["solver"] = js;

  return doc.dump(2) + "\n";
}

void save_problem(const Problem& p, const std::string& path) {
  write_text_file(path, serialize_problem(p));
}

std::string apply_patches(const std::string& text,
                          const std::vector<std::string>& sets) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(std::string("input is not valid JSON: ") + e.what());
  }
  for (const std::string& set : sets) {
    auto eq = set.find('=');
    if (eq == std::string::npos || eq == 0)
      fail("override '" + set + "' must look like path=value");
    std::string path = set.substr(0, eq);
    std::string value_text = set.substr(eq + 1);

    std::vector<std::string> steps;
    size_t start = 0;
    while (start <= path.size()) {
      size_t dot = path.find('.', start);
      if (dot == std::string::npos) dot = path.size();
      if (dot == start) fail("override '" + set + "' has an empty path step");
      steps.push_back(path.substr(start, dot - start));
      start = dot + 1;
    }

    json* cur = &doc;
    for (size_t i = 0; i + 1 < steps.size(); ++i) {
      const std::string& step = steps[i];
      if (cur->is_object()) {
        if (!cur->contains(step))
          fail("unknown key '" + step + "' in override '" + set + "'");
        cur = &cur->at(step);
      } else if (cur->is_array()) {
        json* found = nullptr;
        for (json& el : *cur)
          if (el.is_object() && el.contains("id") && el.at("id") == step) {
            found = &el;
            break;
          }
        if (!found)
          fail("no element with id '" + step + "' in override '" + set + "'");
        cur = found;
      } else {
        fail("path step '" + step + "' in override '" + set +
             "' does not address an object or array");
      }
    }
    const std::string& leaf = steps.back();
    if (!cur->is_object() || !cur->contains(leaf))
      fail("unknown key '" + leaf + "' in override '" + set + "'");

    json value;
    try {
      value = json::parse(value_text);
    } catch (const json::parse_error&) {
      value = value_text;  // bare strings stay strings
    }
    json& slot = cur->at(leaf);
    bool both_numbers = slot.is_number() && value.is_number();
    if (!both_numbers && slot.type() != value.type())
      fail("override '" + set + "' changes the type of '" + leaf + "'");
    slot = value;
  }
  return doc.dump(2) + "\n";
}

std::string config_hash(const Problem& p) {
  uint64_t h = fnv1a64(serialize_problem(p));
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

std::string serialize_design(const Problem& p, const DesignPoint& d) {
  const NetworkGraph& g = p.graph;
  json doc;
  doc["schema_version"] = 1;
  json jd, ja, jg;
  for (size_t i = 0; i < g.pipes.size(); ++i)
    jd[g.edges[g.pipes[i]].id] = d.diameters[static_cast<Eigen::Index>(i)];
  for (size_t i = 0; i < g.consumer_edges.size(); ++i)
    ja[g.edges[g.consumer_edges[i]].id] = d.alpha[static_cast<Eigen::Index>(i)];
  for (size_t i = 0; i < g.producer_feed.size(); ++i)
    jg[g.edges[g.producer_feed[i]].id] = d.gamma[static_cast<Eigen::Index>(i)];
  doc["diameters"] = jd;
  doc["alpha"] = ja;
  doc["gamma"] = jg;
  return doc.dump(2) + "\n";
}

DesignPoint parse_design(const Problem& p, const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(std::string("design file is not valid JSON: ") + e.what());
  }
  check_keys(doc, {"schema_version", "diameters", "alpha", "gamma"},
             "the design file");
  if (!doc.contains("schema_version") ||
      !doc.at("schema_version").is_number_integer() ||
      doc.at("schema_version").get<int>() != 1)
    fail("unsupported schema_version in the design file (expected 1)");

  const NetworkGraph& g = p.graph;
  auto read_block = [&](const char* key, const std::vector<int>& members,
                        const std::vector<int>& member_index,
                        Eigen::VectorXd& out) {
    const json& obj = require_object(doc, key, "the design file");
    out.resize(static_cast<Eigen::Index>(members.size()));
    std::vector<bool> seen(members.size(), false);
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      int e = g.edge_index(it.key());
      int slot = e < 0 ? -1 : member_index[e];
      if (slot < 0)
        fail("design key '" + it.key() + "' in '" + key +
             "' does not name a matching edge");
      if (!it.value().is_number())
        fail("design key '" + it.key() + "' must be a number");
      out[slot] = it.value().get<double>();
      seen[slot] = true;
    }
    for (size_t i = 0; i < members.size(); ++i)
      if (!seen[i])
        fail("design section '" + std::string(key) + "' is missing edge '" +
             g.edges[members[i]].id + "'");
  };

  DesignPoint d;
  read_block("diameters", g.pipes, g.pipe_index, d.diameters);
  read_block("alpha", g.consumer_edges, g.consumer_index, d.alpha);
  read_block("gamma", g.producer_feed, g.producer_index, d.gamma);
  return d;
}

void save_design(const Problem& p, const DesignPoint& d,
                 const std::string& path) {
  write_text_file(path, serialize_design(p, d));
}

DesignPoint load_design(const Problem& p, const std::string& path) {
  return parse_design(p, read_text_file(path));
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
}

}  // namespace dhn
