#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "glip/encode.hpp"
#include "glip/equivalence.hpp"
#include "glip/manifest.hpp"
#include "glip/milp.hpp"
#include "glip/mps.hpp"
#include "glip/pvalues.hpp"
#include "glip/separation.hpp"
#include "glip/simulate.hpp"
#include "glip/solve.hpp"

namespace {

using nlohmann::json;
constexpr const char* kVersion = "1.0.0";

glip::GraphClass parse_class(const std::string& s) {
  if (s == "dag") return glip::GraphClass::DAG;
  if (s == "dg") return glip::GraphClass::DG;
  if (s == "admg") return glip::GraphClass::ADMG;
  if (s == "dmg") return glip::GraphClass::DMG;
  if (s == "chain") return glip::GraphClass::CHAIN;
  throw CLI::ValidationError("--mode", "unknown graph class " + s);
}

glip::EncodingKind parse_kind(const std::string& s) {
  if (s == "d") return glip::EncodingKind::D;
  if (s == "dc") return glip::EncodingKind::DC;
  if (s == "m") return glip::EncodingKind::M;
  if (s == "mc") return glip::EncodingKind::MC;
  if (s == "c") return glip::EncodingKind::C;
  throw CLI::ValidationError("--sep", "unknown separation criterion " + s);
}

glip::ConditioningFamily make_family(int d, const std::string& kflag) {
  if (kflag == "full") return glip::family_full(d);
  int k = std::stoi(kflag);
  if (k < 0 || k > d - 2) throw CLI::ValidationError("--k", "k must lie in [0, d-2] or be 'full'");
  return glip::family_k(d, k);
}

glip::MixedGraph load_graph(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return glip::graph_from_text(ss.str());
}

void save_graph(const glip::MixedGraph& g, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << glip::to_text(g);
}

// Reproducibility record written next to each command's primary output.
struct Manifest {
  json j;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

  Manifest(const std::string& command, const std::vector<std::string>& argv) {
    j["command"] = command;
    j["argv"] = argv;
    j["tool_version"] = kVersion;
    j["inputs"] = json::object();
    j["outputs"] = json::object();
    j["solver_status"] = nullptr;
    j["seed"] = nullptr;
  }
  void input(const std::string& path) {
    if (!path.empty()) j["inputs"][path] = glip::file_digest(path);
  }
  void output(const std::string& path) {
    if (!path.empty()) j["outputs"][path] = glip::file_digest(path);
  }
  void write(const std::string& primary_out, const std::string& explicit_path) {
    j["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::string path = explicit_path;
    if (path.empty()) path = primary_out.empty() ? "glip.manifest.json" : primary_out + ".manifest.json";
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << j.dump(2) << "\n";
  }
};

std::string cond_field(glip::NodeSet c) {
  std::string out;
  glip::for_each_node(c, [&](int v) {
    if (!out.empty()) out += ";";
    out += std::to_string(v + 1);
  });
  return out;
}

struct TableSource {
  std::string pvalues;
  std::string data;
  std::string k = "full";

  glip::PValueTable load(Manifest& m, int* warnings = nullptr) const {
    if (pvalues.empty() == data.empty())
      throw CLI::ValidationError("--pvalues/--data", "exactly one input source is required");
    if (!pvalues.empty()) {
      m.input(pvalues);
      return glip::read_table(pvalues);
    }
    m.input(data);
    std::ifstream is(data);
    if (!is) throw std::runtime_error("cannot read " + data);
    glip::DataTable dt = glip::read_data(is);
    glip::ConditioningFamily fam = make_family(static_cast<int>(dt.x.cols()), k);
    glip::TestRunResult res = glip::run_all_tests(dt.x, fam);
    if (res.warnings && warnings) *warnings = res.warnings;
    return res.table;
  }
};

int cmd_learn(const std::vector<std::string>& argv, const TableSource& src, const std::string& mode,
              const std::string& sep, double alpha, const std::string& solver,
              const std::string& solver_cmd, double walltime, const std::string& warmstart,
              const std::string& out, const std::string& represent, int threads,
              std::optional<std::uint64_t> seed, const std::string& manifest_path) {
  Manifest man("learn", argv);
  if (seed) man.j["seed"] = *seed;
  glip::GraphClass cls = parse_class(mode);
  glip::EncodingKind enc = parse_kind(sep);
  if (!glip::encoding_valid(cls, enc))
    throw CLI::ValidationError("--mode/--sep", mode + " with " + sep + " is not a supported combination");
  glip::Criterion crit = glip::oracle_criterion(enc);
  int warnings = 0;
  glip::PValueTable table = src.load(man, &warnings);
  if (warnings) std::cerr << "warning: " << warnings << " degenerate tests recorded p = 1\n";
  int d = table.d;
  glip::ConditioningFamily fam = make_family(d, src.k);

  std::optional<glip::MixedGraph> warm;
  if (!warmstart.empty()) {
    man.input(warmstart);
    warm = load_graph(warmstart);
  }

  glip::Solution sol;
  if (solver == "brute") {
    sol = glip::solve_bruteforce(cls, crit, d, fam, table, alpha);
  } else if (solver == "bnb") {
    sol = glip::solve_bnb(cls, crit, d, fam, table, alpha, warm, walltime);
  } else if (solver == "external") {
    if (solver_cmd.empty()) throw CLI::ValidationError("--solver-cmd", "required with --solver external");
    glip::MilpProgram p = glip::build_program(d, cls, enc, fam);
    glip::build_objective(p, d, fam, table, alpha);
    std::string cmd = solver_cmd;
    for (std::size_t pos; (pos = cmd.find("{threads}")) != std::string::npos;)
      cmd.replace(pos, 9, std::to_string(threads));
    sol = glip::solve_external(p, d, cls, crit, fam, table, alpha, cmd, walltime);
  } else {
    throw CLI::ValidationError("--solver", "unknown backend " + solver);
  }

  save_graph(sol.graph, out);
  man.output(out);
  if (represent == "cpdag") {
    glip::MarkedGraph rep = glip::cpdag_from_dag(sol.graph);
    std::ofstream os(out + ".cpdag");
    glip::write_marked(rep, os);
    os.close();
    man.output(out + ".cpdag");
  } else if (represent != "none") {
    throw CLI::ValidationError("--represent", "unknown representative " + represent);
  }
  man.j["solver_status"] = glip::to_string(sol.status);
  man.write(out, manifest_path);

  std::cout << "status " << glip::to_string(sol.status) << "\n"
            << "objective " << sol.objective << "\n"
            << "lower_bound " << sol.lower_bound << "\n"
            << "nodes " << sol.stats.nodes << "\n"
            << "leaves " << sol.stats.leaves << "\n"
            << "wall_seconds " << sol.stats.wall_seconds << "\n";
  return sol.status == glip::SolveStatus::OPTIMAL ? 0 : 2;
}

int cmd_encode(const std::vector<std::string>& argv, const TableSource& src, const std::string& mode,
               const std::string& sep, double alpha, bool reduced, const std::string& format,
               const std::string& out, const std::string& manifest_path) {
  Manifest man("encode", argv);
  glip::GraphClass cls = parse_class(mode);
  glip::EncodingKind enc = parse_kind(sep);
  if (!glip::encoding_valid(cls, enc))
    throw CLI::ValidationError("--mode/--sep", mode + " with " + sep + " is not a supported combination");
  glip::PValueTable table = src.load(man);
  int d = table.d;
  glip::ConditioningFamily fam = make_family(d, src.k);
  glip::EncodeOptions opt;
  opt.reduced = reduced;
  glip::MilpProgram p = glip::build_program(d, cls, enc, fam, opt);
  glip::build_objective(p, d, fam, table, alpha);

  std::ofstream os(out);
  if (!os) throw std::runtime_error("cannot write " + out);
  if (format == "mps") glip::write_mps(p, os);
  else if (format == "lp") glip::write_lp(p, os);
  else throw CLI::ValidationError("--format", "unknown format " + format);
  os.close();
  man.output(out);

  json side;
  side["d"] = d;
  side["mode"] = mode;
  side["sep"] = sep;
  side["k"] = src.k;
  side["alpha"] = alpha;
  side["reduced"] = reduced;
  side["format"] = format;
  side["triples"] = glip::triple_count(fam);
  side["variables"] = p.vars.size();
  side["rows"] = p.rows.size();
  side["objective_constant"] = p.obj_constant;
  json vm = json::array();
  for (std::size_t v = 0; v < p.vars.size(); ++v)
    vm.push_back({{"name", p.vars[v].name},
                  {"type", p.vars[v].type == glip::VarType::BINARY ? "binary" : "integer"},
                  {"lb", p.vars[v].lb},
                  {"ub", p.vars[v].ub},
                  {"objective", p.obj[v]}});
  side["variable_map"] = vm;
  std::ofstream sos(out + ".json");
  sos << side.dump(2) << "\n";
  sos.close();
  man.output(out + ".json");
  man.write(out, manifest_path);

  std::cout << "variables " << p.vars.size() << "\n"
            << "rows " << p.rows.size() << "\n";
  return 0;
}

int cmd_oracle(const std::vector<std::string>& argv, const std::string& graph_path,
               const std::string& sep, const std::string& kflag, const std::string& out,
               const std::string& manifest_path) {
  Manifest man("oracle", argv);
  man.input(graph_path);
  glip::MixedGraph g = load_graph(graph_path);
  glip::Criterion crit = glip::oracle_criterion(parse_kind(sep));
  glip::ConditioningFamily fam = make_family(g.d(), kflag);
  std::ofstream os(out);
  if (!os) throw std::runtime_error("cannot write " + out);
  os << "i,j,C,separated\n";
  for (const glip::SeparationRecord& r : glip::all_separations(g, crit, fam.sets))
    os << (r.i + 1) << ',' << (r.j + 1) << ",\"" << cond_field(r.cond) << "\","
       << (r.separated ? 1 : 0) << "\n";
  os.close();
  man.output(out);
  man.write(out, manifest_path);
  return 0;
}

int cmd_citest(const std::vector<std::string>& argv, const std::string& data_path,
               const std::string& kflag, const std::string& out, const std::string& manifest_path) {
  Manifest man("citest", argv);
  man.input(data_path);
  std::ifstream is(data_path);
  if (!is) throw std::runtime_error("cannot read " + data_path);
  glip::DataTable dt = glip::read_data(is);
  glip::ConditioningFamily fam = make_family(static_cast<int>(dt.x.cols()), kflag);
  glip::TestRunResult res = glip::run_all_tests(dt.x, fam);
  glip::write_table(res.table, out);
  man.output(out);
  man.write(out, manifest_path);
  std::cout << "tests " << res.table.entries.size() << "\n"
            << "warnings " << res.warnings << "\n";
  return 0;
}

int cmd_simulate(const std::vector<std::string>& argv, glip::SimConfig cfg,
                 const std::string& scheme, const std::string& noise, const std::string& out,
                 const std::string& truth_path, const std::string& weights_path,
                 const std::string& manifest_path) {
  Manifest man("simulate", argv);
  man.j["seed"] = cfg.seed;
  cfg.scheme = scheme == "degree" ? glip::EdgeScheme::EXPECTED_DEGREE : glip::EdgeScheme::EDGE_PROB;
  if (scheme != "degree" && scheme != "prob")
    throw CLI::ValidationError("--scheme", "unknown scheme " + scheme);
  if (noise == "a") cfg.noise = glip::NoiseLaw::UNEQUAL_VAR_A;
  else if (noise == "b") cfg.noise = glip::NoiseLaw::UNEQUAL_VAR_B;
  else throw CLI::ValidationError("--noise", "unknown noise law " + noise);

  if (cfg.edge_prob < 0) cfg.edge_prob = cfg.d > 1 ? 1.0 / (cfg.d - 1) : 0;
  if (cfg.expected_degree < 0) cfg.expected_degree = 2;
  glip::WeightedDag generating;
  glip::MixedGraph truth{1, false};
  std::vector<int> observed;
  if (cfg.latent > 0) {
    glip::AdmgScenario sc = glip::random_admg(cfg);
    generating = sc.hidden;
    truth = sc.admg;
    observed = sc.observed;
  } else {
    generating = glip::random_dag(cfg);
    truth = generating.graph;
    for (int v = 0; v < cfg.d; ++v) observed.push_back(v);
  }

  Eigen::MatrixXd x = glip::sample_linear_gaussian(generating, cfg);
  glip::DataTable dt;
  dt.x.resize(x.rows(), static_cast<Eigen::Index>(observed.size()));
  for (std::size_t c = 0; c < observed.size(); ++c) {
    dt.x.col(static_cast<Eigen::Index>(c)) = x.col(observed[c]);
    dt.names.push_back("X" + std::to_string(c + 1));
  }
  glip::write_data(dt, out);
  man.output(out);

  if (!truth_path.empty()) {
    save_graph(truth, truth_path);
    man.output(truth_path);
    if (cfg.latent > 0) {
      save_graph(generating.graph, truth_path + ".hidden");
      man.output(truth_path + ".hidden");
    }
  }
  if (!weights_path.empty()) {
    std::ofstream ws(weights_path);
    if (!ws) throw std::runtime_error("cannot write " + weights_path);
    ws << "i,j,w\n";
    for (const auto& [edge, w] : generating.weights)
      ws << (edge.first + 1) << ',' << (edge.second + 1) << ',' << w << "\n";
    ws.close();
    man.output(weights_path);
  }
  man.write(out, manifest_path);
  std::cout << "rows " << x.rows() << "\n"
            << "edges " << generating.graph.edge_count() << "\n";
  return 0;
}

int cmd_metrics(const std::vector<std::string>& argv, const std::string& learned_path,
                const std::string& truth_path, const std::string& sep, const std::string& kflag,
                const std::string& represent, const std::string& out,
                const std::string& manifest_path) {
  Manifest man("metrics", argv);
  man.input(learned_path);
  man.input(truth_path);
  glip::MixedGraph gl = load_graph(learned_path);
  glip::MixedGraph gt = load_graph(truth_path);
  if (gl.d() != gt.d()) throw std::runtime_error("graphs differ in node count");
  glip::Criterion crit = glip::oracle_criterion(parse_kind(sep));
  int k = kflag == "full" ? gl.d() - 2 : std::stoi(kflag);
  glip::MarkedGraph ml{1}, mt{1};
  if (represent == "cpdag") {
    ml = glip::cpdag_from_dag(gl);
    mt = glip::cpdag_from_dag(gt);
  } else if (represent == "none") {
    ml = glip::marked_from_mixed(gl);
    mt = glip::marked_from_mixed(gt);
  } else {
    throw CLI::ValidationError("--represent", "unknown representative " + represent);
  }
  glip::F1Scores f1 = glip::f1_scores(ml, mt);
  json res;
  res["shd"] = glip::shd(ml, mt);
  res["k"] = k;
  res["k_sep"] = glip::k_sep_distance(gl, gt, crit, k);
  res["head_f1"] = f1.head_f1;
  res["tail_f1"] = f1.tail_f1;
  res["head_fdr"] = f1.head_fdr;
  res["head_fnr"] = f1.head_fnr;
  res["tail_fdr"] = f1.tail_fdr;
  res["tail_fnr"] = f1.tail_fnr;
  std::string text = res.dump(2) + "\n";
  if (!out.empty()) {
    std::ofstream os(out);
    if (!os) throw std::runtime_error("cannot write " + out);
    os << text;
    os.close();
    man.output(out);
  }
  std::cout << text;
  man.write(out, manifest_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> raw(argv, argv + argc);
  CLI::App app{"glip: exact graph learning from conditional-independence p-values"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  TableSource src;
  std::string mode = "dag", sep = "d", solver = "bnb", solver_cmd, warmstart, out, represent = "none";
  std::string format = "mps", manifest_path;
  double alpha = 0.001, walltime = 0;
  int threads = 1;
  bool reduced = false;
  std::uint64_t seed_val = 0;
  bool seed_given = false;

  auto add_source = [&](CLI::App* c) {
    c->add_option("--pvalues", src.pvalues, "p-value CSV (i,j,C,p,w)");
    c->add_option("--data", src.data, "data CSV; runs Fisher-z tests over the family");
    c->add_option("--k", src.k, "conditioning-set size bound or 'full'")->capture_default_str();
  };
  auto add_manifest = [&](CLI::App* c) {
    c->add_option("--manifest", manifest_path, "manifest path (default: <out>.manifest.json)");
  };

  CLI::App* learn = app.add_subcommand("learn", "solve for the optimal graph");
  add_source(learn);
  learn->add_option("--mode", mode, "graph class: dag|dg|admg|dmg|chain")->capture_default_str();
  learn->add_option("--sep", sep, "separation criterion: d|dc|m|mc|c")->capture_default_str();
  learn->add_option("--alpha", alpha, "independence threshold on p-values")->capture_default_str();
  learn->add_option("--solver", solver, "brute|bnb|external")->capture_default_str();
  learn->add_option("--solver-cmd", solver_cmd, "external command template with {mps} {out} {wall}");
  learn->add_option("--walltime", walltime, "time budget in seconds; 0 = unlimited")->capture_default_str();
  learn->add_option("--warmstart", warmstart, "graph file seeding the incumbent");
  learn->add_option("--out", out, "learned graph output path")->required();
  learn->add_option("--represent", represent, "cpdag|none")->capture_default_str();
  learn->add_option("--threads", threads, "forwarded to {threads} in --solver-cmd")->capture_default_str();
  learn->add_option("--seed", seed_val, "recorded in the manifest")->each([&](const std::string&) { seed_given = true; });
  add_manifest(learn);

  CLI::App* encode = app.add_subcommand("encode", "write the integer program");
  add_source(encode);
  encode->add_option("--mode", mode, "graph class: dag|dg|admg|dmg|chain")->capture_default_str();
  encode->add_option("--sep", sep, "separation criterion: d|dc|m|mc|c")->capture_default_str();
  encode->add_option("--alpha", alpha, "independence threshold on p-values")->capture_default_str();
  encode->add_flag("--reduced", reduced, "reduced main system (d criterion only)");
  encode->add_option("--format", format, "mps|lp")->capture_default_str();
  encode->add_option("--out", out, "program output path")->required();
  add_manifest(encode);

  std::string graph_path;
  CLI::App* oracle = app.add_subcommand("oracle", "list separations of a graph");
  oracle->add_option("--graph", graph_path, "graph file")->required();
  oracle->add_option("--sep", sep, "separation criterion: d|dc|m|mc|c")->capture_default_str();
  oracle->add_option("--k", src.k, "conditioning-set size bound or 'full'")->capture_default_str();
  oracle->add_option("--out", out, "CSV output path")->required();
  add_manifest(oracle);

  CLI::App* citest = app.add_subcommand("citest", "run Fisher-z tests over a family");
  citest->add_option("--data", src.data, "data CSV")->required();
  citest->add_option("--k", src.k, "conditioning-set size bound or 'full'")->capture_default_str();
  citest->add_option("--out", out, "p-value CSV output path")->required();
  add_manifest(citest);

  glip::SimConfig cfg;
  cfg.edge_prob = -1;
  cfg.expected_degree = -1;
  std::string scheme = "prob", noise = "a", truth_path, weights_path;
  CLI::App* simulate = app.add_subcommand("simulate", "sample a linear Gaussian model");
  simulate->add_option("--d", cfg.d, "observed node count")->required();
  simulate->add_option("--scheme", scheme, "prob|degree")->capture_default_str();
  simulate->add_option("--p", cfg.edge_prob, "edge probability (scheme prob)");
  simulate->add_option("--e", cfg.expected_degree, "expected degree (scheme degree)");
  simulate->add_option("--weight-lo", cfg.weight_lo, "weight range low end")->capture_default_str();
  simulate->add_option("--weight-hi", cfg.weight_hi, "weight range high end")->capture_default_str();
  simulate->add_option("--noise", noise, "a: var 1+0.1Z, b: var U[1,2]")->capture_default_str();
  simulate->add_option("--n", cfg.n, "sample count")->required();
  simulate->add_option("--latent", cfg.latent, "latent node count (ADMG scenario)")->capture_default_str();
  simulate
      ->add_option("--seed", seed_val,
                   "generator seed (mandatory)")
      ->required();
  simulate->add_option("--out", out, "data CSV output path")->required();
  simulate->add_option("--truth", truth_path, "ground-truth graph output path");
  simulate->add_option("--weights", weights_path, "edge-weight CSV output path");
  add_manifest(simulate);

  std::string learned_path;
  CLI::App* metrics = app.add_subcommand("metrics", "score a learned graph against the truth");
  metrics->add_option("--learned", learned_path, "learned graph file")->required();
  metrics->add_option("--truth", truth_path, "ground-truth graph file")->required();
  metrics->add_option("--sep", sep, "separation criterion: d|dc|m|mc|c")->capture_default_str();
  metrics->add_option("--k", src.k, "k-SEP bound or 'full' (= d-2)")->capture_default_str();
  metrics->add_option("--represent", represent, "cpdag|none")->capture_default_str();
  metrics->add_option("--out", out, "JSON output path (also printed)");
  add_manifest(metrics);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (learn->parsed())
      return cmd_learn(raw, src, mode, sep, alpha, solver, solver_cmd, walltime, warmstart, out,
                       represent, threads,
                       seed_given ? std::optional<std::uint64_t>(seed_val) : std::nullopt,
                       manifest_path);
    if (encode->parsed()) return cmd_encode(raw, src, mode, sep, alpha, reduced, format, out, manifest_path);
    if (oracle->parsed()) return cmd_oracle(raw, graph_path, sep, src.k, out, manifest_path);
    if (citest->parsed()) return cmd_citest(raw, src.data, src.k, out, manifest_path);
    if (simulate->parsed()) {
      cfg.set_seed(seed_val);
      return cmd_simulate(raw, cfg, scheme, noise, out, truth_path, weights_path, manifest_path);
    }
    if (metrics->parsed())
      return cmd_metrics(raw, learned_path, truth_path, sep, src.k, represent, out, manifest_path);
  } catch (const CLI::Error& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
