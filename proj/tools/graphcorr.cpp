#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "graphcorr/json_io.hpp"
#include "graphcorr/verify.hpp"

namespace gc = graphcorr;

namespace {

gc::Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  gc::Json j;
  in >> j;
  return j;
}

gc::GraphPtr load_graph(const std::string& path) {
  return gc::graph_from_json(load_json(path));
}

void emit(const gc::Json& j) { std::cout << j.dump(2) << "\n"; }

gc::Json report_json(const gc::VerifyReport& rep) {
  gc::Json residuals = gc::Json::object();
  for (const auto& [key, value] : rep.residuals) residuals[key] = value;
  return {{"suite", rep.suite},
          {"instances", rep.instances},
          {"residuals", residuals},
          {"pass", rep.pass},
          {"seed", rep.seed}};
}

struct Args {
  std::string graph1, graph2, eta_file, x_file, a_file, suite = "all";
  std::string mult;
  int level = 3;
  int trials = 20;
  std::uint64_t seed = 0;
  double tol = gc::kTol;
};

int run(const std::string& cmd, const Args& args) {
  if (cmd == "validate") {
    gc::GraphPtr g = load_graph(args.graph1);
    emit({{"valid", true},
          {"vertices", g->vertex_count()},
          {"edges", g->edge_count()}});
    return 0;
  }
  if (cmd == "iso") {
    gc::GraphPtr g = load_graph(args.graph1), f = load_graph(args.graph2);
    auto cert = gc::graph_isomorphism(*g, *f);
    if (!cert) {
      emit({{"isomorphic", false}});
      return 1;
    }
    emit(gc::iso_to_json(*g, *f, *cert));
    return 0;
  }
  if (cmd == "morita") {
    gc::GraphPtr g = load_graph(args.graph1), f = load_graph(args.graph2);
    auto cert = gc::morita_decide(g, f, args.seed);
    if (!cert) {
      emit({{"equivalent", false}});
      return 1;
    }
    emit(gc::morita_certificate_to_json(*cert));
    return 0;
  }
  if (cmd == "intertwiners") {
    gc::GraphPtr g = load_graph(args.graph1);
    gc::RepPtr rep =
        gc::make_representation(g, gc::parse_multiplicities(*g, args.mult));
    const int dim = static_cast<int>(gc::intertwiner_basis(rep).size());
    const int oracle = gc::intertwiner_nullspace_dim(*rep);
    gc::Json blocks = gc::Json::array();
    for (int e = 0; e < g->edge_count(); ++e)
      blocks.push_back({{"edge", g->edge(e).id},
                        {"rows", rep->mult[g->dst(e)]},
                        {"cols", rep->mult[g->src(e)]}});
    emit({{"dimension", dim},
          {"nullspace_dimension", oracle},
          {"match", dim == oracle},
          {"blocks", blocks}});
    return dim == oracle ? 0 : 1;
  }
  if (cmd == "ball") {
    gc::GraphPtr g = load_graph(args.graph1);
    gc::RepPtr rep =
        gc::make_representation(g, gc::parse_multiplicities(*g, args.mult));
    gc::Intertwiner eta =
        gc::intertwiner_from_json(rep, load_json(args.eta_file));
    auto [inside, norm] = gc::ball_membership(eta);
    emit({{"norm", norm}, {"inside", inside}});
    return inside ? 0 : 1;
  }
  if (cmd == "center") {
    gc::GraphPtr g = load_graph(args.graph1);
    gc::RepPtr rep =
        gc::make_representation(g, gc::parse_multiplicities(*g, args.mult));
    auto basis = gc::center_basis(rep);
    gc::Json loops = gc::Json::array();
    for (int e = 0; e < g->edge_count(); ++e)
      if (g->src(e) == g->dst(e)) loops.push_back(g->edge(e).id);
    emit({{"dimension", static_cast<int>(basis.size())}, {"loops", loops}});
    return 0;
  }
  if (cmd == "fock") {
    gc::GraphPtr g = load_graph(args.graph1);
    gc::FockBasisPtr basis = gc::make_fock_basis(g, args.level);
    gc::Json dims = gc::Json::array();
    for (int n = 0; n <= args.level; ++n) dims.push_back(basis->level_dim(n));
    gc::Json out = {{"N", args.level}, {"dims", dims}, {"total", basis->dim()}};
    if (!args.x_file.empty()) {
      gc::CorrElement x = gc::corr_from_json(g, load_json(args.x_file));
      out["creation"] = gc::operator_to_json(gc::creation_operator(x, basis));
    }
    if (!args.a_file.empty()) {
      gc::AlgebraElement a = gc::algebra_from_json(g, load_json(args.a_file));
      out["diagonal"] = gc::operator_to_json(gc::phi_infinity(a, basis));
    }
    emit(out);
    return 0;
  }
  if (cmd == "linking") {
    gc::GraphPtr g = load_graph(args.graph1), f = load_graph(args.graph2);
    if (!gc::graph_isomorphism(*g, *f)) {
      emit({{"equivalent", false}});
      return 1;
    }
    gc::LinkingReport rep =
        gc::run_linking(g, f, args.level, args.trials, args.seed);
    gc::Json dims = gc::Json::array();
    for (size_t n = 0; n < rep.dims.ranks.size(); ++n)
      dims.push_back({{"level", n},
                      {"ranks", rep.dims.ranks[n]},
                      {"expected", rep.dims.expected[n]}});
    emit({{"corner_residual_max", rep.corner_residual_max},
          {"fock_dims", dims},
          {"invariance_residual", rep.invariance_residual},
          {"left_action_residual", rep.action_residual},
          {"gram_min_eig", rep.build.gram_min_eig},
          {"pass", rep.pass}});
    return rep.pass ? 0 : 1;
  }
  if (cmd == "verify") {
    gc::GraphPtr g = load_graph(args.graph1);
    gc::VerifyOptions opts;
    opts.level = args.level;
    opts.trials = args.trials;
    opts.seed = args.seed;
    opts.tol = args.tol;
    opts.mult = gc::parse_multiplicities(*g, args.mult);
    std::vector<gc::VerifyReport> reports;
    if (args.suite == "all") {
      reports = gc::run_all_suites(g, opts);
    } else {
      reports.push_back(gc::run_suite(args.suite, g, opts));
    }
    gc::Json arr = gc::Json::array();
    bool pass = true;
    for (const gc::VerifyReport& rep : reports) {
      arr.push_back(report_json(rep));
      std::cerr << "suite " << rep.suite << ": "
                << (rep.pass ? "pass" : "FAIL") << " (" << rep.wall_ms
                << " ms)\n";
      pass = pass && rep.pass;
    }
    emit({{"reports", arr}, {"pass", pass}});
    return pass ? 0 : 1;
  }
  throw std::invalid_argument("unknown command " + cmd);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite W*-graph correspondence toolkit"};
  app.require_subcommand(1);
  Args args;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--level", args.level, "Fock truncation level");
    sub->add_option("--trials", args.trials, "random verification trials");
    sub->add_option("--seed", args.seed, "RNG seed");
    sub->add_option("--tol", args.tol, "verification tolerance");
    sub->add_option("--mult", args.mult,
                    "multiplicities, e.g. v1=2,v2=1 (default 1)");
  };

  CLI::App* validate = app.add_subcommand("validate", "validate a graph file");
  validate->add_option("graph", args.graph1)->required();
  CLI::App* iso = app.add_subcommand("iso", "decide graph isomorphism");
  iso->add_option("graph1", args.graph1)->required();
  iso->add_option("graph2", args.graph2)->required();
  CLI::App* morita =
      app.add_subcommand("morita", "decide Morita equivalence with certificate");
  morita->add_option("graph1", args.graph1)->required();
  morita->add_option("graph2", args.graph2)->required();
  add_common(morita);
  CLI::App* inter =
      app.add_subcommand("intertwiners", "intertwiner space dimensions");
  inter->add_option("graph", args.graph1)->required();
  add_common(inter);
  CLI::App* ball = app.add_subcommand("ball", "unit-ball membership");
  ball->add_option("graph", args.graph1)->required();
  ball->add_option("eta", args.eta_file)->required();
  add_common(ball);
  CLI::App* center = app.add_subcommand("center", "center of the dual space");
  center->add_option("graph", args.graph1)->required();
  add_common(center);
  CLI::App* fock = app.add_subcommand("fock", "Fock space data and operators");
  fock->add_option("graph", args.graph1)->required();
  fock->add_option("--x", args.x_file, "correspondence element JSON");
  fock->add_option("--a", args.a_file, "algebra element JSON");
  add_common(fock);
  CLI::App* linking = app.add_subcommand("linking", "linking correspondence checks");
  linking->add_option("graph1", args.graph1)->required();
  linking->add_option("graph2", args.graph2)->required();
  add_common(linking);
  CLI::App* verify = app.add_subcommand("verify", "run verification suites");
  verify->add_option("graph", args.graph1)->required();
  verify->add_option("--suite", args.suite, "suite name or 'all'");
  add_common(verify);

  CLI11_PARSE(app, argc, argv);

  try {
    return run(app.get_subcommands().front()->get_name(), args);
  } catch (const std::invalid_argument& ex) {
    emit({{"error", ex.what()}});
    return 2;
  } catch (const gc::Json::exception& ex) {
    emit({{"error", ex.what()}});
    return 2;
  } catch (const std::exception& ex) {
    emit({{"error", ex.what()}});
    return 1;
  }
}
