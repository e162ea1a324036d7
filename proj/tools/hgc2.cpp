// hgc2 — command-line driver for graph polynomials, finite-field point and
// character sums, denominator reduction, and c2 invariants of hourglass
// chains.
// SPDX-License-Identifier: MIT

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hourglass/c2.hpp"
#include "hourglass/common.hpp"
#include "hourglass/counting.hpp"
#include "hourglass/graphpoly.hpp"
#include "hourglass/hourglass.hpp"
#include "hourglass/kernelcat.hpp"
#include "hourglass/manifest.hpp"
#include "hourglass/multigraph.hpp"
#include "hourglass/reduction.hpp"

namespace {

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::vector<int> split_ints(const std::string& s) {
  std::vector<int> out;
  for (const auto& t : split_csv(s)) out.push_back(std::stoi(t));
  return out;
}

std::string slurp(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  return hg::read_file(path);
}

struct Common {
  std::string manifest_path;
  long long budget = hg::EvalOptions{}.budget;
  int workers = 0;
  bool accel = false;

  hg::EvalOptions opt() const {
    hg::EvalOptions o;
    o.budget = budget;
    o.workers = workers;
    o.accel = accel;
    return o;
  }
};

void add_eval_flags(CLI::App* cmd, Common& c) {
  cmd->add_option("--budget", c.budget, "evaluation budget in points");
  cmd->add_option("--workers", c.workers, "worker threads (0 = all cores)");
  cmd->add_flag("--accel", c.accel,
                "accelerate the innermost variable when the product is "
                "quadratic in it");
  cmd->add_option("--manifest", c.manifest_path,
                  "write a JSON run manifest to this path");
}

void finish_manifest(hg::RunManifest& man, const Common& c) {
  if (c.manifest_path.empty()) return;
  man.finish();
  man.write(c.manifest_path);
}

hg::SeqTransform parse_transform(const std::string& s) {
  if (s == "identity") return hg::SeqTransform::identity;
  if (s == "negate") return hg::SeqTransform::negate;
  throw hg::UserError("unknown transform: " + s);
}

int run(int argc, char** argv) {
  CLI::App app{
      "hgc2 — spanning-tree and spanning-forest polynomials, Dodgson "
      "minors, denominator reduction, finite-field point and character "
      "sums, and c2 invariants of hourglass chains"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "hgc2 1.0.0");

  hg::RunManifest man;
  for (int i = 0; i < argc; ++i) man.argv.push_back(argv[i]);

  // ---- poly ---------------------------------------------------------------
  auto* cmd_poly = app.add_subcommand(
      "poly", "spanning-tree polynomial of a graph");
  std::string poly_graph;
  cmd_poly->add_option("--graph", poly_graph, "graph file (- for stdin)")
      ->required();
  cmd_poly->callback([&] {
    std::string text = slurp(poly_graph);
    hg::Multigraph g = hg::Multigraph::parse(text);
    std::cout << hg::kirchhoff(g).to_string() << "\n";
  });

  // ---- dodgson ------------------------------------------------------------
  auto* cmd_dod = app.add_subcommand(
      "dodgson", "Dodgson minor polynomial Psi^{I,J}_{G,K}");
  std::string dod_graph, dod_i, dod_j, dod_k;
  cmd_dod->add_option("--graph", dod_graph, "graph file")->required();
  cmd_dod->add_option("-I,--rows", dod_i, "edge labels removed as rows")
      ->required();
  cmd_dod->add_option("-J,--cols", dod_j, "edge labels removed as columns")
      ->required();
  cmd_dod->add_option("-K,--zero", dod_k, "edge labels set to zero");
  cmd_dod->callback([&] {
    hg::Multigraph g = hg::Multigraph::parse(slurp(dod_graph));
    std::cout << hg::dodgson(g, split_csv(dod_i), split_csv(dod_j),
                             split_csv(dod_k))
                     .to_string()
              << "\n";
  });

  // ---- forest -------------------------------------------------------------
  auto* cmd_forest = app.add_subcommand(
      "forest", "spanning-forest polynomial for a vertex partition");
  std::string forest_graph, forest_parts;
  cmd_forest->add_option("--graph", forest_graph, "graph file")->required();
  cmd_forest
      ->add_option("--parts", forest_parts,
                   "partition of a vertex subset, e.g. \"0,2|1,3\"")
      ->required();
  cmd_forest->callback([&] {
    hg::Multigraph g = hg::Multigraph::parse(slurp(forest_graph));
    std::vector<std::vector<int>> parts;
    std::stringstream ss(forest_parts);
    std::string part;
    while (std::getline(ss, part, '|')) parts.push_back(split_ints(part));
    std::cout << hg::forest_poly(g, parts).to_string() << "\n";
  });

  // ---- reduce -------------------------------------------------------------
  auto* cmd_red = app.add_subcommand(
      "reduce", "denominator reduction from three starting edges");
  std::string red_graph, red_start, red_order, red_route = "classical";
  int red_max = -1;
  cmd_red->add_option("--graph", red_graph, "graph file")->required();
  cmd_red->add_option("--start", red_start,
                      "three starting edge labels (default: a 3-valent "
                      "vertex's edges)");
  cmd_red->add_option("--order", red_order,
                      "explicit variable order (default: greedy)");
  cmd_red->add_option("--route", red_route, "classical | quadratic")
      ->check(CLI::IsMember({"classical", "quadratic"}));
  cmd_red->add_option("--max-steps", red_max, "stop after this many steps");
  cmd_red->callback([&] {
    hg::Multigraph g = hg::Multigraph::parse(slurp(red_graph));
    std::vector<std::string> start = red_start.empty()
                                         ? hg::detail::default_start_edges(g)
                                         : split_csv(red_start);
    hg::require(start.size() == 3, "reduce needs exactly 3 starting edges");
    hg::FactoredInvariant inv =
        red_route == "classical"
            ? hg::three_invariant(g, start[0], start[1], start[2])
            : hg::quadratic_start(g, start[0], start[1], start[2]);
    hg::CtxPtr ctx = g.make_ctx();
    std::vector<std::string> remaining =
        hg::detail::remaining_after(g, start);
    hg::ReductionResult res = hg::reduce_invariant(
        inv, ctx, remaining, split_csv(red_order), red_max);
    std::cout << "start: " << start[0] << " " << start[1] << " " << start[2]
              << "  route: " << red_route << "\n";
    for (const auto& v : res.reduced) std::cout << "step: " << v << "\n";
    std::cout << "steps: " << res.reduced.size() << "\n";
    std::cout << "complete: " << (res.complete ? "yes" : "no") << "\n";
    if (res.inv.zero) {
      std::cout << "invariant: 0\n";
    } else {
      std::cout << "sign: "
                << (res.inv.sign_exact
                        ? (res.inv.sign < 0 ? "-" : "+")
                        : std::string("±"))
                << "  content: " << res.inv.content.get_str() << "\n";
      for (const auto& f : res.inv.factors)
        std::cout << "factor (^" << f.second
                  << "): " << f.first.to_string() << "\n";
    }
  });

  // ---- count / lsum -------------------------------------------------------
  Common cnt_common;
  std::string cnt_graph, cnt_poly;
  int cnt_q = 0;
  auto* cmd_count = app.add_subcommand(
      "count", "number of zeros of a polynomial over F_q");
  auto* cmd_lsum = app.add_subcommand(
      "lsum", "quadratic-character sum of a polynomial over F_q");
  for (auto* cmd : {cmd_count, cmd_lsum}) {
    cmd->add_option("--graph", cnt_graph,
                    "graph file (uses its spanning-tree polynomial)");
    cmd->add_option("--poly", cnt_poly, "polynomial expression");
    cmd->add_option("--q", cnt_q, "prime power, 2 <= q <= 49")->required();
    add_eval_flags(cmd, cnt_common);
  }
  auto run_count = [&](bool character) {
    hg::require(cnt_graph.empty() != cnt_poly.empty(),
                "give exactly one of --graph or --poly");
    hg::IntPoly f;
    hg::CtxPtr ambient;
    if (!cnt_graph.empty()) {
      hg::Multigraph g = hg::Multigraph::parse(slurp(cnt_graph));
      ambient = g.make_ctx();
      f = hg::kirchhoff(g);
      man.inputs["graph"] = hg::fnv1a_hex(slurp(cnt_graph));
    } else {
      f = hg::parse_poly(cnt_poly);
      ambient = f.ctx();
    }
    hg::FieldSpec F = hg::build_field(cnt_q);
    long long v = character
                      ? hg::legendre_sum(F, f, ambient, cnt_common.opt())
                      : hg::point_count(F, f, ambient, cnt_common.opt());
    std::cout << v << "\n";
    man.command = character ? "lsum" : "count";
    man.options["q"] = cnt_q;
    man.results["value"] = v;
    finish_manifest(man, cnt_common);
  };
  cmd_count->callback([&] { run_count(false); });
  cmd_lsum->callback([&] { run_count(true); });

  // ---- c2 -----------------------------------------------------------------
  Common c2_common;
  std::string c2_graph, c2_kernel, c2_route = "auto", c2_primes,
                                   c2_strategy = "auto", c2_start;
  int c2_q = 0;
  auto* cmd_c2 = app.add_subcommand("c2", "c2 invariant");
  cmd_c2->add_option("--graph", c2_graph, "graph file (direct routes)");
  cmd_c2->add_option("--kernel", c2_kernel,
                     "kernel file (chain closed form)");
  cmd_c2->add_option("--q", c2_q, "single prime power");
  cmd_c2->add_option("--primes", c2_primes, "comma-separated prime powers");
  cmd_c2->add_option("--route", c2_route,
                     "auto | psi | deg3 | classical | quadratic")
      ->check(CLI::IsMember({"auto", "psi", "deg3", "classical",
                             "quadratic"}));
  cmd_c2->add_option("--start", c2_start,
                     "three starting edges for reduction routes");
  cmd_c2->add_option("--strategy", c2_strategy,
                     "kernel evaluation: auto | grouped | prereduce")
      ->check(CLI::IsMember({"auto", "grouped", "prereduce"}));
  add_eval_flags(cmd_c2, c2_common);
  cmd_c2->callback([&] {
    hg::require(c2_graph.empty() != c2_kernel.empty(),
                "give exactly one of --graph or --kernel");
    hg::require((c2_q != 0) == c2_primes.empty(),
                "give exactly one of --q or --primes");
    std::vector<int> qs = c2_q != 0 ? std::vector<int>{c2_q}
                                    : split_ints(c2_primes);
    man.command = "c2";
    for (int q : qs) {
      hg::FieldSpec F = hg::build_field(q);
      hg::C2Result r;
      if (!c2_kernel.empty()) {
        hg::KernelSpec spec = hg::parse_kernel(slurp(c2_kernel), c2_kernel);
        man.inputs["kernel"] = hg::kernel_checksum(spec);
        hg::HourglassStrategy st =
            c2_strategy == "grouped"
                ? hg::HourglassStrategy::grouped
                : c2_strategy == "prereduce" ? hg::HourglassStrategy::prereduce
                                             : hg::HourglassStrategy::automatic;
        r = hg::c2_hourglass(spec, F, c2_common.opt(), st);
      } else {
        hg::Multigraph g = hg::Multigraph::parse(slurp(c2_graph));
        man.inputs["graph"] = hg::fnv1a_hex(slurp(c2_graph));
        std::vector<std::string> start =
            c2_start.empty() ? std::vector<std::string>{}
                             : split_csv(c2_start);
        if (c2_route == "psi" || c2_route == "auto")
          r = hg::c2_psi(g, F, c2_common.opt());
        else if (c2_route == "deg3")
          r = hg::c2_deg3(g, F, c2_common.opt(), start);
        else if (c2_route == "classical")
          r = hg::c2_classical(g, F, c2_common.opt(), start);
        else
          r = hg::c2_quadratic(g, F, c2_common.opt(), start);
      }
      if (r.applicable) {
        std::cout << "q=" << q << " c2=" << r.value << "\n";
        man.results["q" + std::to_string(q)] = r.value;
      } else {
        std::cout << "q=" << q << " inapplicable: " << r.reason << "\n";
        man.results["q" + std::to_string(q)] = nullptr;
      }
    }
    man.options["route"] = c2_route;
    finish_manifest(man, c2_common);
  });

  // ---- chain --------------------------------------------------------------
  auto* cmd_chain = app.add_subcommand(
      "chain", "build an hourglass chain over a kernel");
  std::string ch_kernel;
  int ch_n = 2;
  bool ch_twist = false, ch_decomplete = false;
  cmd_chain->add_option("--kernel", ch_kernel, "kernel file")->required();
  cmd_chain->add_option("--n", ch_n, "number of hourglasses (>= 2)")
      ->required();
  cmd_chain->add_flag("--twist", ch_twist,
                      "swap the first pair when attaching");
  cmd_chain->add_flag("--decomplete", ch_decomplete,
                      "remove the split vertex before printing");
  cmd_chain->callback([&] {
    hg::KernelSpec spec = hg::parse_kernel(slurp(ch_kernel), ch_kernel);
    hg::ChainGraph ch = hg::build_chain(spec, ch_n, ch_twist);
    if (ch_decomplete) {
      hg::require(ch.split_vertex >= 0,
                  "no split vertex for chains this short");
      std::cout << ch.graph.delete_vertex(ch.split_vertex).to_string();
    } else {
      std::cout << ch.graph.to_string();
      if (ch.split_vertex >= 0)
        std::cout << "# split vertex " << ch.split_vertex << "\n";
    }
  });

  // ---- kernels ------------------------------------------------------------
  auto* cmd_ker = app.add_subcommand(
      "kernels", "enumerate the kernel catalog for a given size");
  int ker_n = 0;
  std::string ker_dump;
  cmd_ker->add_option("--n", ker_n, "internal vertices (0..6)")->required();
  cmd_ker->add_option("--dump", ker_dump, "write kernel files here");
  cmd_ker->callback([&] {
    auto specs = hg::catalog_kernels(ker_n);
    for (const auto& s : specs) {
      std::cout << s.name << "\t" << s.k.n_vertices() << "v\t"
                << s.k.n_edges() << "e\text " << s.ext[0] << "," << s.ext[1]
                << "|" << s.ext[2] << "," << s.ext[3] << "\t"
                << hg::kernel_checksum(s) << "\n";
      if (!ker_dump.empty()) {
        std::ofstream out(ker_dump + "/" + s.name + ".kernel");
        hg::require(bool(out), "cannot write in " + ker_dump);
        out << hg::kernel_to_string(s);
      }
    }
  });

  // ---- match --------------------------------------------------------------
  Common match_common;
  std::string match_kernel, match_table, match_primes = "2,3,5,7",
                            match_tf = "negate";
  auto* cmd_match = app.add_subcommand(
      "match", "match a kernel's c2 sequence against reference rows");
  cmd_match->add_option("--kernel", match_kernel, "kernel file")->required();
  cmd_match->add_option("--table", match_table, "reference CSV")->required();
  cmd_match->add_option("--primes", match_primes, "prime powers to test");
  cmd_match->add_option("--transform", match_tf,
                        "identity | negate (applied to reference entries)");
  add_eval_flags(cmd_match, match_common);
  cmd_match->callback([&] {
    hg::KernelSpec spec = hg::parse_kernel(slurp(match_kernel), match_kernel);
    std::vector<std::pair<int, long>> computed;
    for (int q : split_ints(match_primes)) {
      hg::FieldSpec F = hg::build_field(q);
      hg::C2Result r = hg::c2_hourglass(spec, F, match_common.opt());
      if (r.applicable) computed.push_back({q, r.value});
      std::cout << "q=" << q << " "
                << (r.applicable ? std::to_string(r.value) : "n/a") << "\n";
    }
    hg::SeqTransform tf = parse_transform(match_tf);
    bool any = false;
    for (const auto& ref : hg::load_reference_table(match_table)) {
      if (hg::match_sequence(computed, ref, tf)) {
        std::cout << "match: " << ref.name << "\n";
        any = true;
      }
    }
    if (!any) std::cout << "match: none\n";
  });

  // ---- reproduce ----------------------------------------------------------
  Common rep_common;
  std::string rep_what, rep_primes = "2,3,5,7";
  int rep_nmax = 4;
  auto* cmd_rep = app.add_subcommand(
      "reproduce", "desk-scale reproduction of the catalog tables");
  cmd_rep->add_option("what", rep_what, "table1 | table2")
      ->required()
      ->check(CLI::IsMember({"table1", "table2"}));
  cmd_rep->add_option("--n-max", rep_nmax, "largest kernel size");
  cmd_rep->add_option("--primes", rep_primes, "prime powers (table2)");
  add_eval_flags(cmd_rep, rep_common);
  cmd_rep->callback([&] {
    if (rep_what == "table1") {
      std::cout << "internal vertices | kernels\n";
      for (int n = 0; n <= rep_nmax; ++n)
        std::cout << n << " | " << hg::catalog_kernels(n).size() << "\n";
      return;
    }
    std::vector<int> qs = split_ints(rep_primes);
    std::cout << "kernel";
    for (int q : qs) std::cout << " | -c2 mod " << q;
    std::cout << "\n";
    for (int n = 0; n <= rep_nmax; ++n)
      for (const auto& spec : hg::catalog_kernels(n)) {
        std::cout << spec.name;
        for (int q : qs) {
          hg::FieldSpec F = hg::build_field(q);
          hg::C2Result r = hg::c2_hourglass(spec, F, rep_common.opt());
          if (r.applicable)
            std::cout << " | " << hg::mod_nonneg(-r.value, F.q);
          else
            std::cout << " | n/a";
        }
        std::cout << "\n";
      }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;  // bad flags are user errors
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const hg::UserError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const hg::BudgetError& e) {
    std::cerr << "budget exceeded: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
