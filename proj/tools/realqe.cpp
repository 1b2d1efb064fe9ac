#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "realqe/realqe.hpp"

namespace {

enum Exit { kOk = 0, kFalse = 1, kBudget = 2, kInput = 3 };

struct RunConfig {
  std::string in;
  std::size_t budget_nodes = realqe::Limits{}.max_nodes;
  std::size_t budget_monomials = realqe::kDefaultMaxMonomials;
  std::size_t budget_rows = realqe::Limits{}.max_table_rows;
  std::uint64_t seed = 1;
  std::string format = "human";
  unsigned threads = 1;
  bool no_peephole = false;

  // reduce strict
  std::size_t k = 0;
  std::size_t l = 0;
  double c = 1.0;
  double c1 = 1.0;

  std::string graph;
  bool to_arrangement = false;
  bool from_points = false;
  bool full_table = false;

  bool machine() const { return format == "machine"; }

  realqe::QeOptions qe() const {
    realqe::QeOptions o;
    o.max_nodes = budget_nodes;
    o.max_monomials = budget_monomials;
    o.max_table_rows = budget_rows;
    o.threads = threads;
    return o;
  }
};

std::string slurp(const std::string& path) {
  if (path.empty() || path == "-") {
    return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
  }
  std::ifstream f(path, std::ios::binary);
  if (!f) throw realqe::DomainError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

// Polynomials one per line; blank lines and lines starting with '#' skipped.
std::vector<realqe::Polynomial> read_polys(const std::string& text) {
  std::vector<realqe::Polynomial> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    try {
      out.push_back(realqe::parse_polynomial(line));
    } catch (const realqe::SyntaxError& e) {
      throw realqe::SyntaxError(e.what(), lineno, e.column());
    }
  }
  return out;
}

// Dual lines as `a b` pairs, meaning y = a*x - b.
std::vector<realqe::DualLine> read_lines(const std::string& text) {
  std::vector<realqe::DualLine> out;
  for (const auto& p : realqe::parse_points(text)) out.push_back({p.x, p.y});
  return out;
}

int cmd_decide(const RunConfig& cfg) {
  auto f = realqe::parse(slurp(cfg.in));
  bool v = realqe::decide_sentence(f, cfg.qe());
  std::cout << (v ? "TRUE" : "FALSE") << '\n';
  return v ? kOk : kFalse;
}

int cmd_eliminate(const RunConfig& cfg) {
  auto f = realqe::parse(slurp(cfg.in));
  std::cout << realqe::print(realqe::eliminate_all(f, cfg.qe())) << '\n';
  return kOk;
}

int cmd_table(const RunConfig& cfg) {
  auto polys = read_polys(slurp(cfg.in));
  auto res = realqe::build_sign_table(polys, cfg.budget_rows);
  realqe::SignTable t = cfg.full_table ? res.table : realqe::restrict_table(res.table, res.input_rows);
  std::cout << (cfg.machine() ? realqe::format_table_machine(t) : realqe::format_table_human(t));
  return kOk;
}

int cmd_components(const RunConfig& cfg) {
  auto f = realqe::parse(slurp(cfg.in));
  std::size_t n = realqe::count_components(f, cfg.budget_monomials);
  if (cfg.machine()) {
    std::cout << n << '\n';
  } else {
    std::cout << n << (n == 1 ? " component" : " components") << '\n';
  }
  return kOk;
}

realqe::TseitinOptions tseitin(const RunConfig& cfg) {
  realqe::TseitinOptions o;
  o.peephole = !cfg.no_peephole;
  o.max_monomials = cfg.budget_monomials;
  return o;
}

int cmd_reduce_feasible(const RunConfig& cfg) {
  auto inst = realqe::to_feasible(realqe::parse(slurp(cfg.in)), tseitin(cfg));
  std::cout << realqe::print(inst.as_formula()) << '\n';
  if (!cfg.machine()) std::cerr << "variables: " << inst.vars.size() << ", length: " << inst.length() << '\n';
  return kOk;
}

int cmd_reduce_strict(const RunConfig& cfg) {
  auto inst = realqe::to_feasible(realqe::parse(slurp(cfg.in)), tseitin(cfg));
  std::size_t k = cfg.k != 0 ? cfg.k : realqe::default_strict_k(inst.length(), cfg.c);
  std::size_t l = cfg.l != 0 ? cfg.l : realqe::default_strict_l(inst.length(), cfg.c1);
  auto st = realqe::to_strictineq(inst, k, l, cfg.budget_monomials);
  std::cout << realqe::print(st.as_formula()) << '\n';
  if (!cfg.machine()) std::cerr << "k = " << k << ", l = " << l << ", inequalities: " << st.polys.size() << '\n';
  return kOk;
}

int cmd_encode_seg(const RunConfig& cfg) {
  auto g = realqe::Graph::parse(slurp(cfg.graph.empty() ? cfg.in : cfg.graph));
  std::cout << realqe::print(realqe::encode_seg(g)) << '\n';
  return kOk;
}

int cmd_order_type(const RunConfig& cfg) {
  const std::string text = slurp(cfg.in);
  if (cfg.to_arrangement) {
    auto t = realqe::CombinatorialOrderType::parse(text);
    std::cout << realqe::order_type_to_arrangement(t).to_string();
    return kOk;
  }
  auto t = realqe::order_type(realqe::parse_points(text));
  if (cfg.machine()) {
    std::cout << t.to_string();
  } else {
    const std::size_t n = t.size();
    for (std::size_t i = 1; i <= n; ++i) {
      for (std::size_t j = i + 1; j <= n; ++j) {
        for (std::size_t k = j + 1; k <= n; ++k) {
          std::cout << '(' << i << ',' << j << ',' << k << ") " << realqe::sign_char(t.sign(i, j, k)) << '\n';
        }
      }
    }
    std::cout << (t.simple() ? "simple" : "not simple") << '\n';
  }
  return kOk;
}

int cmd_arrangement(const RunConfig& cfg) {
  const std::string text = slurp(cfg.in);
  std::vector<realqe::DualLine> lines;
  if (cfg.from_points) {
    for (const auto& p : realqe::parse_points(text)) lines.push_back(realqe::dualize(p));
  } else {
    lines = read_lines(text);
  }
  auto d = realqe::arrangement_description(lines);
  std::cout << d.to_string();
  if (!cfg.machine()) {
    auto report = realqe::check_description_consistency(d);
    if (report.empty()) std::cerr << "consistent\n";
    for (const auto& r : report) std::cerr << r << '\n';
  }
  return kOk;
}

int cmd_cross_ratio(const RunConfig& cfg) {
  auto pts = realqe::parse_points(slurp(cfg.in));
  if (pts.size() != 4) throw realqe::DomainError("cross-ratio expects exactly four points");
  std::cout << realqe::to_string(realqe::cross_ratio(pts[0], pts[1], pts[2], pts[3])) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact decision and quantifier elimination over the reals"};
  app.set_version_flag("--version", std::string("realqe ") + realqe::kVersion);
  app.set_config("--config", "", "Read `key = value` defaults from a file; flags override it");
  app.require_subcommand(1);
  app.fallthrough();

  RunConfig cfg;
  if (const char* env = std::getenv("REALQE_BUDGET_NODES")) {
    try {
      cfg.budget_nodes = std::stoull(env);
    } catch (const std::exception&) {
      std::cerr << "error: REALQE_BUDGET_NODES is not a number\n";
      return kInput;
    }
  }
  app.add_option("--in", cfg.in, "Input file (default: stdin)");
  app.add_option("--budget-nodes", cfg.budget_nodes, "Branch-node cap (env REALQE_BUDGET_NODES)")->check(CLI::PositiveNumber);
  app.add_option("--budget-monomials", cfg.budget_monomials, "Monomial-count cap for expansions")->check(CLI::PositiveNumber);
  app.add_option("--budget-rows", cfg.budget_rows, "Row cap for a single sign table")->check(CLI::PositiveNumber);
  app.add_option("--seed", cfg.seed, "Seed for randomized steps");
  app.add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"human", "machine"}));
  app.add_option("--threads", cfg.threads, "Worker threads for branch exploration")->check(CLI::PositiveNumber);
  app.add_flag("--no-peephole", cfg.no_peephole, "Keep the full truth-variable scaffolding in reduce");

  auto* decide = app.add_subcommand("decide", "Decide a sentence; prints TRUE or FALSE");
  auto* eliminate = app.add_subcommand("eliminate", "Eliminate all quantifiers");
  auto* table = app.add_subcommand("table", "Sign table of univariate polynomials, one per line");
  table->add_flag("--full", cfg.full_table, "Include every closure row");
  auto* components = app.add_subcommand("components", "Connected components of a univariate semialgebraic set");

  auto* reduce = app.add_subcommand("reduce", "Reductions between existential problems");
  reduce->require_subcommand(1);
  auto* feasible = reduce->add_subcommand("feasible", "Existential formula to one polynomial equation");
  auto* strict = reduce->add_subcommand("strict", "Existential formula to strict inequalities");
  strict->add_option("--k", cfg.k, "Length of the Y chain (default from C)");
  strict->add_option("--l", cfg.l, "Length of the Z chain (default from C1)");
  strict->add_option("--C", cfg.c, "Constant in k = ceil(C L log2 L)")->check(CLI::PositiveNumber);
  strict->add_option("--C1", cfg.c1, "Constant in l = ceil(C1 L (log2 L)^2)")->check(CLI::PositiveNumber);

  auto* encode = app.add_subcommand("encode", "Encode combinatorial problems as sentences");
  encode->require_subcommand(1);
  auto* seg = encode->add_subcommand("seg", "Segment intersection graph representability");
  seg->add_option("--graph", cfg.graph, "Graph file: `n m` then m lines `i j`");

  auto* otype = app.add_subcommand("order-type", "Order type of a point sequence");
  otype->add_flag("--to-arrangement", cfg.to_arrangement, "Read an order type and print the dual arrangement description");
  auto* arrangement = app.add_subcommand("arrangement", "Arrangement description of lines `a b` (y = a x - b)");
  arrangement->add_flag("--from-points", cfg.from_points, "Read points and use their dual lines");
  auto* cross = app.add_subcommand("cross-ratio", "Cross-ratio (a,b;c,d) of four collinear points");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kInput;
  }

  try {
    if (decide->parsed()) return cmd_decide(cfg);
    if (eliminate->parsed()) return cmd_eliminate(cfg);
    if (table->parsed()) return cmd_table(cfg);
    if (components->parsed()) return cmd_components(cfg);
    if (feasible->parsed()) return cmd_reduce_feasible(cfg);
    if (strict->parsed()) return cmd_reduce_strict(cfg);
    if (seg->parsed()) return cmd_encode_seg(cfg);
    if (otype->parsed()) return cmd_order_type(cfg);
    if (arrangement->parsed()) return cmd_arrangement(cfg);
    if (cross->parsed()) return cmd_cross_ratio(cfg);
  } catch (const realqe::BudgetExceeded& e) {
    std::cerr << "budget exceeded: " << e.what() << '\n';
    return kBudget;
  } catch (const realqe::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInput;
  }
  return kInput;
}
