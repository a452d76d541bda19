#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <thread>

#include "CLI11.hpp"

#include "thermoform/acceptance.hpp"
#include "thermoform/report.hpp"

namespace tf = thermoform;
namespace rp = thermoform::report;
namespace fs = std::filesystem;
using rp::Json;

namespace {

enum Exit { kOk = 0, kInput = 2, kNumeric = 3, kBudget = 4, kAcceptance = 5 };

struct Common {
  std::string input;
  std::string builtin;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  std::string out;
  std::string format = "json";
};

struct Params {
  double s = 2.0;
  std::string p = "2";
  std::size_t N = 8;
  std::size_t n_max = 6;
  double tol = 1e-9;
  std::string x = "1";
  std::string y = "1";
};

/// A report plus the CSV tables written next to it.
struct Output {
  rp::RunReport report;
  std::map<std::string, tf::CsvTable> tables;  // file name -> table
  std::string primary_table;
};

tf::LoadedTuple load(const Common& c) {
  if (c.input.empty() == c.builtin.empty()) throw tf::InvalidInput("give exactly one of --input PATH or --builtin NAME");
  return c.input.empty() ? tf::load_builtin(c.builtin) : tf::load_tuple_file(c.input);
}

tf::Word parse_word(const std::string& text, std::size_t M) {
  std::vector<int> syms;
  const bool separated = text.find_first_of(", ") != std::string::npos;
  if (separated || M > 9) {
    std::string tok;
    auto flush = [&] {
      if (tok.empty()) return;
      try {
        syms.push_back(std::stoi(tok));
      } catch (const std::exception&) {
        throw tf::InvalidInput("malformed word '" + text + "'");
      }
      tok.clear();
    };
    for (char ch : text) {
      if (ch == ',' || ch == ' ')
        flush();
      else
        tok += ch;
    }
    flush();
  } else {
    for (char ch : text) {
      if (ch < '0' || ch > '9') throw tf::InvalidInput("malformed word '" + text + "'");
      syms.push_back(ch - '0');
    }
  }
  if (syms.empty()) throw tf::InvalidInput("empty word");
  for (int s : syms)
    if (s < 1 || s > static_cast<int>(M))
      throw tf::InvalidInput("symbol " + std::to_string(s) + " outside 1.." + std::to_string(M));
  return tf::Word(syms);
}

rp::RunReport envelope(const std::string& op, const tf::LoadedTuple& lt, const tf::Budget& b) {
  rp::RunReport r;
  r.operation = op;
  r.input = rp::input(lt);
  r.budgets = rp::budget(b);
  return r;
}

// ---------------------------------------------------------------------------
// operations

Output op_inspect(const tf::LoadedTuple& lt, const Params& p, const tf::Budget& budget) {
  rp::Stopwatch sw;
  Output o{envelope("inspect", lt, budget), {}, {}};
  std::visit(
      [&](const auto& t) {
        auto& res = o.report.results;
        auto& wit = o.report.witnesses;
        tf::SearchBudget sb;
        const auto irr = tf::find_invariant_subspace(t, sb);
        res["irreducibility"] = rp::irreducibility(irr);
        if (irr.witness) wit["invariant_subspace"] = rp::subspace(*irr.witness);
        res["block_form"] = rp::block_form(tf::block_triangularize(t, sb));
        if (!irr.reducible()) {
          const auto strong = tf::strong_irreducibility_scan(t, sb);
          res["strong_irreducibility"] = rp::strong_irreducibility(strong);
          if (strong.invariant_union) wit["invariant_union"] = rp::strong_irreducibility(strong)["invariant_union"];
        }
        const auto zero = tf::zero_product_search(t, p.N, budget);
        res["support"] = zero ? Json{{"verdict", "ZeroProduct"}, {"word", rp::word(*zero)}, {"length", zero->size()}}
                              : Json{{"verdict", "NoZeroProductFound"}, {"N", p.N}};
        if (zero) wit["zero_product"] = rp::word(*zero);
        o.report.parameters = {{"N", p.N}, {"search_budget", rp::search_budget(sb)}};
      },
      lt.tuple);
  o.report.seconds = sw.seconds();
  return o;
}

Output op_pressure(const tf::LoadedTuple& lt, const Params& p, const tf::Budget& budget, unsigned threads) {
  rp::Stopwatch sw;
  Output o{envelope("pressure", lt, budget), {}, "series.csv"};
  tf::EnumerationOptions opt;
  opt.threads = threads;
  opt.budget = budget;
  const auto b = std::visit([&](const auto& t) { return tf::pressure_bracket(t, p.s, p.N, opt); }, lt.tuple);
  o.report.parameters = {{"s", p.s}, {"N", p.N}, {"threads", threads}};
  o.report.results = rp::pressure_bracket(b);
  o.report.witnesses["periodic_word"] = rp::word(b.periodic_word);
  o.tables.emplace("series.csv", rp::pressure_series_csv(b));
  o.report.seconds = sw.seconds();
  return o;
}

Output op_radius(const tf::LoadedTuple& lt, const Params& p, const tf::Budget& budget, unsigned threads) {
  rp::Stopwatch sw;
  Output o{envelope("radius", lt, budget), {}, "series.csv"};
  tf::EnumerationOptions opt;
  opt.threads = threads;
  opt.budget = budget;
  const bool inf = p.p == "inf" || p.p == "infinity";
  double pv = 0;
  if (!inf) {
    try {
      std::size_t used = 0;
      pv = std::stod(p.p, &used);
      if (used != p.p.size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw tf::InvalidInput("--p must be a positive number or 'inf'");
    }
    if (!(pv > 0)) throw tf::InvalidInput("--p must be positive");
  }
  const auto r = std::visit(
      [&](const auto& t) { return inf ? tf::jsr_bracket(t, p.N, opt) : tf::p_radius(t, pv, p.N, opt); }, lt.tuple);
  o.report.parameters = {{"p", p.p}, {"N", p.N}, {"threads", threads}};
  o.report.results = rp::radius_bracket(r, p.p);
  o.tables.emplace("series.csv", rp::radius_series_csv(r));
  o.report.seconds = sw.seconds();
  return o;
}

Output op_kusuoka(const tf::LoadedTuple& lt, const Params& p, const tf::Budget& budget) {
  rp::Stopwatch sw;
  Output o{envelope("kusuoka", lt, budget), {}, "series.csv"};
  std::visit(
      [&](const auto& t) {
        const auto kd = tf::kusuoka_measure(t);
        auto& res = o.report.results;
        res["kusuoka"] = rp::kusuoka(kd);
        res["consistency"] = rp::consistency(tf::consistency_check(kd, p.n_max, budget));
        const auto g = tf::gibbs_verify(kd, p.n_max, budget);
        res["gibbs"] = rp::gibbs(g);
        if (g.violation) o.report.witnesses["gibbs_violation"] = rp::word(*g.violation);
        const auto sums = tf::cylinder_sums(kd, p.n_max, false, budget);
        const auto ent = tf::entropy_from_sums(sums, kd.pressure);
        const auto ly = tf::lyapunov_from_sums(sums);
        res["entropy"] = {{"n", ent.back().n},
                          {"shannon", ent.back().shannon},
                          {"conditional", ent.back().conditional},
                          {"variational", ent.back().variational},
                          {"lyapunov", ent.back().lyapunov}};
        Json len1 = Json::object();
        for (int i = 1; i <= static_cast<int>(t.size()); ++i)
          len1[std::to_string(i)] = tf::cylinder_measure(kd, tf::Word{i});
        res["cylinders_length_1"] = len1;
        o.tables.emplace("series.csv", rp::entropy_series_csv(ent, ly));
        o.tables.emplace("cylinders.csv", rp::cylinder_csv(kd, p.n_max, budget));
      },
      lt.tuple);
  o.report.parameters = {{"n_max", p.n_max}};
  o.report.seconds = sw.seconds();
  return o;
}

Output op_classify(const tf::LoadedTuple& lt, const Params& p, const tf::Budget& budget) {
  rp::Stopwatch sw;
  Output o{envelope("classify", lt, budget), {}, {}};
  tf::ClassificationOptions opt;
  opt.support_N = p.N;
  opt.n_max = p.n_max;
  opt.tol = p.tol;
  opt.budget = budget;
  std::visit(
      [&](const auto& t) {
        const auto r = tf::classification_report(t, opt);
        o.report.results = rp::classification(r);
        auto& wit = o.report.witnesses;
        const auto& res = o.report.results;
        if (res["irreducibility"].is_object() && !res["irreducibility"]["witness"].is_null())
          wit["invariant_subspace"] = res["irreducibility"]["witness"];
        if (r.bernoulli && r.bernoulli->counterexample)
          wit["counterexample_pair"] = Json::array(
              {rp::word(r.bernoulli->counterexample->w1), rp::word(r.bernoulli->counterexample->w2)});
        if (r.conformal && r.conformal->conjugator) wit["conjugator"] = rp::matrix(*r.conformal->conjugator);
        if (r.zero_entropy && *r.zero_entropy) wit["periodic_structure"] = res["zero_entropy"];
        if (r.mixing_obstruction && *r.mixing_obstruction) wit["mixing_obstruction"] = res["mixing_obstruction"];
      },
      lt.tuple);
  o.report.parameters = {{"support_N", opt.support_N},   {"mixing_N", opt.mixing_N},
                         {"bernoulli_L", opt.bernoulli_L}, {"s_independence_N", opt.s_independence_N},
                         {"n_max", opt.n_max},           {"tol", opt.tol}};
  o.report.seconds = sw.seconds();
  return o;
}

Output op_correlate(const tf::LoadedTuple& lt, const Params& p, const tf::Budget& budget) {
  rp::Stopwatch sw;
  Output o{envelope("correlate", lt, budget), {}, "series.csv"};
  const tf::Word x = parse_word(p.x, lt.size());
  const tf::Word y = parse_word(p.y, lt.size());
  if (p.n_max < x.size()) throw tf::InvalidInput("--n-max must be at least |x|");
  std::visit(
      [&](const auto& t) {
        const auto kd = tf::kusuoka_measure(t);
        const double mx = tf::cylinder_measure(kd, x), my = tf::cylinder_measure(kd, y);
        tf::CsvTable csv({"n", "correlation", "product", "gap", "cesaro"});
        double sum = 0, max_gap = 0;
        std::size_t count = 0;
        for (std::size_t n = x.size(); n <= p.n_max; ++n) {
          const double c = tf::correlation(kd, x, y, n);
          sum += c;
          ++count;
          max_gap = std::max(max_gap, std::fabs(c - mx * my));
          csv.add({std::to_string(n), tf::format_double(c), tf::format_double(mx * my), tf::format_double(c - mx * my),
                   tf::format_double(sum / static_cast<double>(count))});
        }
        o.report.results = {{"mu_x", mx},
                            {"mu_y", my},
                            {"product", mx * my},
                            {"cesaro_average", sum / static_cast<double>(count)},
                            {"max_gap", max_gap}};
        o.tables.emplace("series.csv", std::move(csv));
      },
      lt.tuple);
  o.report.parameters = {{"x", rp::word(x)}, {"y", rp::word(y)}, {"n_max", p.n_max}};
  o.report.seconds = sw.seconds();
  return o;
}

// ---------------------------------------------------------------------------
// output

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw tf::InvalidInput("cannot write '" + path.string() + "'");
  f << text;
}

void write_bundle(const Output& o, const fs::path& dir) {
  fs::create_directories(dir);
  write_file(dir / "report.json", o.report.to_json().dump(2) + "\n");
  for (const auto& [name, table] : o.tables) write_file(dir / name, table.str());
}

void emit(const Output& o, const Common& c) {
  if (c.format == "csv" && !o.primary_table.empty())
    std::cout << o.tables.at(o.primary_table).str();
  else
    std::cout << o.report.to_json().dump(2) << "\n";
  if (!c.out.empty()) write_bundle(o, c.out);
}

std::string slug(const std::string& label) {
  std::string s;
  for (char ch : label) {
    const bool keep = std::isalnum(static_cast<unsigned char>(ch)) != 0;
    if (keep)
      s += ch;
    else if (!s.empty() && s.back() != '_')
      s += '_';
  }
  while (!s.empty() && s.back() == '_') s.pop_back();
  return s;
}

int reproduce(const Common& c, const tf::Budget& budget) {
  const fs::path root = c.out.empty() ? fs::path("reproduce-bundle") : fs::path(c.out);
  Json index = Json::array();
  for (const auto& t : tf::builtins::reproduction_set()) {
    const auto lt = tf::load_builtin(t.label());
    const fs::path dir = root / slug(t.label());
    Params p;
    p.N = 8;
    p.n_max = 6;
    Json entry = {{"builtin", t.label()}, {"directory", slug(t.label())}, {"digest", lt.digest}};
    auto run = [&](const std::string& name, auto&& fn) {
      try {
        write_bundle(fn(), dir / name);
        entry[name] = "ok";
      } catch (const std::exception& e) {
        entry[name] = std::string("error: ") + e.what();
      }
    };
    run("inspect", [&] { return op_inspect(lt, p, budget); });
    run("pressure", [&] { return op_pressure(lt, p, budget, c.threads); });
    run("kusuoka", [&] { return op_kusuoka(lt, p, budget); });
    run("classify", [&] { return op_classify(lt, p, budget); });
    Params pc = p;
    pc.n_max = 20;
    run("correlate", [&] { return op_correlate(lt, pc, budget); });
    index.push_back(std::move(entry));
  }

  tf::CsvTable summary({"criterion", "title", "status", "seconds", "detail"});
  Json crit = Json::array();
  std::vector<std::string> failing;
  std::cout << "thermoform reproduce: bundle in " << root.string() << "\n";
  for (const auto& cr : tf::acceptance::criteria()) {
    const auto r = tf::acceptance::run(cr);
    std::cout << tf::acceptance::format_line(r) << "\n";
    summary.add({std::to_string(r.id), r.title, r.pass ? "PASS" : "FAIL", tf::format_double(r.seconds), r.detail});
    crit.push_back({{"criterion", r.id}, {"title", r.title}, {"pass", r.pass}, {"detail", r.detail}});
    if (!r.pass) failing.push_back(std::to_string(r.id) + " (" + r.title + ")");
  }
  fs::create_directories(root);
  write_file(root / "summary.csv", summary.str());
  write_file(root / "summary.json",
             Json{{"tool", "thermoform"}, {"version", rp::kVersion}, {"builtins", index}, {"criteria", crit}}.dump(2) +
                 "\n");
  if (failing.empty()) return kOk;
  for (const auto& f : failing) std::cerr << "acceptance failure: criterion " << f << "\n";
  return kAcceptance;
}

std::string builtin_help() {
  std::string s = "Built-in tuples (use --builtin NAME or builtin:NAME):";
  for (const auto& n : tf::builtins::names()) s += "\n  " + n;
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"thermoform: pressure, Kusuoka measures and classification checks for matrix tuples"};
  app.footer(builtin_help() + "\n\nExit codes: 0 ok, 2 input error, 3 numeric failure, 4 budget exceeded, "
                              "5 acceptance failure.\nTHERMOFORM_BUDGET_CAP overrides the word-product cap.");
  app.require_subcommand(1);
  app.set_version_flag("--version", rp::kVersion);

  Common common;
  Params params;
  auto add_common = [&](CLI::App* sub) {
    auto* in = sub->add_option("--input", common.input, "tuple file (JSON)");
    auto* bi = sub->add_option("--builtin", common.builtin, "built-in tuple name");
    in->excludes(bi);
    sub->add_option("--threads", common.threads, "worker cap")->check(CLI::PositiveNumber);
    sub->add_option("--out", common.out, "directory for report.json and CSV files");
    sub->add_option("--format", common.format, "stdout format")->check(CLI::IsMember({"json", "csv"}));
  };

  auto* inspect = app.add_subcommand("inspect", "irreducibility evidence, block form, zero products");
  add_common(inspect);
  inspect->add_option("--N", params.N, "zero-product search length");

  auto* pressure = app.add_subcommand("pressure", "pressure bracket P(A,s)");
  add_common(pressure);
  pressure->add_option("--s", params.s, "exponent s > 0");
  pressure->add_option("--N", params.N, "maximal word length");

  auto* radius = app.add_subcommand("radius", "p-radius or joint spectral radius bracket");
  add_common(radius);
  radius->add_option("--p", params.p, "p > 0 or inf");
  radius->add_option("--N", params.N, "maximal word length");

  auto* kusuoka = app.add_subcommand("kusuoka", "Kusuoka measure, cylinders, Gibbs check, entropy series");
  add_common(kusuoka);
  kusuoka->add_option("--n-max", params.n_max, "maximal cylinder length");

  auto* classify = app.add_subcommand("classify", "all classification checks with cross-checks");
  add_common(classify);
  classify->add_option("--N", params.N, "zero-product search length");
  classify->add_option("--n-max", params.n_max, "maximal cylinder length");
  classify->add_option("--tol", params.tol, "tolerance");

  auto* correlate = app.add_subcommand("correlate", "correlation series mu([x] ∩ σ^-n[y])");
  add_common(correlate);
  correlate->add_option("--x", params.x, "first word, e.g. 1 or 1,2");
  correlate->add_option("--y", params.y, "second word");
  std::size_t corr_n_max = 20;
  correlate->add_option("--n-max", corr_n_max, "largest shift");

  auto* repro = app.add_subcommand("reproduce", "regenerate the built-in bundle and run the acceptance criteria");
  repro->add_option("--out", common.out, "bundle directory (default reproduce-bundle)");
  repro->add_option("--threads", common.threads, "worker cap")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInput;
  }

  try {
    const tf::Budget budget = tf::Budget::from_environment();
    if (repro->parsed()) return reproduce(common, budget);
    const auto lt = load(common);
    Output o;
    if (inspect->parsed()) o = op_inspect(lt, params, budget);
    if (pressure->parsed()) o = op_pressure(lt, params, budget, common.threads);
    if (radius->parsed()) o = op_radius(lt, params, budget, common.threads);
    if (kusuoka->parsed()) o = op_kusuoka(lt, params, budget);
    if (classify->parsed()) o = op_classify(lt, params, budget);
    if (correlate->parsed()) {
      params.n_max = corr_n_max;
      o = op_correlate(lt, params, budget);
    }
    emit(o, common);
    return kOk;
  } catch (const tf::InvalidInput& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInput;
  } catch (const tf::BudgetExceeded& e) {
    std::cerr << "budget exceeded: " << e.what() << "\n";
    return kBudget;
  } catch (const tf::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumeric;
  }
}
