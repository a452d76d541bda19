#pragma once

#include <chrono>
#include <cmath>
#include <string>
#include <vector>

#include "thermoform/classify.hpp"
#include "thermoform/io.hpp"
#include "thermoform/kusuoka.hpp"
#include "thermoform/pressure.hpp"
#include "thermoform/structure.hpp"

// JSON views of library results and the run-report envelope.
namespace thermoform::report {

using Json = nlohmann::ordered_json;

#ifdef THERMOFORM_VERSION
inline constexpr const char* kVersion = THERMOFORM_VERSION;
#else
inline constexpr const char* kVersion = "0.1.0";
#endif

/// Finite doubles as numbers; ±inf and NaN as strings.
inline Json number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

inline Json optional_number(const std::optional<double>& x) { return x ? number(*x) : Json(nullptr); }

inline Json scalar(const Rational& q) { return q.str(); }
inline Json scalar(double x) { return number(x); }

template <Scalar T>
Json matrix(const Matrix<T>& m) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(scalar(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

template <Scalar T>
Json vector(const Vector<T>& v) {
  Json out = Json::array();
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(scalar(v[i]));
  return out;
}

inline Json word(const Word& w) { return Json(w.symbols); }

inline Json optional_word(const std::optional<Word>& w) { return w ? word(*w) : Json(nullptr); }

template <Scalar T>
Json subspace(const Subspace<T>& s) {
  Json b = Json::array();
  for (const auto& v : s.basis()) b.push_back(vector(v));
  return {{"dim", s.dim()}, {"ambient", s.ambient()}, {"basis", b}};
}

/// Reads a subspace written by `subspace`.
template <Scalar T>
Subspace<T> subspace_from_json(const Json& j) {
  const auto d = j.at("ambient").get<std::size_t>();
  std::vector<Vector<T>> vs;
  for (const auto& row : j.at("basis")) {
    Vector<T> v(d);
    for (std::size_t i = 0; i < d; ++i) {
      if constexpr (is_exact_v<T>)
        v[i] = parse_rational(row.at(i).template get<std::string>());
      else
        v[i] = row.at(i).template get<double>();
    }
    vs.push_back(std::move(v));
  }
  return Subspace<T>::span(vs, d);
}

inline Word word_from_json(const Json& j) { return Word(j.get<std::vector<int>>()); }

inline Json budget(const Budget& b) {
  return {{"max_products", b.max_products}, {"max_kron_dim", b.max_kron_dim}, {"max_pool", b.max_pool}};
}

inline Json search_budget(const SearchBudget& b) {
  return {{"product_length", b.product_length},
          {"random_vectors", b.random_vectors},
          {"seed", b.seed},
          {"max_pool", b.max_pool},
          {"max_union", b.max_union}};
}

// ---------------------------------------------------------------------------
// structure

template <Scalar T>
Json irreducibility(const IrreducibilityVerdict<T>& v) {
  Json j;
  j["verdict"] = v.reducible() ? "ReducibleWitness" : "NoWitnessFound";
  j["witness"] = v.witness ? subspace(*v.witness) : Json(nullptr);
  j["source"] = v.source;
  j["dual"] = v.dual;
  j["candidates_tried"] = v.candidates_tried;
  j["search_budget"] = search_budget(v.budget);
  return j;
}

template <Scalar T>
Json block_form(const BlockForm<T>& b) {
  Json blocks = Json::array();
  for (const auto& t : b.blocks) {
    Json ms = Json::array();
    for (const auto& m : t) ms.push_back(matrix(m));
    blocks.push_back(std::move(ms));
  }
  return {{"block_sizes", b.block_sizes()}, {"basis_change", matrix(b.basis_change)}, {"blocks", blocks}};
}

template <Scalar T>
Json strong_irreducibility(const StrongIrreducibilityVerdict<T>& v) {
  Json j;
  j["verdict"] = v.found() ? "FiniteInvariantUnion" : "NoWitnessFound";
  Json members = Json::array();
  if (v.invariant_union)
    for (const auto& s : *v.invariant_union) members.push_back(subspace(s));
  j["invariant_union"] = v.found() ? members : Json(nullptr);
  j["seed"] = v.seed;
  return j;
}

template <Scalar T>
Json mixing_obstruction(const std::optional<MixingObstruction<T>>& m) {
  if (!m) return {{"verdict", "None"}};
  return {{"verdict", "Obstruction"}, {"n", m->n}, {"witness", subspace(m->witness)}};
}

// ---------------------------------------------------------------------------
// pressure

inline Json pressure_bracket(const PressureBracket& b) {
  Json j;
  j["s"] = b.s;
  j["N"] = b.N;
  j["upper"] = number(b.upper);
  j["periodic_lower"] = number(b.periodic_lower);
  j["periodic_word"] = word(b.periodic_word);
  j["exact"] = optional_number(b.exact);
  j["exact_method"] = b.exact ? Json(b.exact_method) : Json(nullptr);
  j["status"] = b.exact ? "exact (even s)" : "bracket";
  j["width"] = number(b.width());
  return j;
}

inline CsvTable pressure_series_csv(const PressureBracket& b) {
  CsvTable c({"n", "upper", "periodic_lower", "spectral_diagnostic"});
  for (const auto& p : b.series)
    c.add({std::to_string(p.n), format_double(p.upper), format_double(p.periodic_lower), format_double(p.spectral)});
  return c;
}

inline Json radius_bracket(const RadiusBracket& r, const std::string& p) {
  Json j;
  j["p"] = p;
  j["N"] = r.N;
  j["lower"] = number(r.lower);
  j["upper"] = number(r.upper);
  j["exact"] = optional_number(r.exact);
  return j;
}

inline CsvTable radius_series_csv(const RadiusBracket& r) {
  CsvTable c({"n", "upper", "periodic_lower", "spectral_diagnostic"});
  for (const auto& p : r.series)
    c.add({std::to_string(p.n), format_double(p.upper), format_double(p.lower), format_double(p.spectral)});
  return c;
}

// ---------------------------------------------------------------------------
// kusuoka

template <Scalar T>
Json kusuoka(const KusuokaData<T>& kd) {
  Json j;
  j["lambda"] = kd.lambda;
  j["lambda_hat"] = kd.lambda_hat;
  j["pressure"] = kd.pressure;
  j["Q"] = matrix(kd.Q);
  j["Qhat"] = matrix(kd.Qhat);
  j["U"] = matrix(kd.U);
  j["Uhat"] = matrix(kd.Uhat);
  j["residual"] = kd.residual;
  j["residual_hat"] = kd.residual_hat;
  j["trace_QQhat"] = kd.trace_QQhat;
  j["min_eig_Q"] = min_eigenvalue_symmetric(kd.Q);
  j["min_eig_Qhat"] = min_eigenvalue_symmetric(kd.Qhat);
  return j;
}

inline Json consistency(const ConsistencyReport& c) {
  return {{"left", c.left}, {"right", c.right}, {"mass", c.mass}, {"max", c.max()}};
}

inline Json gibbs(const GibbsCheck& g) {
  return {{"ok", g.ok()},
          {"c_lower", g.constants.lower},
          {"c_upper", g.constants.upper},
          {"min_ratio", number(g.min_ratio)},
          {"max_ratio", number(g.max_ratio)},
          {"words", g.words},
          {"violation", optional_word(g.violation)}};
}

inline CsvTable entropy_series_csv(const std::vector<EntropyPoint>& e, const LyapunovSeries& ly) {
  CsvTable c({"n", "shannon", "conditional", "variational", "lyapunov", "lyapunov_raw"});
  for (std::size_t k = 0; k < e.size(); ++k)
    c.add({std::to_string(e[k].n), format_double(e[k].shannon), format_double(e[k].conditional),
           format_double(e[k].variational), format_double(e[k].lyapunov), format_double(ly.raw[k])});
  return c;
}

template <Scalar T>
CsvTable cylinder_csv(const KusuokaData<T>& kd, std::size_t n_max, const Budget& b) {
  CsvTable c({"word", "length", "measure", "zero_product"});
  std::vector<std::vector<std::string>> rows;
  for_each_cylinder(
      kd, n_max,
      [&](const CylinderVisit<T>& v) {
        std::string w;
        for (int s : v.word.symbols) w += (w.empty() ? "" : " ") + std::to_string(s);
        rows.push_back({w, std::to_string(v.word.size()), format_double(v.measure), v.zero ? "1" : "0"});
      },
      b);
  // shortlex for stable output
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return std::stoul(a[1]) < std::stoul(b[1]);
  });
  for (auto& r : rows) c.add(std::move(r));
  return c;
}

inline Json peripheral(const PeripheralSpectrum& p) {
  Json vals = Json::array();
  for (const auto& z : p.values) vals.push_back({{"re", z.real()}, {"im", z.imag()}});
  return {{"radius", p.radius}, {"values", vals}, {"verdict", p.verdict()}};
}

// ---------------------------------------------------------------------------
// classify

template <Scalar T>
Json periodic_structure(const std::optional<PeriodicStructure<T>>& ps) {
  if (!ps) return {{"verdict", "None"}};
  Json R = Json::array();
  for (const auto& s : ps->R) R.push_back(subspace(s));
  return {{"verdict", "PeriodicStructure"}, {"n", ps->n}, {"r", ps->r}, {"omega", word(ps->omega)}, {"R", R}};
}

inline Json multiplicative(const MultiplicativeVerdict& v) {
  Json j;
  j["verdict"] = v.holds() ? "MultiplicativeUpToL" : "CounterexamplePair";
  j["L"] = v.L;
  j["pairs_tested"] = v.pairs_tested;
  if (v.counterexample) {
    const auto& c = *v.counterexample;
    j["w1"] = word(c.w1);
    j["w2"] = word(c.w2);
    j["rho_product"] = c.rho_product;
    j["rho_w1"] = c.rho_w1;
    j["rho_w2"] = c.rho_w2;
    j["defect"] = c.defect;
  }
  return j;
}

inline Json conformal(const ConformalVerdict& v) {
  Json j;
  j["verdict"] = v.found() ? "Conjugator" : "None";
  j["conjugator"] = v.conjugator ? matrix(*v.conjugator) : Json(nullptr);
  j["reason"] = v.reason;
  j["fixed_space_dim"] = v.fixed_space_dim;
  j["exact_kernel"] = v.exact_kernel;
  j["residual"] = v.residual;
  return j;
}

inline Json s_independence(const SIndependenceVerdict& v) {
  Json j;
  j["verdict"] = v.lambda ? "Lambda" : "None";
  j["lambda"] = optional_number(v.lambda);
  j["N"] = v.N;
  j["violation"] = v.violation ? Json::array({word(v.violation->first), word(v.violation->second)}) : Json(nullptr);
  return j;
}

inline Json maximal_entropy(const MaximalEntropyVerdict& v) {
  return {{"maximal", v.maximal}, {"max_defect", v.max_defect}, {"witness", optional_word(v.witness)}};
}

template <Scalar T>
Json classification(const ClassificationReport<T>& r) {
  Json j;
  auto put = [&](const char* key, const auto& opt, auto&& fn) {
    j[key] = opt ? fn(*opt) : Json(nullptr);
  };
  put("support", r.support, [](const std::optional<Word>& w) -> Json {
    return w ? Json{{"verdict", "ZeroProduct"}, {"word", word(*w)}} : Json{{"verdict", "NoZeroProductFound"}};
  });
  put("irreducibility", r.irreducibility, [](const auto& v) { return irreducibility(v); });
  put("mixing_obstruction", r.mixing_obstruction, [](const auto& v) { return mixing_obstruction(v); });
  put("zero_entropy", r.zero_entropy, [](const auto& v) { return periodic_structure(v); });
  put("bernoulli", r.bernoulli, [](const auto& v) { return multiplicative(v); });
  put("conformal", r.conformal, [](const auto& v) { return conformal(v); });
  put("s_independence", r.s_independence, [](const auto& v) { return s_independence(v); });
  put("maximal_entropy", r.maximal_entropy, [](const auto& v) { return maximal_entropy(v); });
  put("peripheral", r.peripheral, [](const auto& v) { return peripheral(v); });
  Json checks = Json::array();
  for (const auto& c : r.cross_checks) checks.push_back({{"name", c.name}, {"ok", c.ok}, {"detail", c.detail}});
  j["cross_checks"] = checks;
  j["consistent"] = r.consistent();
  Json errs = Json::object();
  for (const auto& [k, v] : r.errors) errs[k] = v;
  j["errors"] = errs;
  return j;
}

// ---------------------------------------------------------------------------
// envelope

inline Json input(const LoadedTuple& lt) {
  return {{"source", lt.source},
          {"digest", lt.digest},
          {"label", lt.label()},
          {"dimension", lt.dim()},
          {"symbols", lt.size()},
          {"scalar_policy", std::string(to_string(lt.policy()))}};
}

struct RunReport {
  std::string operation;
  Json input = Json::object();
  Json parameters = Json::object();
  Json results = Json::object();
  Json witnesses = Json::object();
  Json budgets = Json::object();
  double seconds = 0;

  Json to_json() const {
    return {{"tool", "thermoform"},
            {"version", kVersion},
            {"operation", operation},
            {"input", input},
            {"parameters", parameters},
            {"results", results},
            {"witnesses", witnesses},
            {"budgets", budgets},
            {"timings", {{"wall_seconds", seconds}}}};
  }
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace thermoform::report
