#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "thermoform/tuple.hpp"

// Named example tuples. The names are stable identifiers used by the CLI as
// builtin:<name>.
namespace thermoform::builtins {

using Q = Rational;
using RM = Matrix<Rational>;

/// A_1 = [[0,2],[1,0]], A_2 = [[0,1],[2,0]]: irreducible, but the length-2
/// products are all diagonal, so the s-equilibrium state is not σ²-ergodic.
inline MatrixTuple<Rational> notmix2() {
  return MatrixTuple<Rational>({RM{{Q(0), Q(2)}, {Q(1), Q(0)}}, RM{{Q(0), Q(1)}, {Q(2), Q(0)}}}, "notmix2");
}

/// Pair of nilpotents whose equilibrium state sits on the period-2 orbit.
inline MatrixTuple<Rational> nilpotent2() {
  return MatrixTuple<Rational>({RM{{Q(0), Q(1)}, {Q(0), Q(0)}}, RM{{Q(0), Q(0)}, {Q(1), Q(0)}}}, "nilpotent2");
}

/// A_1 = [[0,α2],[α1,0]], A_2 = [[0,α1],[α2,0]]; with α1²+α2² = 1 both
/// transfer operators fix the identity.
inline MatrixTuple<Rational> alpha(const Rational& a1, const Rational& a2) {
  return MatrixTuple<Rational>({RM{{Q(0), a2}, {a1, Q(0)}}, RM{{Q(0), a1}, {a2, Q(0)}}},
                               "alpha(" + a1.str() + "," + a2.str() + ")");
}

/// Four rank-one matrices generating {±A_i}, a semigroup in which every
/// element has spectral radius 1.
inline MatrixTuple<Rational> rankone4() {
  return MatrixTuple<Rational>({RM{{Q(1), Q(1)}, {Q(0), Q(0)}},
                                RM{{Q(1), Q(-1)}, {Q(0), Q(0)}},
                                RM{{Q(0), Q(0)}, {Q(1), Q(1)}},
                                RM{{Q(0), Q(0)}, {Q(-1), Q(1)}}},
                               "rankone4");
}

/// A_1 = [[0,2],[1,0]], A_2 = [[ε,1],[2,0]]; ε = 0 recovers notmix2.
inline MatrixTuple<Rational> eps(const Rational& e) {
  return MatrixTuple<Rational>({RM{{Q(0), Q(2)}, {Q(1), Q(0)}}, RM{{e, Q(1)}, {Q(2), Q(0)}}},
                               "eps(" + e.str() + ")");
}

/// Reducible pair {diag(1,2), diag(3,1)}.
inline MatrixTuple<Rational> diagpair() {
  return MatrixTuple<Rational>({RM{{Q(1), Q(0)}, {Q(0), Q(2)}}, RM{{Q(3), Q(0)}, {Q(0), Q(1)}}}, "diagpair");
}

/// Names accepted by `by_name`, for --help.
inline std::vector<std::string> names() {
  return {"notmix2", "nilpotent2", "alpha(a1,a2)", "rankone4", "eps(e)", "diagpair"};
}

/// The built-ins used by the reproduction bundle.
inline std::vector<MatrixTuple<Rational>> reproduction_set() {
  return {notmix2(), nilpotent2(), alpha(Q(3, 5), Q(4, 5)), rankone4(), eps(Q(0)), eps(Q(1, 4)), eps(Q(1))};
}

namespace detail {

inline std::vector<Rational> parse_args(std::string_view name, std::string_view head, std::size_t arity) {
  std::vector<Rational> out;
  if (name.size() == head.size()) return out;
  if (name[head.size()] != '(' || name.back() != ')')
    throw InvalidInput("malformed builtin '" + std::string(name) + "'");
  std::string_view body = name.substr(head.size() + 1, name.size() - head.size() - 2);
  while (true) {
    const auto comma = body.find(',');
    try {
      out.push_back(parse_rational(body.substr(0, comma)));
    } catch (const std::invalid_argument& e) {
      throw InvalidInput("builtin '" + std::string(name) + "': " + e.what());
    }
    if (comma == std::string_view::npos) break;
    body.remove_prefix(comma + 1);
  }
  if (out.size() != arity)
    throw InvalidInput("builtin '" + std::string(head) + "' takes " + std::to_string(arity) + " argument(s)");
  return out;
}

}  // namespace detail

/// Resolve "notmix2", "alpha(3/5,4/5)", "eps(1/4)", … ("builtin:" prefix optional).
inline MatrixTuple<Rational> by_name(std::string_view name) {
  if (name.starts_with("builtin:")) name.remove_prefix(8);
  auto is = [&](std::string_view head) {
    return name == head || (name.starts_with(head) && name.size() > head.size() && name[head.size()] == '(');
  };
  if (name == "notmix2") return notmix2();
  if (name == "nilpotent2") return nilpotent2();
  if (name == "rankone4") return rankone4();
  if (name == "diagpair") return diagpair();
  if (is("alpha")) {
    auto a = detail::parse_args(name, "alpha", 2);
    if (a.empty()) return alpha(Q(3, 5), Q(4, 5));
    return alpha(a[0], a[1]);
  }
  if (is("eps")) {
    auto a = detail::parse_args(name, "eps", 1);
    if (a.empty()) return eps(Q(1));
    return eps(a[0]);
  }
  throw InvalidInput("unknown builtin '" + std::string(name) + "'");
}

}  // namespace thermoform::builtins
