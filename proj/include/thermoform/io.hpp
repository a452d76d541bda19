#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

#include "thermoform/builtins.hpp"
#include "thermoform/tuple.hpp"

// Tuple files, built-in lookup, digests and CSV output.
//
// A tuple file is JSON:
//
//   {
//     "dimension": 2,
//     "symbols": 2,
//     "matrices": [[["0", "2"], ["1", "0"]], [["0", "1"], ["2", "0"]]],
//     "scalar_policy": "exact-rational",
//     "label": "notmix2"
//   }
//
// Each matrix is either a list of rows or one flat row-major list. Entries are
// "p/q" strings, integer strings, JSON integers, or decimals. "symbols" and
// "scalar_policy" are optional. Without an explicit policy any decimal entry
// switches the whole tuple to double precision.
namespace thermoform {

using AnyTuple = std::variant<MatrixTuple<Rational>, MatrixTuple<double>>;

class ParseError : public InvalidInput {
 public:
  ParseError(const std::string& msg, std::size_t line, std::size_t column)
      : InvalidInput(msg), line_(line), column_(column) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_, column_;
};

struct LoadedTuple {
  AnyTuple tuple;
  std::string source;  ///< file path or builtin:NAME
  std::string digest;

  ScalarPolicy policy() const {
    return std::holds_alternative<MatrixTuple<Rational>>(tuple) ? ScalarPolicy::exact_rational
                                                                 : ScalarPolicy::double_precision;
  }
  const std::string& label() const {
    return std::visit([](const auto& t) -> const std::string& { return t.label(); }, tuple);
  }
  std::size_t dim() const {
    return std::visit([](const auto& t) { return t.dim(); }, tuple);
  }
  std::size_t size() const {
    return std::visit([](const auto& t) { return t.size(); }, tuple);
  }
};

/// 64-bit FNV-1a, lowercase hex.
inline std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string scalar_text(const Rational& q) { return q.str(); }
inline std::string scalar_text(double x) { return format_double(x); }

/// Digest over policy, shape and entries; independent of label and layout.
template <Scalar T>
std::string tuple_digest(const MatrixTuple<T>& t) {
  std::string canon(to_string(scalar_traits<T>::policy));
  canon += "|" + std::to_string(t.dim()) + "|" + std::to_string(t.size());
  for (const auto& m : t) {
    canon += "|";
    for (const auto& x : m.data()) canon += scalar_text(x) + ",";
  }
  return fnv1a_hex(canon);
}

namespace detail {

inline std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

struct RawEntry {
  std::string text;
  bool decimal = false;
  bool json_float = false;
  double value = 0;
  std::string path;
};

inline bool looks_decimal(std::string_view s) { return s.find_first_of(".eE") != std::string_view::npos; }

inline RawEntry raw_entry(const nlohmann::json& v, const std::string& path) {
  RawEntry e;
  e.path = path;
  if (v.is_string()) {
    e.text = v.get<std::string>();
    e.decimal = e.text.find('/') == std::string::npos && looks_decimal(e.text);
  } else if (v.is_number_integer()) {
    e.text = v.dump();
  } else if (v.is_number_float()) {
    e.value = v.get<double>();
    e.text = format_double(e.value);
    e.decimal = e.json_float = true;
  } else {
    throw InvalidInput(path + ": expected a number or a rational string, got " + std::string(v.type_name()));
  }
  return e;
}

inline std::vector<RawEntry> matrix_entries(const nlohmann::json& m, std::size_t d, const std::string& path) {
  if (!m.is_array()) throw InvalidInput(path + ": a matrix must be an array");
  std::vector<RawEntry> out;
  const bool nested = !m.empty() && m.front().is_array();
  if (nested) {
    if (m.size() != d)
      throw InvalidInput(path + ": expected " + std::to_string(d) + " rows, found " + std::to_string(m.size()));
    for (std::size_t i = 0; i < m.size(); ++i) {
      const auto& row = m[i];
      const std::string rp = path + "[" + std::to_string(i) + "]";
      if (!row.is_array()) throw InvalidInput(rp + ": a row must be an array");
      if (row.size() != d)
        throw InvalidInput(rp + ": row has " + std::to_string(row.size()) + " entries, matrix is not " +
                           std::to_string(d) + "x" + std::to_string(d));
      for (std::size_t j = 0; j < row.size(); ++j) out.push_back(raw_entry(row[j], rp + "[" + std::to_string(j) + "]"));
    }
  } else {
    if (m.size() != d * d)
      throw InvalidInput(path + ": flat matrix has " + std::to_string(m.size()) + " entries, expected " +
                         std::to_string(d * d));
    for (std::size_t k = 0; k < m.size(); ++k) out.push_back(raw_entry(m[k], path + "[" + std::to_string(k) + "]"));
  }
  return out;
}

inline Rational exact_entry(const RawEntry& e) {
  try {
    return parse_rational(e.text);
  } catch (const std::invalid_argument& ex) {
    throw InvalidInput(e.path + ": " + ex.what());
  }
}

}  // namespace detail

/// Parses tuple-file text. Syntax errors carry line and column; shape and
/// value errors name the JSON path of the offending element.
inline AnyTuple parse_tuple_text(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    const auto [line, col] = detail::line_column(text, e.byte);
    std::string what = e.what();
    // keep only the description; the position is reported in our own format
    if (const auto p = what.find("parse error"); p != std::string::npos)
      if (const auto q = what.find(": ", p); q != std::string::npos) what = what.substr(q + 2);
    throw ParseError("line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + what, line, col);
  }
  if (!doc.is_object()) throw InvalidInput("top level must be a JSON object");

  auto field = [&](const char* key) -> const nlohmann::json& {
    if (!doc.contains(key)) throw InvalidInput(std::string("missing field '") + key + "'");
    return doc.at(key);
  };
  const auto& dim = field("dimension");
  if (!dim.is_number_integer() || dim.get<long long>() < 1)
    throw InvalidInput("dimension: must be a positive integer");
  const auto d = static_cast<std::size_t>(dim.get<long long>());

  const auto& mats = field("matrices");
  if (!mats.is_array()) throw InvalidInput("matrices: must be an array");
  if (doc.contains("symbols")) {
    const auto& m = doc.at("symbols");
    if (!m.is_number_integer() || m.get<long long>() != static_cast<long long>(mats.size()))
      throw InvalidInput("symbols: must equal the number of matrices (" + std::to_string(mats.size()) + ")");
  }
  if (mats.size() < 2) throw InvalidInput("matrices: a tuple needs at least two matrices (M >= 2)");

  std::string label;
  if (doc.contains("label")) {
    if (!doc.at("label").is_string()) throw InvalidInput("label: must be a string");
    label = doc.at("label").get<std::string>();
  }

  std::vector<std::vector<detail::RawEntry>> entries;
  bool any_decimal = false;
  for (std::size_t i = 0; i < mats.size(); ++i) {
    entries.push_back(detail::matrix_entries(mats[i], d, "matrices[" + std::to_string(i) + "]"));
    for (const auto& e : entries.back()) any_decimal = any_decimal || e.decimal;
  }

  enum class Requested { unspecified, exact, dbl } req = Requested::unspecified;
  if (doc.contains("scalar_policy")) {
    const auto& p = doc.at("scalar_policy");
    const std::string s = p.is_string() ? p.get<std::string>() : std::string();
    if (s == "exact-rational" || s == "exact_rational" || s == "rational")
      req = Requested::exact;
    else if (s == "double-precision" || s == "double_precision" || s == "double")
      req = Requested::dbl;
    else
      throw InvalidInput("scalar_policy: expected \"exact-rational\" or \"double-precision\"");
  }

  const bool exact = req == Requested::exact || (req == Requested::unspecified && !any_decimal);
  if (exact) {
    std::vector<Matrix<Rational>> ms;
    for (const auto& es : entries) {
      Matrix<Rational> m(d, d);
      for (std::size_t k = 0; k < es.size(); ++k) {
        if (es[k].json_float)
          throw InvalidInput(es[k].path + ": JSON decimal under exact-rational policy; quote it as a string");
        m(k / d, k % d) = detail::exact_entry(es[k]);
      }
      ms.push_back(std::move(m));
    }
    return MatrixTuple<Rational>(std::move(ms), label);
  }
  std::vector<Matrix<double>> ms;
  for (const auto& es : entries) {
    Matrix<double> m(d, d);
    for (std::size_t k = 0; k < es.size(); ++k)
      m(k / d, k % d) = es[k].json_float ? es[k].value : to_double(detail::exact_entry(es[k]));
    ms.push_back(std::move(m));
  }
  return MatrixTuple<double>(std::move(ms), label);
}

inline LoadedTuple load_tuple_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  LoadedTuple lt{parse_tuple_text(ss.str()), path, {}};
  lt.digest = std::visit([](const auto& t) { return tuple_digest(t); }, lt.tuple);
  return lt;
}

inline LoadedTuple load_builtin(std::string_view name) {
  auto t = builtins::by_name(name);
  std::string src(name);
  if (!src.starts_with("builtin:")) src = "builtin:" + src;
  LoadedTuple lt{t, src, tuple_digest(t)};
  return lt;
}

/// Serializes a tuple back to the file format.
template <Scalar T>
nlohmann::ordered_json tuple_to_json(const MatrixTuple<T>& t) {
  nlohmann::ordered_json j;
  j["dimension"] = t.dim();
  j["symbols"] = t.size();
  j["scalar_policy"] = std::string(to_string(scalar_traits<T>::policy));
  if (!t.label().empty()) j["label"] = t.label();
  auto& mats = j["matrices"] = nlohmann::ordered_json::array();
  for (const auto& m : t) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
      nlohmann::ordered_json row = nlohmann::ordered_json::array();
      for (std::size_t k = 0; k < m.cols(); ++k) {
        if constexpr (is_exact_v<T>)
          row.push_back(m(i, k).str());
        else
          row.push_back(m(i, k));
      }
      rows.push_back(std::move(row));
    }
    mats.push_back(std::move(rows));
  }
  return j;
}

/// RFC 4180 table with a header row and LF line endings.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add(std::vector<std::string> row) {
    if (row.size() != header_.size()) throw Error("CSV row width does not match header");
    rows_.push_back(std::move(row));
  }

  std::string str() const {
    std::string out;
    write_row(out, header_);
    for (const auto& r : rows_) write_row(out, r);
    return out;
  }

  std::size_t rows() const { return rows_.size(); }

  static std::string escape(const std::string& f) {
    if (f.find_first_of(",\"\r\n") == std::string::npos) return f;
    std::string q = "\"";
    for (char c : f) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + "\"";
  }

 private:
  static void write_row(std::string& out, const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + escape(r[i]);
    out += '\n';
  }

  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace thermoform
