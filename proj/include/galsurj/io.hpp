#pragma once

// Strict JSON ingestion and report encoding for the command-line tool.
//
// Parsing rejects unknown keys, wrong types and out-of-range values with a
// message naming the offending field path. Big integers and primes travel
// as decimal strings, rationals as "num/den" strings. Elements of F_q are
// least-degree-first coefficient arrays (a bare integer is accepted on
// input for the prime subfield); entries of GSp4 matrices are integers
// mod l. Matrices are arrays of rows.

#include <gmpxx.h>

#include "json.hpp"

#include <cstdint>
#include <regex>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "galsurj/bounds.hpp"
#include "galsurj/classify.hpp"
#include "galsurj/finitefield.hpp"
#include "galsurj/inertia.hpp"
#include "galsurj/symplectic.hpp"

namespace galsurj::io {

using nlohmann::json;

struct InputError : std::invalid_argument {
  InputError(const std::string& path, const std::string& msg) : std::invalid_argument(path + ": " + msg) {}
};

// Hands out the members of a JSON object and complains about the rest.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) throw InputError(path_, "expected an object");
  }
  const json& required(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) throw InputError(at(key), "missing required field");
    return *it;
  }
  const json* optional(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }
  std::string at(const std::string& key) const { return path_ + "." + key; }
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw InputError(at(it.key()), "unknown field");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline mpz_class parse_decimal(const json& j, const std::string& path) {
  static const std::regex re("-?(0|[1-9][0-9]*)");
  if (!j.is_string()) throw InputError(path, "expected a decimal string");
  const auto s = j.get<std::string>();
  if (!std::regex_match(s, re)) throw InputError(path, "not a decimal integer: \"" + s + "\"");
  return mpz_class(s);
}

inline mpq_class parse_rational(const json& j, const std::string& path) {
  static const std::regex re("-?(0|[1-9][0-9]*)(/[1-9][0-9]*)?");
  if (!j.is_string()) throw InputError(path, "expected a \"num/den\" string");
  const auto s = j.get<std::string>();
  if (!std::regex_match(s, re)) throw InputError(path, "not a rational: \"" + s + "\"");
  mpq_class q(s);
  q.canonicalize();
  return q;
}

inline u64 parse_u64_string(const std::string& s, const std::string& path) {
  static const std::regex re("0|[1-9][0-9]*");
  if (!std::regex_match(s, re)) throw InputError(path, "not a nonnegative decimal integer: \"" + s + "\"");
  const mpz_class z(s);
  if (z > mpz_class("18446744073709551615")) throw InputError(path, "exceeds 2^64 - 1");
  return std::stoull(s);
}

inline u64 parse_prime(const json& j, const std::string& path) {
  if (!j.is_string()) throw InputError(path, "expected a prime as a decimal string");
  const u64 p = parse_u64_string(j.get<std::string>(), path);
  if (!is_prime_u64(p)) throw InputError(path, std::to_string(p) + " is not prime");
  return p;
}

inline u64 parse_count(const json& j, const std::string& path, u64 min = 0) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
    throw InputError(path, "expected a nonnegative integer");
  const u64 v = j.get<u64>();
  if (v < min) throw InputError(path, "must be at least " + std::to_string(min));
  return v;
}

inline bool parse_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) throw InputError(path, "expected true or false");
  return j.get<bool>();
}

inline const json& parse_array(const json& j, const std::string& path, std::size_t size = 0) {
  if (!j.is_array()) throw InputError(path, "expected an array");
  if (size && j.size() != size) throw InputError(path, "expected " + std::to_string(size) + " entries");
  return j;
}

inline std::string idx(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

// ---------------------------------------------------------------------------
// Variety descriptors

inline std::vector<u64> parse_prime_list(const json& j, const std::string& path) {
  std::vector<u64> out;
  parse_array(j, path);
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(parse_prime(j[i], idx(path, i)));
  return out;
}

inline VarietyDescriptor parse_descriptor(const json& j, const std::string& path = "$") {
  ObjectReader r(j, path);
  VarietyDescriptor d;
  d.degree_K = parse_count(r.required("degree_K"), r.at("degree_K"), 1);
  d.faltings_height = parse_rational(r.required("faltings_height"), r.at("faltings_height"));
  d.dim = parse_count(r.required("dim"), r.at("dim"), 1);
  d.endos_over_K = parse_bool(r.required("endos_over_K"), r.at("endos_over_K"));

  const std::string ep = r.at("endo_type");
  ObjectReader e(r.required("endo_type"), ep);
  const json& kind = e.required("kind");
  if (!kind.is_string()) throw InputError(e.at("kind"), "expected a string");
  const auto k = kind.get<std::string>();
  if (k == "TrivialEndo") {
    d.endo_type = EndoKind::TrivialEndo;
  } else if (k == "GL2Type") {
    d.endo_type = EndoKind::GL2Type;
    d.field_degree = parse_count(e.required("field_degree"), e.at("field_degree"), 1);
    d.disc_E = parse_decimal(e.required("disc_E"), e.at("disc_E"));
  } else if (k == "RealMultSurface") {
    d.endo_type = EndoKind::RealMultSurface;
    d.disc_E = parse_decimal(e.required("disc_E"), e.at("disc_E"));
  } else if (k == "QuaternionMult") {
    d.endo_type = EndoKind::QuaternionMult;
    d.delta = parse_count(e.required("delta"), e.at("delta"), 1);
  } else {
    throw InputError(e.at("kind"), "unknown endomorphism type \"" + k + "\"");
  }
  e.finish();

  const json* ram = r.optional("ramified_primes_K");
  const json* disc = r.optional("disc_K");
  if (!ram && !disc) throw InputError(path, "one of ramified_primes_K or disc_K is required");
  if (ram) d.ramified_primes_K = parse_prime_list(*ram, r.at("ramified_primes_K"));
  if (disc) d.disc_K = parse_decimal(*disc, r.at("disc_K"));
  d.non_semistable_primes = parse_prime_list(r.required("non_semistable_primes"), r.at("non_semistable_primes"));
  r.finish();
  try {
    validate(d);
  } catch (const std::invalid_argument& ex) {
    throw InputError(path, ex.what());
  }
  return d;
}

// ---------------------------------------------------------------------------
// Fields, elements, matrices

inline FqField parse_field(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  const u64 l = parse_prime(r.required("l"), r.at("l"));
  const u64 n = parse_count(r.required("n"), r.at("n"), 1);
  const json* mod = r.optional("modulus");
  r.finish();
  if (n > 4) throw InputError(r.at("n"), "extension degree must be at most 4");
  if (l >= (u64{1} << 31)) throw InputError(r.at("l"), "prime too large");
  try {
    if (!mod) return make_field(l, static_cast<int>(n));
    parse_array(*mod, r.at("modulus"), n + 1);
    std::vector<std::uint32_t> m;
    for (std::size_t i = 0; i <= n; ++i) {
      const u64 c = parse_count((*mod)[i], idx(r.at("modulus"), i));
      if (c >= l) throw InputError(idx(r.at("modulus"), i), "coefficient must be below l");
      m.push_back(static_cast<std::uint32_t>(c));
    }
    return FqField(l, m);
  } catch (const InputError&) {
    throw;
  } catch (const std::invalid_argument& ex) {
    throw InputError(path, ex.what());
  }
}

inline std::uint32_t parse_residue(const json& j, const std::string& path, u64 l) {
  const u64 v = parse_count(j, path);
  if (v >= l) throw InputError(path, "entry must be below " + std::to_string(l));
  return static_cast<std::uint32_t>(v);
}

inline FqElem parse_element(const FqField& f, const json& j, const std::string& path) {
  const u64 l = f.characteristic();
  FqElem e;
  if (j.is_array()) {
    parse_array(j, path, static_cast<std::size_t>(f.degree()));
    for (int i = 0; i < f.degree(); ++i) e.c[i] = parse_residue(j[i], idx(path, i), l);
    return e;
  }
  e.c[0] = parse_residue(j, path, l);
  return e;
}

inline M2 parse_m2(const FqField& f, const json& j, const std::string& path) {
  parse_array(j, path, 2);
  M2 m;
  for (int i = 0; i < 2; ++i) {
    const auto rp = idx(path, i);
    parse_array(j[i], rp, 2);
    for (int k = 0; k < 2; ++k) m(i, k) = parse_element(f, j[i][k], idx(rp, k));
  }
  return m;
}

inline Mat4 parse_m4(const PrimeField& f, const json& j, const std::string& path) {
  parse_array(j, path, 4);
  Mat4 m;
  for (int i = 0; i < 4; ++i) {
    const auto rp = idx(path, i);
    parse_array(j[i], rp, 4);
    for (int k = 0; k < 4; ++k) m(i, k) = parse_residue(j[i][k], idx(rp, k), f.characteristic());
  }
  return m;
}

inline json field_json(const FqField& f) {
  json m = json::array();
  for (auto c : f.modulus()) m.push_back(c);
  return {{"l", std::to_string(f.characteristic())}, {"n", f.degree()}, {"modulus", m}};
}

inline json elem_json(const PrimeField&, std::uint32_t v) { return v; }

inline json elem_json(const FqField& f, const FqElem& e) {
  json a = json::array();
  for (int i = 0; i < f.degree(); ++i) a.push_back(e.c[i]);
  return a;
}

template <class F, int N>
json mat_json(const F& f, const MatF<F, N>& m) {
  json rows = json::array();
  for (int i = 0; i < N; ++i) {
    json row = json::array();
    for (int k = 0; k < N; ++k) row.push_back(elem_json(f, m(i, k)));
    rows.push_back(row);
  }
  return rows;
}

inline json vec_json(const FqField& f, const std::array<FqElem, 2>& v) {
  return json::array({elem_json(f, v[0]), elem_json(f, v[1])});
}

inline json subspace_json(const Subspace& s) {
  json a = json::array();
  for (const auto& b : s.basis) a.push_back(json::array({b[0], b[1], b[2], b[3]}));
  return a;
}

// ---------------------------------------------------------------------------
// Generator files

struct Gsp4Input {
  PrimeField field{11};
  std::string form_name;
  SympForm form;
  std::vector<Mat4> gens;
};

inline Gsp4Input parse_gsp4_input(const json& j, const std::string& path = "$") {
  ObjectReader r(j, path);
  const u64 l = parse_prime(r.required("l"), r.at("l"));
  if (l < 5 || l >= (u64{1} << 31)) throw InputError(r.at("l"), "need 5 <= l < 2^31");
  Gsp4Input in{PrimeField(static_cast<std::uint32_t>(l)), "", {}, {}};
  const json& form = r.required("form");
  if (!form.is_string()) throw InputError(r.at("form"), "expected \"standard\" or \"cubic\"");
  in.form_name = form.get<std::string>();
  if (in.form_name == "standard")
    in.form = standard_form(in.field);
  else if (in.form_name == "cubic")
    in.form = cubic_form(in.field);
  else
    throw InputError(r.at("form"), "expected \"standard\" or \"cubic\"");
  const json& gens = parse_array(r.required("generators"), r.at("generators"));
  if (gens.empty()) throw InputError(r.at("generators"), "at least one generator is required");
  for (std::size_t i = 0; i < gens.size(); ++i) in.gens.push_back(parse_m4(in.field, gens[i], idx(r.at("generators"), i)));
  r.finish();
  return in;
}

struct DicksonInput {
  FqField field;
  std::vector<M2> gens;
};

inline DicksonInput parse_dickson_input(const json& j, const std::string& path = "$") {
  ObjectReader r(j, path);
  DicksonInput in{parse_field(r.required("field"), r.at("field")), {}};
  const json& gens = parse_array(r.required("generators"), r.at("generators"));
  if (gens.empty()) throw InputError(r.at("generators"), "at least one generator is required");
  for (std::size_t i = 0; i < gens.size(); ++i)
    in.gens.push_back(parse_m2(in.field, gens[i], idx(r.at("generators"), i)));
  r.finish();
  return in;
}

// verify-products inputs, tagged by "test".
struct ProductsInput {
  std::string test;  // pair, product, h_ell
  std::vector<FqField> fields;
  std::vector<std::pair<M2, M2>> pair_gens;
  std::vector<std::vector<M2>> tuple_gens;
  u64 l = 0;
  std::vector<int> degrees;
};

inline ProductsInput parse_products_input(const json& j, const std::string& path = "$") {
  ObjectReader r(j, path);
  const json& test = r.required("test");
  if (!test.is_string()) throw InputError(r.at("test"), "expected a string");
  ProductsInput in;
  in.test = test.get<std::string>();
  if (in.test == "pair") {
    in.fields.push_back(parse_field(r.required("field"), r.at("field")));
    const auto gp = r.at("generators");
    const json& gens = parse_array(r.required("generators"), gp);
    if (gens.empty()) throw InputError(gp, "at least one generator is required");
    for (std::size_t i = 0; i < gens.size(); ++i) {
      ObjectReader g(gens[i], idx(gp, i));
      in.pair_gens.push_back({parse_m2(in.fields[0], g.required("left"), g.at("left")),
                              parse_m2(in.fields[0], g.required("right"), g.at("right"))});
      g.finish();
    }
  } else if (in.test == "product") {
    const auto fp = r.at("fields");
    const json& fields = parse_array(r.required("fields"), fp);
    if (fields.empty()) throw InputError(fp, "at least one field is required");
    for (std::size_t i = 0; i < fields.size(); ++i) in.fields.push_back(parse_field(fields[i], idx(fp, i)));
    const auto gp = r.at("generators");
    const json& gens = parse_array(r.required("generators"), gp);
    if (gens.empty()) throw InputError(gp, "at least one generator is required");
    for (std::size_t i = 0; i < gens.size(); ++i) {
      parse_array(gens[i], idx(gp, i), in.fields.size());
      std::vector<M2> t;
      for (std::size_t k = 0; k < in.fields.size(); ++k)
        t.push_back(parse_m2(in.fields[k], gens[i][k], idx(idx(gp, i), k)));
      in.tuple_gens.push_back(std::move(t));
    }
  } else if (in.test == "h_ell") {
    in.l = parse_prime(r.required("l"), r.at("l"));
    const auto dp = r.at("degrees");
    const json& degs = parse_array(r.required("degrees"), dp);
    if (degs.empty()) throw InputError(dp, "at least one degree is required");
    for (std::size_t i = 0; i < degs.size(); ++i) {
      const u64 d = parse_count(degs[i], idx(dp, i), 1);
      if (d > 4) throw InputError(idx(dp, i), "degree must be at most 4");
      in.degrees.push_back(static_cast<int>(d));
    }
  } else {
    throw InputError(r.at("test"), "expected \"pair\", \"product\" or \"h_ell\"");
  }
  r.finish();
  return in;
}

// ---------------------------------------------------------------------------
// Reports

inline json expr_json(const ExactExpr& e) {
  const auto b = bit_length_bounds(e);
  return {{"expression", to_string(e)}, {"bit_length", {{"lower", b.lower}, {"upper", b.upper}}}};
}

inline json conditions_json(const VarietyDescriptor& d) {
  json a = json::array();
  for (const auto& [tag, text] : side_conditions(d)) a.push_back({{"tag", condition_name(tag)}, {"condition", text}});
  return a;
}

inline json bound_report(const VarietyDescriptor& d) {
  json out;
  out["endo_type"] = endo_name(d.endo_type);
  out["threshold"] = expr_json(threshold_for(d));
  out["threshold"]["comparison"] = "l > threshold";
  out["conditions"] = conditions_json(d);
  if (d.endo_type == EndoKind::GL2Type || d.endo_type == EndoKind::RealMultSurface)
    out["good_prime_bound"] = expr_json(good_prime_bound(d));
  if (d.endo_type == EndoKind::QuaternionMult) out["quaternion_index_bound"] = expr_json(quaternion_index_bound(d));
  json known = json::object();
  json ram = json::array();
  for (u64 p : d.ramified_primes_K) ram.push_back(std::to_string(p));
  known["ramified_primes_K"] = ram;
  if (d.disc_K) known["disc_K"] = d.disc_K->get_str();
  json ns = json::array();
  for (u64 p : d.non_semistable_primes) ns.push_back(std::to_string(p));
  known["non_semistable_primes"] = ns;
  known["endos_over_K"] = d.endos_over_K;
  out["supplied"] = known;
  return out;
}

inline json verdict_json(const AdmissibilityVerdict& v) {
  json failed = json::array();
  for (const auto& f : v.failed_conditions) failed.push_back({{"tag", condition_name(f.tag)}, {"detail", f.detail}});
  return {{"prime", std::to_string(v.prime)},
          {"admissible", v.admissible},
          {"comparison",
           {{"result", comparison_name(v.comparison.cmp)},
            {"reason", v.comparison.reason},
            {"precision", v.comparison.precision}}},
          {"threshold",
           {{"expression", to_string(v.threshold)},
            {"bit_length", {{"lower", v.threshold_bits.lower}, {"upper", v.threshold_bits.upper}}}}},
          {"failed_conditions", failed},
          {"expected_image", {{"kind", v.expected_image.kind}, {"description", v.expected_image.description}}}};
}

// Exit status of check-prime: 0 admissible, 1 ruled out, 3 when the only
// obstacle is an undecided threshold comparison.
inline int check_prime_status(const AdmissibilityVerdict& v) {
  if (v.admissible) return 0;
  const bool only_undecided = v.failed_conditions.size() == 1 && v.comparison.cmp == Comparison::Indeterminate;
  return only_undecided ? 3 : 1;
}

inline json class_verdict_json(const PrimeField& f, GspClass c, const ClassVerdict& v) {
  json out{{"kind", verdict_name(v.kind)}, {"detail", v.detail}};
  if (!v.subspaces.empty()) {
    json s = json::array();
    for (const auto& sub : v.subspaces) s.push_back(subspace_json(sub));
    out["subspaces"] = s;
  }
  if (!v.signs.empty()) out["signs"] = v.signs;
  if (v.field_element) out["field_element"] = mat_json<PrimeField, 4>(f, *v.field_element);
  if (c == GspClass::Type4) {
    json t = json::array();
    for (const auto& e : v.tested)
      t.push_back({{"word", e.word},
                   {"element", mat_json<PrimeField, 4>(f, e.element)},
                   {"consistent", e.consistent},
                   {"t", e.t},
                   {"n", e.n}});
    out["tested"] = t;
    out["words"] = v.words;
    out["seed"] = v.seed;
  }
  if (c == GspClass::SmallProjective) out["projective_order"] = v.projective_order;
  out["statistical"] = v.statistical;
  return out;
}

inline json class_report_json(const PrimeField& f, const ClassReport& r) {
  json verdicts = json::object();
  for (GspClass c : kGspClasses) verdicts[class_name(c)] = class_verdict_json(f, c, r.verdict(c));
  json members = json::array();
  for (GspClass c : r.members) members.push_back(class_name(c));
  return {{"l", std::to_string(r.l)},
          {"conclusion", conclusion_name(r.conclusion)},
          {"members", members},
          {"note", r.note},
          {"verdicts", verdicts}};
}

inline json dickson_report_json(const FqField& f, const DicksonReport& r) {
  json out{{"class", dickson_name(r.cls)},
           {"order", r.order},
           {"order_exact", r.order_exact},
           {"detail", r.detail}};
  if (r.cls == DicksonClass::Type5a || r.cls == DicksonClass::Type5b) {
    out["level"] = r.level;
    out["derived_order"] = r.derived_order;
    out["scalar_order"] = r.scalar_order;
    out["index"] = r.index;
  }
  if (r.generator) out["generator"] = mat_json<FqField, 2>(f, *r.generator);
  if (r.eigenvector) out["eigenvector"] = vec_json(f, *r.eigenvector);
  if (!r.line_pair.empty()) {
    const auto big = make_field(f.characteristic(), r.pair_degree);
    json lines = json::array();
    for (const auto& v : r.line_pair) lines.push_back(vec_json(big, v));
    out["line_pair"] = {{"field", field_json(big)}, {"lines", lines}, {"rational", r.rational_pair}};
  }
  return out;
}

inline json graph_json(const FqField& f, const TwistedGraph& g) {
  return {{"f", mat_json<FqField, 2>(f, g.f)}, {"sigma", g.sigma}, {"chi", g.chi}};
}

inline json pair_result_json(const FqField& f, const PairResult& r) {
  json out{{"verdict", pair_verdict_name(r.verdict)}, {"detail", r.detail}, {"bfs_certified", r.bfs_certified}};
  if (r.bfs_certified) out["intersection_order"] = r.intersection_order;
  if (r.graph) out["graph"] = graph_json(f, *r.graph);
  return out;
}

inline json product_result_json(const std::vector<FqField>& fields, const ProductResult& r) {
  json pairs = json::array();
  for (auto [i, j] : r.checked_pairs) pairs.push_back(json::array({i, j}));
  json out{{"full", r.full}, {"detail", r.detail}, {"checked_pairs", pairs}};
  if (!r.full) out["witness"] = json::array({r.witness.first, r.witness.second});
  if (r.graph) out["graph"] = graph_json(fields[r.witness.first - 1], *r.graph);
  return out;
}

inline json twisted_cubic_json(const TwistedCubicReport& r) {
  const auto f2 = make_field(r.l, 2);
  json pats = json::array();
  for (const auto& w : r.witnesses) {
    json p{{"pattern", to_string(w.pattern)}, {"found", w.found}, {"generators_tried", w.generators_tried}};
    if (w.found) {
      json ev = json::array();
      for (const auto& e : w.eigenvalues) ev.push_back(elem_json(f2, e));
      p["generator"] = elem_json(f2, w.generator);
      p["generator_index"] = w.generator_index;
      p["eigenvalues"] = ev;
      p["failed_orderings"] = w.failed_orderings;
      p["orderings"] = 24;
    }
    pats.push_back(p);
  }
  return {{"l", std::to_string(r.l)}, {"field", field_json(f2)}, {"verified", r.verified}, {"patterns", pats}};
}

inline json lower_bound_json(const LowerBoundReport& r) {
  json out{{"l", std::to_string(r.l)},
           {"g", r.g},
           {"verified", r.verified},
           {"patterns", r.patterns},
           {"contradictions", r.contradictions},
           {"inexact", r.inexact},
           {"required", r.l - 1}};
  if (r.patterns > r.contradictions) out["smallest_n"] = r.smallest_n;
  if (r.failing) out["failing"] = to_string(*r.failing);
  return out;
}

// ---------------------------------------------------------------------------
// Plain-text rendering: one "path = value" line per leaf.

inline void flatten(const json& j, const std::string& path, std::string& out) {
  if (j.is_object() && !j.empty()) {
    for (auto it = j.begin(); it != j.end(); ++it) flatten(*it, path.empty() ? it.key() : path + "." + it.key(), out);
  } else if (j.is_array() && !j.empty() && !j.front().is_primitive()) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], path + "[" + std::to_string(i) + "]", out);
  } else {
    out += path + " = " + (j.is_string() ? j.get<std::string>() : j.dump()) + "\n";
  }
}

inline std::string to_text(const json& j) {
  std::string out;
  flatten(j, "", out);
  return out;
}

}  // namespace galsurj::io
