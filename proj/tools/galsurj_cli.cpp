// galsurj: batch front end for the bound, classification and inertia tools.
//
// Exit codes: 0 success, 2 input error, 4 internal error. check-prime also
// returns 1 when the prime is not admissible and 3 when the threshold
// comparison is undecided and nothing else rules the prime out.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <regex>
#include <sstream>
#include <string>

#include "galsurj/io.hpp"

using namespace galsurj;
using io::json;

namespace {

constexpr int kInputError = 2;
constexpr int kInternalError = 4;

struct RunConfig {
  std::string input;
  std::string out;
  u64 seed = ClassifyOptions{}.seed;
  long precision_cap = kDefaultPrecisionCap;
  std::string format = "json";
  std::string l;
  u64 lmax = 0;
  u64 words = ClassifyOptions{}.random_words;
  std::uint32_t exhaustive_cap = kExhaustiveSubspaceCap;
};

json read_json(const std::string& path) {
  if (path.empty()) throw io::InputError("--input", "an input file is required");
  std::ifstream in(path);
  if (!in) throw io::InputError(path, "cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw io::InputError(path, std::string("malformed JSON: ") + e.what());
  }
}

void emit(const RunConfig& cfg, const json& j) {
  const std::string text = cfg.format == "text" ? io::to_text(j) : j.dump(2) + "\n";
  if (cfg.out.empty()) {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream os(cfg.out, std::ios::binary);
  if (!os) throw io::InputError(cfg.out, "cannot write output file");
  os << text;
}

void check_precision(const RunConfig& cfg) {
  if (cfg.precision_cap < 64) throw io::InputError("--precision-cap", "must be at least 64");
}

int cmd_bound(const RunConfig& cfg) {
  check_precision(cfg);
  const auto desc = io::parse_descriptor(read_json(cfg.input));
  json out = io::bound_report(desc);
  out["command"] = "bound";
  emit(cfg, out);
  return 0;
}

int cmd_check_prime(const RunConfig& cfg) {
  check_precision(cfg);
  if (cfg.l.empty()) throw io::InputError("--l", "a prime is required");
  const u64 l = io::parse_u64_string(cfg.l, "--l");
  if (!is_prime_u64(l)) throw io::InputError("--l", std::to_string(l) + " is not prime");
  const auto desc = io::parse_descriptor(read_json(cfg.input));
  const auto v = check_prime_admissible(desc, l, cfg.precision_cap);
  json out = io::verdict_json(v);
  out["command"] = "check-prime";
  out["precision_cap"] = cfg.precision_cap;
  emit(cfg, out);
  return io::check_prime_status(v);
}

int cmd_classify(const RunConfig& cfg) {
  const auto in = io::parse_gsp4_input(read_json(cfg.input));
  ClassifyOptions opt;
  opt.seed = cfg.seed;
  opt.random_words = cfg.words;
  opt.exhaustive_cap = cfg.exhaustive_cap;
  const auto rep = classify_gsp4(in.field, in.gens, in.form, opt);
  json out = io::class_report_json(in.field, rep);
  out["command"] = "classify";
  out["form"] = in.form_name;
  out["generators"] = in.gens.size();
  out["options"] = {{"seed", opt.seed}, {"words", opt.random_words}, {"exhaustive_cap", opt.exhaustive_cap}};
  emit(cfg, out);
  return 0;
}

int cmd_dickson(const RunConfig& cfg) {
  const auto in = io::parse_dickson_input(read_json(cfg.input));
  const auto rep = dickson_classify(in.field, in.gens);
  json out = io::dickson_report_json(in.field, rep);
  out["command"] = "dickson";
  out["field"] = io::field_json(in.field);
  emit(cfg, out);
  return 0;
}

std::pair<u64, u64> inertia_range(const RunConfig& cfg) {
  if (!cfg.l.empty() && cfg.lmax) throw io::InputError("--l", "give either --l or --lmax");
  if (cfg.lmax) return {2, cfg.lmax};
  if (cfg.l.empty()) throw io::InputError("--l", "a prime range such as 11..47 or --lmax is required");
  static const std::regex range("([0-9]+)\\.\\.([0-9]+)");
  std::smatch m;
  if (std::regex_match(cfg.l, m, range)) {
    const u64 lo = io::parse_u64_string(m[1], "--l"), hi = io::parse_u64_string(m[2], "--l");
    if (lo > hi) throw io::InputError("--l", "empty range");
    return {lo, hi};
  }
  const u64 l = io::parse_u64_string(cfg.l, "--l");
  return {l, l};
}

constexpr u64 kInertiaMax = 1000;
constexpr u64 kTwistedCubicMin = 11;
constexpr u64 kLowerBoundMax = 47;

int cmd_verify_inertia(const RunConfig& cfg) {
  const auto [lo, hi] = inertia_range(cfg);
  if (hi > kInertiaMax) throw io::InputError("--l", "primes above " + std::to_string(kInertiaMax) + " are not supported");
  json cubic = json::array(), lower = json::array();
  bool verified = true;
  for (u64 l = lo; l <= hi; ++l) {
    if (!is_prime_u64(l)) continue;
    if (l >= kTwistedCubicMin) {
      const auto r = verify_no_twisted_cubic(l);
      verified = verified && r.verified;
      cubic.push_back(io::twisted_cubic_json(r));
    }
    for (int g = 1; g <= 4; ++g) {
      if (l < static_cast<u64>(g) + 2 || l > kLowerBoundMax) continue;
      const auto r = verify_lower_bound(l, g);
      verified = verified && r.verified;
      lower.push_back(io::lower_bound_json(r));
    }
  }
  json out{{"command", "verify-inertia"},
           {"range", json::array({std::to_string(lo), std::to_string(hi)})},
           {"twisted_cubic", cubic},
           {"lower_bound", lower},
           {"verified", verified}};
  emit(cfg, out);
  return 0;
}

int cmd_verify_products(const RunConfig& cfg) {
  const auto in = io::parse_products_input(read_json(cfg.input));
  json out{{"command", "verify-products"}, {"test", in.test}};
  if (in.test == "pair") {
    out["field"] = io::field_json(in.fields[0]);
    out["result"] = io::pair_result_json(in.fields[0], pair_product_test(in.fields[0], in.pair_gens));
  } else if (in.test == "product") {
    json fields = json::array();
    for (const auto& f : in.fields) fields.push_back(io::field_json(f));
    out["fields"] = fields;
    out["result"] = io::product_result_json(in.fields, product_surjectivity(in.fields, in.tuple_gens));
  } else {
    const auto h = build_H_ell(in.l, in.degrees);
    json fields = json::array();
    for (const auto& f : h.fields) fields.push_back(io::field_json(f));
    out["fields"] = fields;
    out["order"] = h.order.get_str();
    out["generators"] = h.gens.size();
    // The last tuple carries the determinant; the rest generate the
    // product of the SL2 factors.
    std::vector<std::vector<M2>> sl2(h.gens.begin(), h.gens.end() - 1);
    out["result"] = io::product_result_json(h.fields, product_surjectivity(h.fields, sl2));
  }
  emit(cfg, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Surjectivity thresholds, subgroup classification and inertia checks for Galois images"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto add_io = [&](CLI::App* sub) {
    sub->add_option("--out", cfg.out, "Write the report here instead of stdout");
    sub->add_option("--format", cfg.format, "Report format")->check(CLI::IsMember({"json", "text"}));
  };
  auto add_input = [&](CLI::App* sub) { sub->add_option("--input", cfg.input, "Input JSON file")->required(); };

  auto* bound = app.add_subcommand("bound", "Threshold for a variety descriptor");
  add_input(bound);
  bound->add_option("--precision-cap", cfg.precision_cap, "Largest MPFR precision in bits");
  add_io(bound);

  auto* check = app.add_subcommand("check-prime", "Admissibility of one prime for a descriptor");
  add_input(check);
  check->add_option("--l", cfg.l, "The prime")->required();
  check->add_option("--precision-cap", cfg.precision_cap, "Largest MPFR precision in bits");
  add_io(check);

  auto* classify = app.add_subcommand("classify", "Maximal-subgroup tests for a subgroup of GSp4(F_l)");
  add_input(classify);
  classify->add_option("--seed", cfg.seed, "Seed for mt19937_64");
  classify->add_option("--words", cfg.words, "Random words fed to the type (4) test");
  classify->add_option("--exhaustive-cap", cfg.exhaustive_cap, "Largest l for exhaustive subspace search");
  add_io(classify);

  auto* dickson = app.add_subcommand("dickson", "Dickson class of a subgroup of GL2(F_q)");
  add_input(dickson);
  add_io(dickson);

  auto* inertia = app.add_subcommand("verify-inertia", "Twisted-cubic and lower-bound campaigns over a prime range");
  inertia->add_option("--l", cfg.l, "A prime or a range lo..hi");
  inertia->add_option("--lmax", cfg.lmax, "All primes up to this bound");
  add_io(inertia);

  auto* products = app.add_subcommand("verify-products", "Subgroups of products of SL2 factors");
  add_input(products);
  add_io(products);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInputError;
  }

  try {
    if (bound->parsed()) return cmd_bound(cfg);
    if (check->parsed()) return cmd_check_prime(cfg);
    if (classify->parsed()) return cmd_classify(cfg);
    if (dickson->parsed()) return cmd_dickson(cfg);
    if (inertia->parsed()) return cmd_verify_inertia(cfg);
    if (products->parsed()) return cmd_verify_products(cfg);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternalError;
  }
  return kInputError;
}
