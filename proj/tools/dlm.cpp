// dlm: evaluate dynamic risk/performance measures on scenario trees and
// certify their time-consistency properties.
//
// Exit codes: 0 pass/ok, 1 counterexample found, 2 configuration error,
// 3 numerical divergence.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "dlm/diagnostics.hpp"
#include "dlm/duality.hpp"
#include "dlm/sampling.hpp"
#include "dlm/serialization.hpp"

namespace {

constexpr unsigned long long kDefaultSuiteSeed = 7042;
constexpr int kDefaultSuiteRandom = 20;

struct SuiteOptions {
  std::string space_path;
  unsigned long long suite_seed = kDefaultSuiteSeed;
  int suite_random = kDefaultSuiteRandom;
};

struct Suite {
  std::vector<dlm::FilteredSpace> spaces;
  std::vector<std::string> labels;
};

Suite load_suite(const SuiteOptions& opt) {
  Suite s;
  if (!opt.space_path.empty()) {
    s.spaces.push_back(dlm::load_space(opt.space_path));
    s.labels.push_back(opt.space_path);
    return s;
  }
  s.spaces = dlm::certification_suite(opt.suite_seed, opt.suite_random);
  s.labels = {"TREE2", "TREE4"};
  for (int i = 0; i < opt.suite_random; ++i) s.labels.push_back("RT" + std::to_string(i));
  return s;
}

void write_output(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << "\n";
    return;
  }
  std::ofstream out(out_path);
  out << text;
}

int run_eval(const std::string& space_path, const std::string& measure_desc,
             const std::string& input_path, int t, const std::string& out_path) {
  const dlm::FilteredSpace sp = dlm::load_space(space_path);
  const dlm::DynamicMeasure phi = dlm::parse_measure(measure_desc, &sp);
  dlm::reset_divergence_count();
  dlm::RandomVar result;
  if (phi.kind() == dlm::InputKind::Variable)
    result = phi(dlm::load_rv(sp, input_path), t);
  else
    result = phi(dlm::load_process(sp, input_path), t);

  dlm::json values = dlm::json::object();
  for (int a = 0; a < sp.n_atoms(t); ++a)
    values[sp.atom_label(t, a)] = dlm::xreal_to_json(result.at_atom(t, a));
  dlm::json out;
  out["t"] = t;
  out["values"] = values;
  if (dlm::divergence_count() > 0) out["diverged"] = true;
  write_output(out_path, out.dump());
  return dlm::divergence_count() > 0 ? 3 : 0;
}

int run_certify(const SuiteOptions& sopt, const std::string& measure_desc,
                const std::string& property, long trials, unsigned long long seed,
                const std::string& extension, const std::string& out_path,
                const std::string& witness_path) {
  const auto prop = dlm::property_from_cli(property);
  if (!prop) throw dlm::ValidationError("unknown property: " + property);
  std::optional<dlm::ExtensionSide> side;
  if (extension == "upper") side = dlm::ExtensionSide::Upper;
  else if (extension == "lower") side = dlm::ExtensionSide::Lower;

  const Suite suite = load_suite(sopt);
  dlm::json verdicts = dlm::json::array();
  bool all_pass = true;
  for (size_t i = 0; i < suite.spaces.size(); ++i) {
    const dlm::FilteredSpace& sp = suite.spaces[i];
    const dlm::DynamicMeasure phi = dlm::parse_measure(measure_desc, &sp);
    dlm::ConsistencyVerdict v = dlm::run_property(phi, *prop, sp, trials, seed, side);
    v.space_label = suite.labels[i];
    verdicts.push_back(dlm::verdict_to_json(v));
    if (!v.pass) {
      all_pass = false;
      if (!witness_path.empty()) {
        std::ofstream out(witness_path);
        out << dlm::witness_file_json(v, measure_desc, sp).dump(2);
      }
      break;  // first counterexample settles the certification
    }
  }
  dlm::json out;
  out["measure"] = measure_desc;
  out["property"] = property;
  out["pass"] = all_pass;
  out["verdicts"] = verdicts;
  write_output(out_path, out.dump(2));
  return all_pass ? 0 : 1;
}

int run_taxonomy(const SuiteOptions& sopt, const std::vector<std::string>& measures,
                 long trials, unsigned long long seed, const std::string& format,
                 const std::string& out_path) {
  const Suite suite = load_suite(sopt);
  std::vector<dlm::CertificationReport> rows;
  for (const std::string& desc : measures) {
    const dlm::DynamicMeasure phi = dlm::parse_measure(desc, &suite.spaces.front());
    rows.push_back(dlm::taxonomy_report(phi, suite.spaces, suite.labels, trials, seed));
  }
  if (format == "csv") {
    write_output(out_path, dlm::taxonomy_csv(rows));
  } else if (format == "json") {
    dlm::json out = dlm::json::array();
    for (const auto& r : rows) {
      dlm::json row;
      row["measure"] = r.measure;
      for (const auto& c : r.cells) row[dlm::property_code(c.prop)] = c.pass;
      row["edges"] = r.edge_notes;
      out.push_back(row);
    }
    write_output(out_path, out.dump(2));
  } else {
    write_output(out_path, dlm::taxonomy_markdown(rows));
  }
  return 0;
}

int run_replay(const std::string& witness_path) {
  std::ifstream in(witness_path);
  if (!in) throw dlm::ValidationError("cannot open " + witness_path);
  dlm::json j;
  in >> j;

  const dlm::FilteredSpace sp = dlm::space_from_json(j.at("space_def"));
  const dlm::DynamicMeasure phi =
      dlm::parse_measure(j.at("measure_descriptor").get<std::string>(), &sp);
  const dlm::json& jw = j.at("witness");

  dlm::Witness w;
  w.kind = phi.kind();
  w.t = jw.at("t").get<int>();
  w.s = jw.at("s").get<int>();
  if (w.kind == dlm::InputKind::Variable) {
    w.x = dlm::rv_from_json(sp, jw.at("input"));
    if (jw.contains("input2")) {
      w.has_pair = true;
      w.x2 = dlm::rv_from_json(sp, jw.at("input2"));
    }
  } else {
    w.v = dlm::process_from_json(sp, jw.at("input"));
    if (jw.contains("input2")) {
      w.has_pair = true;
      w.v2 = dlm::process_from_json(sp, jw.at("input2"));
    }
  }
  const double margin = dlm::replay_witness(phi, j.at("property").get<std::string>(),
                                            j.value("direction", ""), w);
  dlm::json out;
  out["margin"] = std::isinf(margin) ? dlm::json("inf") : dlm::json(margin);
  out["confirmed"] = margin > 1e-9;
  std::cout << out.dump() << "\n";
  return margin > 1e-9 ? 0 : 1;
}

int run_rules_check(const std::string& rule_path, const SuiteOptions& sopt, long trials,
                    unsigned long long seed) {
  const dlm::UpdateRule mu = dlm::load_rule(rule_path);
  const Suite suite = load_suite(sopt);
  dlm::json out = dlm::json::array();
  bool ok = true;
  for (size_t i = 0; i < suite.spaces.size(); ++i) {
    const dlm::PropertyVerdict ax = dlm::check_rule_axioms(mu, suite.spaces[i], trials, seed);
    const dlm::PropertyVerdict pr = dlm::check_projective(mu, suite.spaces[i], trials, seed);
    dlm::json row;
    row["space"] = suite.labels[i];
    row["axioms_pass"] = ax.pass;
    row["projective"] = pr.pass;
    if (!ax.pass) row["axioms_detail"] = ax.detail;
    out.push_back(row);
    ok = ok && ax.pass;
    if (!ax.pass) break;
  }
  std::cout << out.dump(2) << "\n";
  return ok ? 0 : 1;
}

int run_duality_penalty(const std::string& space_path, const std::string& measure_desc,
                        const std::string& q_path, int t) {
  if (space_path.empty()) throw dlm::ValidationError("duality penalty needs --space");
  const dlm::FilteredSpace sp = dlm::load_space(space_path);
  dlm::PenaltyEvaluator pe{dlm::parse_measure(measure_desc, &sp), std::nullopt, 64.0, 8, 60};

  // declared density families for the coherent catalog entries
  const size_t colon = measure_desc.find(':');
  const std::string head = measure_desc.substr(0, colon);
  if (head == "wvar") {
    const double alpha = std::stod(measure_desc.substr(measure_desc.find("alpha=") + 6));
    pe.declared = dlm::DensityFamily::box(sp, 1.0 / alpha);
  } else if (head == "expectation" || measure_desc == "entropic:gamma=0") {
    pe.declared = dlm::DensityFamily::singleton(sp);
  }

  std::string path = q_path;
  if (!path.empty() && path[0] == '@') path = path.substr(1);
  const dlm::RandomVar z = dlm::load_rv(sp, path);
  const dlm::PenaltyResult r = dlm::minimal_penalty(pe, z, t);
  dlm::json values = dlm::json::object();
  for (int a = 0; a < sp.n_atoms(t); ++a)
    values[sp.atom_label(t, a)] = dlm::xreal_to_json(r.value.at_atom(t, a));
  dlm::json out;
  out["t"] = t;
  out["exact"] = r.exact;
  out["penalty"] = values;
  std::cout << out.dump() << "\n";
  return 0;
}

int run_duality_roundtrip(const SuiteOptions& sopt, double xmax, long trials,
                          unsigned long long seed) {
  const Suite suite = load_suite(sopt);
  const dlm::FilteredSpace& sp = suite.spaces.size() > 1 ? suite.spaces[1] : suite.spaces[0];
  dlm::IndexGrid grid;
  grid.x_hi = xmax;
  const dlm::DynamicMeasure idx = dlm::index_from_family(
      "exp_idx", [](double x) { return dlm::expectation_minus_process(x); }, grid);

  double worst = 0.0;
  for (double level : {0.5, 1.0, 2.0}) {
    const dlm::DynamicMeasure rec = dlm::family_from_index(idx, level);
    for (long i = 0; i < trials; ++i) {
      auto rng = dlm::trial_rng(seed, static_cast<std::uint64_t>(i));
      const dlm::AdaptedProcess v = dlm::sample_process(sp, rng);
      const int t = dlm::uniform_int(rng, 0, sp.horizon());
      const dlm::RandomVar got = rec(v, t);
      const dlm::RandomVar want =
          dlm::cond_expectation(v.tail_sum(t), t) + dlm::XReal(-level);
      for (int k = 0; k < sp.n_terminal(); ++k)
        worst = std::max(worst, dlm::abs_gap(got[k], want[k]));
    }
  }
  dlm::json out;
  out["max_deviation"] = worst;
  out["tolerance"] = 2e-4;
  out["pass"] = worst <= 2e-4;
  std::cout << out.dump() << "\n";
  return worst <= 2e-4 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"dynamic LM-measure evaluation and time-consistency certification"};
  app.require_subcommand(1);

  SuiteOptions sopt;
  std::string measure, input_path, property, format = "json", out_path, witness_path;
  std::string rule_path, q_path, extension;
  long trials = 10000;
  unsigned long long seed = 0;
  int t = 0;
  double xmax = 1e3;
  double tolerance = 1e-9;

  auto add_suite_flags = [&](CLI::App* cmd) {
    cmd->add_option("--space", sopt.space_path, "scenario-tree JSON file");
    cmd->add_option("--suite-seed", sopt.suite_seed, "seed for the random suite trees");
    cmd->add_option("--suite-random", sopt.suite_random, "number of random suite trees");
  };

  CLI::App* eval = app.add_subcommand("eval", "evaluate a measure surface");
  eval->add_option("--space", sopt.space_path)->required();
  eval->add_option("--measure", measure)->required();
  eval->add_option("--input", input_path)->required();
  eval->add_option("--t", t);
  eval->add_option("--out", out_path);

  CLI::App* certify = app.add_subcommand("certify", "certify a time-consistency property");
  certify->add_option("--measure", measure)->required();
  certify->add_option("--property", property)->required();
  certify->add_option("--trials", trials);
  certify->add_option("--seed", seed)->required();
  certify->add_option("--extension", extension)->check(CLI::IsMember({"upper", "lower"}));
  certify->add_option("--tolerance", tolerance, "certifier comparison margin");
  certify->add_option("--out", out_path);
  certify->add_option("--witness-out", witness_path);
  add_suite_flags(certify);

  CLI::App* taxonomy = app.add_subcommand("taxonomy", "full taxonomy report");
  std::vector<std::string> measures;
  bool catalog = false;
  taxonomy->add_option("--measure", measures, "measure descriptors");
  taxonomy->add_flag("--catalog", catalog, "run the whole example catalog");
  taxonomy->add_option("--trials", trials);
  taxonomy->add_option("--seed", seed)->required();
  taxonomy->add_option("--format", format)->check(CLI::IsMember({"json", "markdown", "csv"}));
  taxonomy->add_option("--tolerance", tolerance, "certifier comparison margin");
  taxonomy->add_option("--out", out_path);
  add_suite_flags(taxonomy);

  CLI::App* duality = app.add_subcommand("duality", "penalty and duality tools");
  CLI::App* penalty = duality->add_subcommand("penalty", "minimal penalty of a density");
  penalty->add_option("--space", sopt.space_path)->required();
  penalty->add_option("--measure", measure)->required();
  penalty->add_option("--q", q_path)->required();
  penalty->add_option("--t", t);
  CLI::App* roundtrip = duality->add_subcommand("roundtrip", "family-index-family round trip");
  roundtrip->add_option("--family", measure)->check(CLI::IsMember({"expgrid"}));
  roundtrip->add_option("--xmax", xmax);
  roundtrip->add_option("--trials", trials);
  roundtrip->add_option("--seed", seed);
  add_suite_flags(roundtrip);
  duality->require_subcommand(1);

  CLI::App* replay = app.add_subcommand("replay", "re-verify a stored counterexample");
  replay->add_option("--witness", witness_path)->required();

  CLI::App* rules = app.add_subcommand("rules", "update-rule tools");
  CLI::App* rules_check = rules->add_subcommand("check", "rule axioms and projectivity");
  rules_check->add_option("--rule", rule_path)->required();
  rules_check->add_option("--trials", trials);
  rules_check->add_option("--seed", seed)->required();
  add_suite_flags(rules_check);
  rules->require_subcommand(1);

  CLI11_PARSE(app, argc, argv);
  dlm::set_certifier_margin(tolerance);

  try {
    if (eval->parsed()) return run_eval(sopt.space_path, measure, input_path, t, out_path);
    if (certify->parsed())
      return run_certify(sopt, measure, property, trials, seed, extension, out_path,
                         witness_path);
    if (taxonomy->parsed()) {
      if (catalog) {
        measures = {"var:alpha=0.25",       "wvar:alpha=0.5",
                    "entropic:gamma=1",     "entropic:gamma=-1",
                    "entropic:gamma=0",     "entropic_t:g0=2,ratio=0.5",
                    "entropic_t:g0=-2,ratio=0.5", "ce:u=cubic",
                    "glr",                  "raroc:alpha=0.5",
                    "tvar_index"};
      }
      if (measures.empty())
        throw dlm::ValidationError("taxonomy needs --measure or --catalog");
      return run_taxonomy(sopt, measures, trials, seed, format, out_path);
    }
    if (replay->parsed()) return run_replay(witness_path);
    if (rules_check->parsed()) return run_rules_check(rule_path, sopt, trials, seed);
    if (penalty->parsed()) return run_duality_penalty(sopt.space_path, measure, q_path, t);
    if (roundtrip->parsed()) return run_duality_roundtrip(sopt, xmax, trials, seed);
  } catch (const dlm::ValidationError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
