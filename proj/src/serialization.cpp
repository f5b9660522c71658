#include "dlm/serialization.hpp"

#include <fstream>
#include <map>

namespace dlm {

json xreal_to_json(XReal v) {
  if (v.is_pos_inf()) return "inf";
  if (v.is_neg_inf()) return "-inf";
  return v.value();
}

XReal xreal_from_json(const json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return XReal::pos_inf();
    if (s == "-inf") return XReal::neg_inf();
    throw ValidationError("bad extended value: " + s);
  }
  return XReal(j.get<double>());
}

json space_to_json(const FilteredSpace& sp) {
  json j;
  j["T"] = sp.horizon();
  j["outcomes"] = sp.outcome_labels();
  j["prob"] = sp.outcome_prob();
  json filt = json::array();
  for (const auto& part : sp.outcome_partitions()) {
    json jp = json::array();
    for (const auto& atom : part) {
      json ja = json::array();
      for (int w : atom) ja.push_back(sp.outcome_labels()[w]);
      jp.push_back(ja);
    }
    filt.push_back(jp);
  }
  j["filtration"] = filt;
  return j;
}

FilteredSpace space_from_json(const json& j) {
  const int T = j.at("T").get<int>();
  const auto labels = j.at("outcomes").get<std::vector<std::string>>();
  const auto prob = j.at("prob").get<std::vector<double>>();
  std::map<std::string, int> index;
  for (size_t i = 0; i < labels.size(); ++i) index[labels[i]] = static_cast<int>(i);
  std::vector<std::vector<std::vector<int>>> partitions;
  for (const auto& jp : j.at("filtration")) {
    std::vector<std::vector<int>> part;
    for (const auto& ja : jp) {
      std::vector<int> atom;
      for (const auto& w : ja) {
        auto it = index.find(w.get<std::string>());
        if (it == index.end()) throw ValidationError("unknown outcome in filtration");
        atom.push_back(it->second);
      }
      part.push_back(std::move(atom));
    }
    partitions.push_back(std::move(part));
  }
  return FilteredSpace::build(T, labels, prob, std::move(partitions));
}

namespace {
json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  json j;
  in >> j;
  return j;
}
} // namespace

FilteredSpace load_space(const std::string& path) { return space_from_json(load_json(path)); }

json rv_to_json(const RandomVar& x) {
  const FilteredSpace& sp = x.space();
  json vals = json::object();
  const auto& terminal = sp.outcome_partitions()[sp.horizon()];
  for (int k = 0; k < x.size(); ++k)
    for (int w : terminal[k]) vals[sp.outcome_labels()[w]] = xreal_to_json(x[k]);
  return json{{"values", vals}};
}

RandomVar rv_from_json(const FilteredSpace& sp, const json& j) {
  const auto& vals = j.at("values");
  RandomVar x(sp, XReal(0.0));
  const auto& terminal = sp.outcome_partitions()[sp.horizon()];
  for (int k = 0; k < sp.n_terminal(); ++k) {
    const std::string& label = sp.outcome_labels()[terminal[k].front()];
    if (!vals.contains(label)) throw ValidationError("missing value for outcome " + label);
    x[k] = xreal_from_json(vals.at(label));
    // all outcomes of the terminal atom must agree when present
    for (int w : terminal[k]) {
      const std::string& lw = sp.outcome_labels()[w];
      if (vals.contains(lw) && xreal_from_json(vals.at(lw)) != x[k])
        throw ValidationError("values differ within terminal atom at " + lw);
    }
  }
  return x;
}

RandomVar load_rv(const FilteredSpace& sp, const std::string& path) {
  return rv_from_json(sp, load_json(path));
}

json process_to_json(const AdaptedProcess& v) {
  json j = json::array();
  for (int t = 0; t <= v.horizon(); ++t) j.push_back(rv_to_json(v[t]));
  return j;
}

AdaptedProcess process_from_json(const FilteredSpace& sp, const json& j) {
  if (!j.is_array() || static_cast<int>(j.size()) != sp.horizon() + 1)
    throw ValidationError("process file needs T+1 components");
  std::vector<RandomVar> cs;
  for (const auto& jc : j) cs.push_back(rv_from_json(sp, jc));
  return AdaptedProcess(sp, std::move(cs));  // validates measurability
}

AdaptedProcess load_process(const FilteredSpace& sp, const std::string& path) {
  return process_from_json(sp, load_json(path));
}

UpdateRule rule_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "composed") {
    const auto& inner = j.at("inner");
    if (!inner.is_array() || inner.empty())
      throw ValidationError("composed rule needs a nonempty inner list");
    std::vector<UpdateRule> rules;
    for (const auto& ji : inner) rules.push_back(rule_from_json(ji));
    if (rules.size() == 1) return nested_compose(rules.front());
    // several inner rules: step u of the span uses inner[(u - t) mod n]
    UpdateRule::Flags f;
    return UpdateRule::plain("composed", f, [rules](const RandomVar& m, int t, int s) {
      RandomVar cur = m;
      for (int u = s - 1; u >= t; --u)
        cur = rules[(u - t) % rules.size()].apply(cur, u, u + 1);
      return cur;
    });
  }
  const double alpha = j.value("alpha", j.value("gamma", 0.5));
  return make_rule(kind, alpha);
}

UpdateRule load_rule(const std::string& path) { return rule_from_json(load_json(path)); }

namespace {

std::map<std::string, std::string> parse_params(const std::string& s) {
  std::map<std::string, std::string> out;
  size_t pos = 0;
  while (pos < s.size()) {
    const size_t comma = s.find(',', pos);
    const std::string item = s.substr(pos, comma == std::string::npos ? comma : comma - pos);
    const size_t eq = item.find('=');
    if (eq == std::string::npos) throw ValidationError("bad measure parameter: " + item);
    out[item.substr(0, eq)] = item.substr(eq + 1);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

double need_num(const std::map<std::string, std::string>& p, const std::string& key) {
  auto it = p.find(key);
  if (it == p.end()) throw ValidationError("missing measure parameter: " + key);
  return std::stod(it->second);
}

} // namespace

DynamicMeasure parse_measure(const std::string& descriptor, const FilteredSpace* space) {
  const size_t colon = descriptor.find(':');
  const std::string head = descriptor.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : descriptor.substr(colon + 1);

  if (head == "glr") return glr_measure();
  if (head == "tvar_index") return tvar_index();
  if (head == "tvar_index_literal") return tvar_index(IndexConvention::Literal);
  if (head == "expectation") return expectation_measure();

  if (head == "composed") {
    if (rest.empty() || rest[0] != '@')
      throw ValidationError("composed measure needs @rulefile");
    return compose_measure_backward_variable(load_rule(rest.substr(1)));
  }

  const auto params = parse_params(rest);
  if (head == "var") return var_measure(need_num(params, "alpha"));
  if (head == "wvar") return wvar_measure(need_num(params, "alpha"));
  if (head == "raroc") return raroc_measure(need_num(params, "alpha"));
  if (head == "tvar_family") return tvar_family_member(need_num(params, "x"));
  if (head == "entropic") return entropic_measure(need_num(params, "gamma"));
  if (head == "entropic_t") {
    auto it = params.find("gammas");
    if (it != params.end()) {
      if (it->second.empty() || it->second[0] != '@')
        throw ValidationError("entropic_t:gammas expects @file");
      if (!space) throw ValidationError("entropic_t:gammas=@file needs a space");
      return entropic_nonconstant(load_process(*space, it->second.substr(1)));
    }
    return entropic_varying(need_num(params, "g0"), need_num(params, "ratio"));
  }
  if (head == "ce") {
    auto it = params.find("u");
    if (it == params.end()) throw ValidationError("ce needs u=identity|exp|cubic");
    if (it->second == "identity") return certainty_equivalent(Utility::identity());
    if (it->second == "exp") return certainty_equivalent(Utility::exponential(need_num(params, "gamma")));
    if (it->second == "cubic") return certainty_equivalent(Utility::cubic());
    throw ValidationError("unknown utility: " + it->second);
  }
  throw ValidationError("unknown measure descriptor: " + descriptor);
}

json verdict_to_json(const ConsistencyVerdict& v) {
  json j;
  j["property"] = v.property;
  j["direction"] = v.direction;
  j["measure"] = v.measure;
  if (!v.space_label.empty()) j["space"] = v.space_label;
  j["pass"] = v.pass;
  j["trials"] = v.trials;
  j["seed"] = v.seed;
  if (v.witness) {
    const Witness& w = *v.witness;
    json jw;
    jw["t"] = w.t;
    jw["s"] = w.s;
    jw["trial"] = w.trial;
    jw["lhs"] = xreal_to_json(w.lhs);
    jw["rhs"] = xreal_to_json(w.rhs);
    jw["margin"] = std::isinf(w.margin) ? json("inf") : json(w.margin);
    if (!w.note.empty()) jw["note"] = w.note;
    if (w.kind == InputKind::Variable) {
      jw["input"] = rv_to_json(w.x);
      if (w.has_pair) jw["input2"] = rv_to_json(w.x2);
    } else {
      jw["input"] = process_to_json(w.v);
      if (w.has_pair) jw["input2"] = process_to_json(w.v2);
    }
    j["witness"] = jw;
  }
  return j;
}

json witness_file_json(const ConsistencyVerdict& v, const std::string& measure_descriptor,
                       const FilteredSpace& space) {
  json j = verdict_to_json(v);
  j["measure_descriptor"] = measure_descriptor;
  j["space_def"] = space_to_json(space);
  return j;
}

} // namespace dlm
