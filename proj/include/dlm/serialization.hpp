#ifndef DLM_SERIALIZATION_HPP
#define DLM_SERIALIZATION_HPP

#include <json.hpp>

#include "dlm/consistency.hpp"
#include "dlm/update_rules.hpp"

namespace dlm {

using json = nlohmann::json;

// Scenario-tree files:
// {"T":2,"outcomes":[...],"prob":[...],"filtration":[[[...]],...]}
json space_to_json(const FilteredSpace& space);
FilteredSpace space_from_json(const json& j);
FilteredSpace load_space(const std::string& path);

// Random variables: {"values":{"w1":1.0,"w2":"inf",...}}
json rv_to_json(const RandomVar& x);
RandomVar rv_from_json(const FilteredSpace& space, const json& j);
RandomVar load_rv(const FilteredSpace& space, const std::string& path);

// Processes: array of T+1 random-variable objects; adaptedness is
// validated on load.
json process_to_json(const AdaptedProcess& v);
AdaptedProcess process_from_json(const FilteredSpace& space, const json& j);
AdaptedProcess load_process(const FilteredSpace& space, const std::string& path);

// Rule descriptors: {"kind":"density","alpha":0.5}, {"kind":"discount",...},
// {"kind":"composed","inner":[...]}.
UpdateRule rule_from_json(const json& j);
UpdateRule load_rule(const std::string& path);

// Measure descriptors: var:alpha=0.25, wvar:alpha=0.5, entropic:gamma=1.0,
// entropic_t:g0=2,ratio=0.5, entropic_t:gammas=@file, ce:u=exp,gamma=1.0,
// glr, raroc:alpha=0.5, tvar_index, composed:@rulefile.
DynamicMeasure parse_measure(const std::string& descriptor, const FilteredSpace* space = nullptr);

json verdict_to_json(const ConsistencyVerdict& v);

// Self-contained witness file: measure, property, space and inputs.
json witness_file_json(const ConsistencyVerdict& v, const std::string& measure_descriptor,
                       const FilteredSpace& space);

json xreal_to_json(XReal v);
XReal xreal_from_json(const json& j);

} // namespace dlm

#endif
