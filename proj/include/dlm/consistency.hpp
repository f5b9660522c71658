#ifndef DLM_CONSISTENCY_HPP
#define DLM_CONSISTENCY_HPP

#include <optional>

#include "dlm/extensions.hpp"
#include "dlm/update_rules.hpp"

namespace dlm {

/// The nine certified time-consistency properties, in the report order
/// WA, WR, sWA, sWR, MA, MR, STR, Sub, Sup.
enum class TCProperty {
  WeakAcceptance,
  WeakRejection,
  SemiWeakAcceptance,
  SemiWeakRejection,
  MiddleAcceptance,
  MiddleRejection,
  Strong,
  Submartingale,
  Supermartingale,
};

const std::vector<TCProperty>& all_properties();
std::string property_code(TCProperty p);          // "WA", "WR", ...
std::string property_cli_name(TCProperty p);      // "weak-acceptance", ...
std::optional<TCProperty> property_from_cli(const std::string& s);

/// A stored counterexample.  Re-evaluating the stored inputs reproduces
/// the violated inequality deterministically.
struct Witness {
  InputKind kind = InputKind::Variable;
  RandomVar x;
  AdaptedProcess v;
  bool has_pair = false;   // pair-based properties (strong) carry a second input
  RandomVar x2;
  AdaptedProcess v2;
  int t = 0;
  int s = 1;
  XReal lhs, rhs;
  double margin = 0.0;
  long trial = -1;
  std::string note;
};

struct ConsistencyVerdict {
  std::string property;
  std::string direction;   // "acceptance", "rejection", "both", or ""
  std::string measure;
  std::string space_label;
  bool pass = true;
  long trials = 0;
  unsigned long long seed = 0;
  std::optional<Witness> witness;
};

// --- checks for random variables -------------------------------------------

ConsistencyVerdict check_weak(const DynamicMeasure& phi, const FilteredSpace& space,
                              Direction dir, long trials, unsigned long long seed);

ConsistencyVerdict check_martingale_tc(const DynamicMeasure& phi, const FilteredSpace& space,
                                       bool supermartingale, long trials,
                                       unsigned long long seed);

/// The extension side defaults to the direction-appropriate one (lower
/// for acceptance, upper for rejection) unless overridden.
ConsistencyVerdict check_middle(const DynamicMeasure& phi, const FilteredSpace& space,
                                Direction dir, long trials, unsigned long long seed,
                                std::optional<ExtensionSide> side = std::nullopt);

/// Two-pronged strong check: (a) recursivity through the chosen
/// LM-extension, exact for cash-additive measures; (b) direct implication
/// falsification on pairs with matched phi_s built by atom collapse and
/// by patch-and-bisect.
ConsistencyVerdict check_strong(const DynamicMeasure& phi, const FilteredSpace& space,
                                long trials, unsigned long long seed,
                                ExtensionSide side = ExtensionSide::Lower);

// --- checks for processes ---------------------------------------------------

ConsistencyVerdict check_weak_process(const DynamicMeasure& phi, const FilteredSpace& space,
                                      Direction dir, long trials, unsigned long long seed);

ConsistencyVerdict check_semiweak_process(const DynamicMeasure& phi, const FilteredSpace& space,
                                          Direction dir, long trials, unsigned long long seed);

ConsistencyVerdict check_martingale_process(const DynamicMeasure& phi, const FilteredSpace& space,
                                            bool supermartingale, long trials,
                                            unsigned long long seed);

ConsistencyVerdict check_middle_process(const DynamicMeasure& phi, const FilteredSpace& space,
                                        Direction dir, long trials, unsigned long long seed);

ConsistencyVerdict check_strong_process(const DynamicMeasure& phi, const FilteredSpace& space,
                                        long trials, unsigned long long seed);

// --- generic rule / benchmark checks ----------------------------------------

ConsistencyVerdict check_mu_tc(const DynamicMeasure& phi, const UpdateRule& mu,
                               const FilteredSpace& space, Direction dir, long trials,
                               unsigned long long seed);

ConsistencyVerdict check_benchmark(const DynamicMeasure& phi, const BenchmarkFamily& y,
                                   const FilteredSpace& space, Direction dir, long trials,
                                   unsigned long long seed);

/// Dispatcher for the nine properties; semi-weak coincides with weak for
/// variable measures.
ConsistencyVerdict run_property(const DynamicMeasure& phi, TCProperty prop,
                                const FilteredSpace& space, long trials,
                                unsigned long long seed,
                                std::optional<ExtensionSide> side = std::nullopt);

/// Re-evaluates a stored witness; returns the reproduced margin (0 when
/// the violation does not replay).
double replay_witness(const DynamicMeasure& phi, const std::string& property_code,
                      const std::string& direction, const Witness& w);

// --- taxonomy ----------------------------------------------------------------

struct CertificationReport {
  std::string measure;
  struct Cell {
    TCProperty prop;
    bool pass = true;
    std::vector<ConsistencyVerdict> per_space;
  };
  std::vector<Cell> cells;             // in the canonical property order
  PropertyProfile profile;             // extended flags on the first suite space
  std::vector<std::string> edge_notes; // implication edges exercised
};

CertificationReport taxonomy_report(const DynamicMeasure& phi,
                                    const std::vector<FilteredSpace>& suite,
                                    const std::vector<std::string>& labels, long trials,
                                    unsigned long long seed);

std::string taxonomy_markdown(const std::vector<CertificationReport>& rows);
std::string taxonomy_csv(const std::vector<CertificationReport>& rows);

} // namespace dlm

#endif
