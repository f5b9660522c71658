#ifndef DLM_UPDATE_RULES_HPP
#define DLM_UPDATE_RULES_HPP

#include <functional>
#include <optional>
#include <random>

#include "dlm/measures.hpp"

namespace dlm {

enum class Direction { Acceptance, Rejection };

/// An update rule mu_{t,s}: maps F_s-measurable extended preference
/// levels to F_t-measurable ones, local and monotone in the level.
/// Process-context rules additionally read the dividend at time t.
class UpdateRule {
public:
  struct Flags {
    bool s_invariant = false;
    bool projective = false;
    bool one_step_only = false;
    bool uses_process_context = false;
  };

  using Apply = std::function<RandomVar(const RandomVar& m, int t, int s)>;
  using ApplyCtx =
      std::function<RandomVar(const RandomVar& m, int t, int s, const AdaptedProcess& ctx)>;

  UpdateRule() = default;
  static UpdateRule plain(std::string name, Flags flags, Apply f);
  static UpdateRule with_context(std::string name, Flags flags, ApplyCtx f);

  const std::string& name() const { return name_; }
  const Flags& flags() const { return flags_; }

  RandomVar apply(const RandomVar& m, int t, int s) const;
  RandomVar apply(const RandomVar& m, int t, int s, const AdaptedProcess& ctx) const;

private:
  std::string name_;
  Flags flags_;
  Apply apply_;
  ApplyCtx apply_ctx_;
};

// Projective rule constructors (s-invariant; fix F_t-measurable levels).
UpdateRule essinf_rule();
UpdateRule esssup_rule();
UpdateRule expectation_rule();
/// Robust expectation over the box [0, 1/alpha]; min for acceptance,
/// max for rejection.
UpdateRule density_rule(double alpha, Direction dir = Direction::Acceptance);
UpdateRule density_rule(const DensityFamily& d, Direction dir = Direction::Acceptance);

/// Preference-weighting rule: alpha^{s-t} E[m|F_t] on {E >= 0} and
/// alpha^{t-s} E[m|F_t] on {E < 0}; not projective.
UpdateRule discount_rule(double alpha);

/// Generic rule descriptor used by the CLI and serialization.
UpdateRule make_rule(const std::string& kind, double alpha);

/// mu_{t,s} = mu_{t,t+1} o ... o mu_{s-1,s}; process context is threaded
/// through each one-step application.
UpdateRule nested_compose(const UpdateRule& one_step);

/// Lift a variable rule to processes: mu_{t,t+1}(m, V) = mu~(m) + f(V_t),
/// f total on the extended reals with f(0) = 0.
UpdateRule process_rule_from_rv_rule(const UpdateRule& rv_rule,
                                     std::function<XReal(XReal)> f,
                                     const std::string& f_name = "f");

/// Backward recursion phi_t = mu_{t,t+1}(phi_{t+1}) from phi_T(X) = X;
/// strongly time consistent by construction.
DynamicMeasure compose_measure_backward_variable(const UpdateRule& one_step);

/// Backward recursion phi_t = mu_{t,t+1}(phi_{t+1}(V)) + V_t from
/// phi_T(V) = V_T.
DynamicMeasure compose_measure_backward_process(const UpdateRule& one_step);

/// One-step entropic level rule m -> (1/gamma) ln E[exp(gamma m)|F_t].
UpdateRule entropic_rule(double gamma);

// ---------------------------------------------------------------------------
// Benchmark families
// ---------------------------------------------------------------------------

/// Finite generating lists per time plus the symbolic "all real constants"
/// marker; localization patches generators over the atoms of a partition.
struct BenchmarkFamily {
  std::string name;
  bool all_constants = false;
  std::vector<double> constant_levels;   // discretization used when all_constants
  std::vector<RandomVar> generators;     // applied at every t

  static BenchmarkFamily constants();
  static BenchmarkFamily zero(const FilteredSpace& space);
  static BenchmarkFamily finite(std::string name, std::vector<RandomVar> generators);
  /// Dense sampled stand-in for the full payoff space: n iid-uniform
  /// samples in [-10,10] per terminal atom.
  static BenchmarkFamily full_space(const FilteredSpace& space, int n_samples,
                                    unsigned long long seed);
};

/// All F_t-patchings of the generating list (atom-wise assignments).
/// Enumerates exhaustively up to max_out combinations and samples
/// assignments beyond that; throws when list size x atom count exceeds
/// 10^6.
std::vector<RandomVar> benchmark_localize(const BenchmarkFamily& y, const FilteredSpace& space,
                                          int t, int max_out, std::mt19937_64& rng);

/// Update rule induced by a benchmark family: on each F_t atom, the best
/// phi_t-value among localized benchmarks dominated by the level there
/// (acceptance; rejection mirrors with the worst value among dominating
/// benchmarks).  Empty candidate sets give -inf (resp. +inf).
UpdateRule rule_from_benchmark(const DynamicMeasure& phi, const BenchmarkFamily& y,
                               Direction dir);

// ---------------------------------------------------------------------------
// Rule axioms
// ---------------------------------------------------------------------------

PropertyVerdict check_rule_axioms(const UpdateRule& mu, const FilteredSpace& space, long trials,
                                  unsigned long long seed);

PropertyVerdict check_projective(const UpdateRule& mu, const FilteredSpace& space, long trials,
                                 unsigned long long seed);

} // namespace dlm

#endif
