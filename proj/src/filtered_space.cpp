#include "dlm/filtered_space.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace dlm {

namespace {

constexpr double kProbTol = 1e-12;

void check_partition_covers(const std::vector<std::vector<int>>& part, int n, int t) {
  std::vector<int> seen(n, 0);
  for (const auto& atom : part) {
    if (atom.empty())
      throw ValidationError("empty atom in partition at t=" + std::to_string(t));
    for (int w : atom) {
      if (w < 0 || w >= n)
        throw ValidationError("outcome index out of range in partition at t=" + std::to_string(t));
      if (seen[w]++)
        throw ValidationError("outcome repeated in partition at t=" + std::to_string(t));
    }
  }
  if (std::accumulate(seen.begin(), seen.end(), 0) != n)
    throw ValidationError("partition at t=" + std::to_string(t) + " does not cover the outcome set");
}

} // namespace

FilteredSpace FilteredSpace::build(int horizon,
                                   std::vector<std::string> outcome_labels,
                                   std::vector<double> probabilities,
                                   std::vector<std::vector<std::vector<int>>> partitions) {
  if (horizon < 1) throw ValidationError("horizon must be >= 1");
  const int n = static_cast<int>(outcome_labels.size());
  if (n < 1) throw ValidationError("outcome set is empty");
  if (static_cast<int>(probabilities.size()) != n)
    throw ValidationError("probability vector size mismatch");
  if (static_cast<int>(partitions.size()) != horizon + 1)
    throw ValidationError("need exactly T+1 partitions");

  double total = 0.0;
  for (double p : probabilities) {
    if (!(p > 0.0)) throw ValidationError("probabilities must be strictly positive");
    total += p;
  }
  if (std::abs(total - 1.0) > kProbTol)
    throw ValidationError("probabilities do not sum to 1");

  {
    std::set<std::string> uniq(outcome_labels.begin(), outcome_labels.end());
    if (static_cast<int>(uniq.size()) != n)
      throw ValidationError("outcome labels must be distinct");
  }

  for (auto& part : partitions)
    for (auto& atom : part) std::sort(atom.begin(), atom.end());
  for (int t = 0; t <= horizon; ++t) check_partition_covers(partitions[t], n, t);

  if (partitions[0].size() != 1)
    throw ValidationError("F_0 must be the trivial partition");

  // outcome -> atom index at each t, then refinement: every atom at t+1
  // must sit inside a single atom at t.
  std::vector<std::vector<int>> outcome_atom(horizon + 1, std::vector<int>(n, -1));
  for (int t = 0; t <= horizon; ++t)
    for (int a = 0; a < static_cast<int>(partitions[t].size()); ++a)
      for (int w : partitions[t][a]) outcome_atom[t][w] = a;
  for (int t = 0; t < horizon; ++t)
    for (const auto& atom : partitions[t + 1]) {
      const int parent = outcome_atom[t][atom.front()];
      for (int w : atom)
        if (outcome_atom[t][w] != parent)
          throw ValidationError("partition at t=" + std::to_string(t + 1) +
                                " does not refine partition at t=" + std::to_string(t));
    }

  FilteredSpace s;
  s.horizon_ = horizon;
  s.labels_ = std::move(outcome_labels);
  s.prob_ = std::move(probabilities);
  s.outcome_partitions_ = partitions;

  const auto& terminal = partitions[horizon];
  const int m = static_cast<int>(terminal.size());
  std::vector<int> terminal_of_outcome(n, -1);
  s.terminal_prob_.assign(m, 0.0);
  for (int k = 0; k < m; ++k)
    for (int w : terminal[k]) {
      terminal_of_outcome[w] = k;
      s.terminal_prob_[k] += s.prob_[w];
    }

  s.atoms_.resize(horizon + 1);
  s.atom_of_.assign(horizon + 1, std::vector<int>(m, -1));
  s.atom_prob_.resize(horizon + 1);
  for (int t = 0; t <= horizon; ++t) {
    const auto& part = partitions[t];
    s.atoms_[t].resize(part.size());
    s.atom_prob_[t].assign(part.size(), 0.0);
    for (int a = 0; a < static_cast<int>(part.size()); ++a) {
      std::set<int> members;
      for (int w : part[a]) members.insert(terminal_of_outcome[w]);
      s.atoms_[t][a].assign(members.begin(), members.end());
      for (int k : s.atoms_[t][a]) {
        s.atom_of_[t][k] = a;
        s.atom_prob_[t][a] += s.terminal_prob_[k];
      }
    }
  }
  return s;
}

std::string FilteredSpace::atom_label(int t, int a) const {
  if (n_atoms(t) == 1) return "*";
  const auto& part = outcome_partitions_[t][a];
  std::string out;
  for (size_t i = 0; i < part.size(); ++i) {
    if (i) out += ",";
    out += labels_[part[i]];
  }
  return out;
}

FilteredSpace make_tree2() {
  return FilteredSpace::build(1, {"u", "d"}, {0.5, 0.5},
                              {{{0, 1}}, {{0}, {1}}});
}

FilteredSpace make_tree4() {
  return FilteredSpace::build(
      2, {"w1", "w2", "w3", "w4"}, {0.25, 0.25, 0.25, 0.25},
      {{{0, 1, 2, 3}}, {{0, 1}, {2, 3}}, {{0}, {1}, {2}, {3}}});
}

} // namespace dlm
