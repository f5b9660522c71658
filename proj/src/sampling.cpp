#include "dlm/sampling.hpp"

#include <algorithm>
#include <cmath>

namespace dlm {

std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 of (seed, index) seeds the stream; avoids correlated trials
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z = z ^ (z >> 31);
  return std::mt19937_64(z);
}

double u01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * u01(rng);
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

namespace {

double grid_value(std::mt19937_64& rng) {
  static const double grid[] = {-3, -2, -1, 0, 1, 2, 3};
  return grid[rng() % 7];
}

double half_grid_value(std::mt19937_64& rng) {
  return 0.5 * uniform_int(rng, -6, 6);
}

} // namespace

RandomVar sample_rv(const FilteredSpace& space, std::mt19937_64& rng) {
  const int m = space.n_terminal();
  RandomVar x(space, XReal(0.0));
  switch (rng() % 6) {
    case 0:  // plain uniform
      for (int k = 0; k < m; ++k) x[k] = XReal(uniform(rng, -10.0, 10.0));
      break;
    case 1:  // integer grid: plenty of ties
      for (int k = 0; k < m; ++k) x[k] = XReal(grid_value(rng));
      break;
    case 2:  // half-integer grid
      for (int k = 0; k < m; ++k) x[k] = XReal(half_grid_value(rng));
      break;
    case 3: {  // scaled indicator of an atom plus a base level
      const int t = uniform_int(rng, 0, space.horizon());
      const int a = uniform_int(rng, 0, space.n_atoms(t) - 1);
      const double base = half_grid_value(rng);
      const double bump = uniform(rng, -10.0, 10.0);
      for (int k = 0; k < m; ++k)
        x[k] = XReal(base + (space.atom_of(t, k) == a ? bump : 0.0));
      break;
    }
    case 4: {  // near-constant with one spiked terminal atom
      const double base = grid_value(rng);
      for (int k = 0; k < m; ++k) x[k] = XReal(base);
      x[uniform_int(rng, 0, m - 1)] = XReal(uniform(rng, -40.0, 40.0));
      break;
    }
    default:  // uniform with sparse grid entries
      for (int k = 0; k < m; ++k)
        x[k] = XReal((rng() % 3) ? uniform(rng, -10.0, 10.0) : grid_value(rng));
      break;
  }
  return x;
}

RandomVar sample_rv_extended(const FilteredSpace& space, std::mt19937_64& rng, double p_inf) {
  RandomVar x = sample_rv(space, rng);
  for (int k = 0; k < x.size(); ++k)
    if (u01(rng) < p_inf)
      x[k] = (rng() % 2) ? XReal::pos_inf() : XReal::neg_inf();
  return x;
}

RandomVar sample_rv_measurable(const FilteredSpace& space, int t, std::mt19937_64& rng) {
  RandomVar x(space, XReal(0.0));
  for (const auto& atom : space.atoms(t)) {
    const XReal v((rng() % 2) ? uniform(rng, -10.0, 10.0) : grid_value(rng));
    for (int k : atom) x[k] = v;
  }
  return x;
}

AdaptedProcess sample_process(const FilteredSpace& space, std::mt19937_64& rng) {
  const int T = space.horizon();
  std::vector<RandomVar> cs;
  cs.reserve(T + 1);
  const int mode = static_cast<int>(rng() % 4);
  for (int t = 0; t <= T; ++t) cs.push_back(sample_rv_measurable(space, t, rng));
  switch (mode) {
    case 1: {  // single payment
      const int keep = uniform_int(rng, 0, T);
      for (int t = 0; t <= T; ++t)
        if (t != keep) cs[t] = RandomVar(space, XReal(0.0));
      break;
    }
    case 2: {  // deterministic signed dividend at one time, random tail
      const int at = uniform_int(rng, 0, T - 1);
      cs[at] = RandomVar(space, XReal(uniform(rng, -8.0, 8.0)));
      break;
    }
    case 3:  // small-grid dividends everywhere
      for (int t = 0; t <= T; ++t) {
        RandomVar v(space, XReal(0.0));
        for (const auto& atom : space.atoms(t)) {
          const XReal g(grid_value(rng));
          for (int k : atom) v[k] = g;
        }
        cs[t] = v;
      }
      break;
    default:
      break;
  }
  return AdaptedProcess(space, std::move(cs));
}

std::pair<int, int> sample_t_s(const FilteredSpace& space, std::mt19937_64& rng) {
  const int t = uniform_int(rng, 0, space.horizon() - 1);
  const int s = uniform_int(rng, t + 1, space.horizon());
  return {t, s};
}

FilteredSpace random_tree(std::uint64_t seed, int depth, int max_branch) {
  std::mt19937_64 rng = trial_rng(seed, 0x7ee5);
  // decide the branching structure: at each level every node gets
  // 1..max_branch children (1 = carries through), at least one real
  // split per level
  std::vector<std::vector<int>> branch;  // branch[level] = children count per node
  int nodes = 1;
  for (int d = 0; d < depth; ++d) {
    std::vector<int> row(nodes);
    bool any_split = false;
    for (int i = 0; i < nodes; ++i) {
      int b = uniform_int(rng, 1, max_branch);
      if (b == 1 && u01(rng) < 0.7) b = uniform_int(rng, 2, max_branch);
      row[i] = b;
      any_split = any_split || b > 1;
    }
    if (!any_split) row[uniform_int(rng, 0, nodes - 1)] = 2;
    int total = 0;
    for (int b : row) total += b;
    branch.push_back(row);
    nodes = total;
  }

  // leaves get small-rational weights; propagate partitions upward
  const int n_leaves = nodes;
  std::vector<double> w(n_leaves);
  double total_w = 0.0;
  const bool uniform_probs = u01(rng) < 0.25;
  for (int i = 0; i < n_leaves; ++i) {
    w[i] = uniform_probs ? 1.0 : static_cast<double>(uniform_int(rng, 1, 4));
    total_w += w[i];
  }
  std::vector<double> prob(n_leaves);
  for (int i = 0; i < n_leaves; ++i) prob[i] = w[i] / total_w;

  // build partitions from the leaf level back to the root
  std::vector<std::vector<std::vector<int>>> partitions(depth + 1);
  std::vector<std::vector<int>> cur(n_leaves);
  for (int i = 0; i < n_leaves; ++i) cur[i] = {i};
  partitions[depth] = cur;
  for (int d = depth - 1; d >= 0; --d) {
    const auto& row = branch[d];
    std::vector<std::vector<int>> merged;
    size_t idx = 0;
    for (int b : row) {
      std::vector<int> atom;
      for (int j = 0; j < b; ++j) {
        atom.insert(atom.end(), cur[idx].begin(), cur[idx].end());
        ++idx;
      }
      std::sort(atom.begin(), atom.end());
      merged.push_back(std::move(atom));
    }
    partitions[d] = merged;
    cur = partitions[d];
  }

  std::vector<std::string> labels(n_leaves);
  for (int i = 0; i < n_leaves; ++i) labels[i] = "w" + std::to_string(i + 1);
  return FilteredSpace::build(depth, std::move(labels), std::move(prob), std::move(partitions));
}

std::vector<FilteredSpace> certification_suite(std::uint64_t seed, int n_random) {
  std::vector<FilteredSpace> suite;
  suite.push_back(make_tree2());
  suite.push_back(make_tree4());
  for (int i = 0; i < n_random; ++i)
    suite.push_back(random_tree(seed + 101 * i, 3, 3));
  return suite;
}

} // namespace dlm
