#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rcmlab/environment.hpp"

namespace rcm {

/// Census of alpha-traps in B_n. A trap is a site whose 2d incident
/// conductances are all <= alpha. per_residue_counts[i] counts traps on the
/// class z_1 + ... + z_d = i mod k.
struct TrapReport {
  double threshold = 0.0;
  std::vector<Coords> trap_sites;
  std::vector<std::int64_t> per_residue_counts;
  int residue_modulus = 2;
  std::int64_t bad_edge_max = 0;
  int census_b = 1;

  std::string to_json(int d) const;
};

/// Exhaustive scan of B_n. k = 2 is the even/odd split; b is the box radius
/// of the bad-edge census recorded alongside (needs env radius >= n + b + 1).
TrapReport find_traps(const Environment& env, int n, double alpha, int k = 2, int b = 1);

/// max over z in B_{n+b} of the number of positive-direction edges from
/// B_b(z) with weight <= alpha. Edges outside the materialized box are not
/// counted (the precondition only guarantees radius n + b + 1).
std::int64_t bad_edge_census(const Environment& env, int n, int b, double alpha);

}  // namespace rcm
