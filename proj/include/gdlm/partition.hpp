// SPDX-License-Identifier: MIT
#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "gdlm/matching.hpp"
#include "gdlm/moments.hpp"
#include "gdlm/pqp.hpp"

namespace gdlm {

// Anchor index sets (one per tensor mode) plus r partition triples, each
// triple holding its anchor set first followed by its share of the
// remaining variables. Within a triple the three sets are pairwise
// disjoint; every non-anchor variable appears in exactly one partition.
struct PartitionPlan {
  std::array<std::vector<int>, 3> anchors;
  std::vector<std::array<std::vector<int>, 3>> partitions;

  int r() const { return static_cast<int>(partitions.size()); }
  void validate(int p) const;
};

// First ceil(k / d_min) variables per mode.
std::array<std::vector<int>, 3> default_anchor_sets(int p, int k,
                                                    const std::vector<int>& categories);

// r such that each partition carries about max(1, ceil(k / d_min))
// non-anchor variables per mode.
int default_partition_count(int p, int k, const std::vector<int>& categories,
                            const std::array<std::vector<int>, 3>& anchors);

// Shuffles the non-anchor variables by seed and deals them round-robin into
// the 3r (partition, mode) slots.
PartitionPlan build_partition_plan(int p, int k, const std::vector<int>& categories,
                                   const std::array<std::vector<int>, 3>& anchor_sets,
                                   int r, std::uint64_t seed);

enum class Matcher { procrustes, smallest_angle };

struct FitOptions {
  FactorizeOptions factorize;
  Matcher matcher = Matcher::procrustes;
  int restarts = 3;   // random restarts per partition, best objective kept
  int workers = 0;    // concurrent partition fits; 0 = all hardware threads
};

// Sliced per-variable parameter estimates from one partition's
// factorization, plus the stacked anchor matrix used for matching.
struct PartitionOutput {
  std::array<std::vector<int>, 3> vars;
  std::vector<std::pair<int, MatrixXd>> thetas;  // variable index -> d x k block
  MatrixXd anchor_stack;                         // unit Euclidean columns
  VectorXd weights;
  bool converged = false;
  double objective = 0.0;
};

struct StitchOutcome {
  ModelParams params;               // alpha absent; thetas for all covered variables
  std::vector<MatchReport> reports; // element q aligns partition q to partition 0
  std::vector<VectorXd> weights;    // per-partition Kruskal weights, aligned
};

// Partition 0 fixes the component labels; every later partition is aligned
// to it by matching the stacked anchor matrices. Throws when a matching
// produces no permutation, naming the partition.
StitchOutcome stitch(const std::vector<PartitionOutput>& outputs, Matcher matcher);

struct FitResult {
  ModelParams params;                // alpha absent, alpha0 recorded
  std::vector<MatchReport> reports;
  std::vector<bool> converged;       // per partition
  std::vector<double> objectives;    // best factorization objective per partition
  std::vector<VectorXd> weights;     // aligned Kruskal weights per partition
  MatrixXd anchor_matrix;            // partition 0's normalized anchor stack
  bool anchor_rank_warning = false;  // sigma_k of the anchor stack <= 1e-6
};

// Builds each partition's empirical block tensor, factorizes it (seeded
// restarts), slices the stacked factors into per-variable blocks and
// stitches. Partitions run concurrently up to opts.workers; per-partition
// seeds derive from (seed, partition content, restart), so neither the
// worker count nor the partition order affects a partition's factors.
FitResult fit_partitioned(const Dataset& data, int k, double alpha0,
                          const PartitionPlan& plan, const FitOptions& opts);

// Same pipeline on caller-provided block tensors (e.g. exact population
// blocks); blocks[q] must match plan.partitions[q] and `categories`.
FitResult fit_partitioned_blocks(const std::vector<Tensor3>& blocks,
                                 const std::vector<int>& categories, int k,
                                 const PartitionPlan& plan, const FitOptions& opts);

// Seed for (fit seed, partition content, restart); exposed so tests can
// reproduce a single partition's factorization exactly.
std::uint64_t partition_restart_seed(std::uint64_t seed,
                                     const std::array<std::vector<int>, 3>& triple,
                                     int restart);

}  // namespace gdlm
