// SPDX-License-Identifier: MIT
#include "gdlm/partition.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "gdlm/rng.hpp"

namespace gdlm {

namespace {

int min_category(const std::vector<int>& categories) {
  if (categories.empty()) throw std::invalid_argument("categories must be non-empty");
  return *std::min_element(categories.begin(), categories.end());
}

}  // namespace

void PartitionPlan::validate(int p) const {
  std::vector<int> owner_count(p, 0);
  std::vector<char> is_anchor(p, 0);
  for (int m = 0; m < 3; ++m)
    for (int v : anchors[m]) {
      if (v < 0 || v >= p) throw std::invalid_argument("PartitionPlan: anchor out of range");
      if (is_anchor[v]) throw std::invalid_argument("PartitionPlan: anchors overlap");
      is_anchor[v] = 1;
    }
  if (partitions.empty()) throw std::invalid_argument("PartitionPlan: no partitions");
  for (const auto& triple : partitions) {
    std::vector<char> seen(p, 0);
    for (int m = 0; m < 3; ++m) {
      // Anchor set must be a prefix of its mode's set.
      if (triple[m].size() < anchors[m].size())
        throw std::invalid_argument("PartitionPlan: triple does not contain its anchor set");
      for (std::size_t i = 0; i < anchors[m].size(); ++i)
        if (triple[m][i] != anchors[m][i])
          throw std::invalid_argument("PartitionPlan: triple does not contain its anchor set");
      for (int v : triple[m]) {
        if (v < 0 || v >= p) throw std::invalid_argument("PartitionPlan: index out of range");
        if (seen[v]) throw std::invalid_argument("PartitionPlan: sets within a triple overlap");
        seen[v] = 1;
        if (!is_anchor[v]) owner_count[v]++;
      }
    }
  }
  for (int v = 0; v < p; ++v) {
    const int expected = is_anchor[v] ? 0 : 1;
    if (owner_count[v] != expected)
      throw std::invalid_argument("PartitionPlan: variable " + std::to_string(v) +
                                  " not covered exactly once");
  }
}

std::array<std::vector<int>, 3> default_anchor_sets(int p, int k,
                                                    const std::vector<int>& categories) {
  const int dmin = min_category(categories);
  const int a = (k + dmin - 1) / dmin;
  if (3 * a > p)
    throw std::invalid_argument("default_anchor_sets: too few variables for anchors");
  std::array<std::vector<int>, 3> anchors;
  for (int m = 0; m < 3; ++m) {
    anchors[m].resize(a);
    std::iota(anchors[m].begin(), anchors[m].end(), m * a);
  }
  return anchors;
}

int default_partition_count(int p, int k, const std::vector<int>& categories,
                            const std::array<std::vector<int>, 3>& anchors) {
  const int dmin = min_category(categories);
  const int per_mode = std::max(1, (k + dmin - 1) / dmin);
  int anchor_total = 0;
  for (const auto& a : anchors) anchor_total += static_cast<int>(a.size());
  const int rest = p - anchor_total;
  return std::max(1, (rest + 3 * per_mode - 1) / (3 * per_mode));
}

PartitionPlan build_partition_plan(int p, int k, const std::vector<int>& categories,
                                   const std::array<std::vector<int>, 3>& anchor_sets,
                                   int r, std::uint64_t seed) {
  if (p < 1 || k < 1) throw std::invalid_argument("build_partition_plan: p, k must be positive");
  if (static_cast<int>(categories.size()) != p)
    throw std::invalid_argument("build_partition_plan: categories length differs from p");
  if (r < 1) throw std::invalid_argument("build_partition_plan: r must be >= 1");

  std::vector<char> is_anchor(p, 0);
  int anchor_total = 0;
  for (int m = 0; m < 3; ++m) {
    if (anchor_sets[m].empty())
      throw std::invalid_argument("build_partition_plan: empty anchor set");
    int cat_sum = 0;
    for (int v : anchor_sets[m]) {
      if (v < 0 || v >= p)
        throw std::invalid_argument("build_partition_plan: anchor index out of range");
      if (is_anchor[v])
        throw std::invalid_argument("build_partition_plan: anchor sets must be disjoint");
      is_anchor[v] = 1;
      cat_sum += categories[v];
      ++anchor_total;
    }
    if (cat_sum < k)
      throw std::runtime_error(
          "build_partition_plan: anchor categories in one mode sum below k; the stacked "
          "anchor factor cannot have full column rank");
  }
  if (anchor_total > p)
    throw std::invalid_argument("build_partition_plan: more anchors than variables");

  std::vector<int> rest;
  for (int v = 0; v < p; ++v)
    if (!is_anchor[v]) rest.push_back(v);

  SplitMix64 rng(derive_stream(seed, "plan"));
  for (std::size_t i = rest.size(); i > 1; --i)
    std::swap(rest[i - 1], rest[rng.next_below(i)]);

  PartitionPlan plan;
  plan.anchors = anchor_sets;
  plan.partitions.assign(r, {anchor_sets[0], anchor_sets[1], anchor_sets[2]});
  // Deal into the 3r (partition, mode) slots: slot s -> partition s/3, mode s%3.
  for (std::size_t c = 0; c < rest.size(); ++c) {
    const std::size_t slot = c % (3 * static_cast<std::size_t>(r));
    plan.partitions[slot / 3][slot % 3].push_back(rest[c]);
  }
  plan.validate(p);
  return plan;
}

std::uint64_t partition_restart_seed(std::uint64_t seed,
                                     const std::array<std::vector<int>, 3>& triple,
                                     int restart) {
  // Hash the partition's variable content so that reordering partitions in
  // a plan permutes labels but does not change any factorization.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto mix_int = [&h](int v) {
    for (int b = 0; b < 4; ++b) {
      h ^= static_cast<unsigned char>(v >> (8 * b));
      h *= 0x100000001b3ULL;
    }
  };
  for (int m = 0; m < 3; ++m) {
    mix_int(-1 - m);  // mode separator
    for (int v : triple[m]) mix_int(v);
  }
  return derive_stream(seed, "partition", h * 1000003ULL + static_cast<std::uint64_t>(restart));
}

namespace {

PartitionOutput fit_one_partition(const Tensor3& block,
                                  const std::array<std::vector<int>, 3>& triple,
                                  const std::vector<int>& categories,
                                  const std::array<std::vector<int>, 3>& anchors, int k,
                                  const FitOptions& opts) {
  FactorizeResult best;
  bool have = false;
  for (int restart = 0; restart < std::max(1, opts.restarts); ++restart) {
    FactorizeOptions fo = opts.factorize;
    fo.seed = partition_restart_seed(opts.factorize.seed, triple, restart);
    fo.track_objective = false;
    FactorizeResult res = factorize(block, k, fo);
    if (!have || res.objective < best.objective) {
      best = std::move(res);
      have = true;
    }
  }

  PartitionOutput out;
  out.vars = triple;
  out.converged = best.converged;
  out.objective = best.objective;
  out.weights = best.factors.weights;

  const MatrixXd* factors[3] = {&best.factors.A, &best.factors.B, &best.factors.C};
  int anchor_rows = 0;
  for (int m = 0; m < 3; ++m)
    for (int v : anchors[m]) anchor_rows += categories[v];
  MatrixXd stack(anchor_rows, k);
  int stack_off = 0;
  for (int m = 0; m < 3; ++m) {
    int off = 0;
    for (std::size_t i = 0; i < triple[m].size(); ++i) {
      const int v = triple[m][i];
      const int d = categories[v];
      MatrixXd th = factors[m]->middleRows(off, d);
      if (i < anchors[m].size()) {
        stack.middleRows(stack_off, d) = th;
        stack_off += d;
      }
      for (int h = 0; h < k; ++h) {
        const double s = th.col(h).sum();
        if (s > 0.0) th.col(h) /= s;
      }
      out.thetas.emplace_back(v, std::move(th));
      off += d;
    }
  }
  out.anchor_stack = normalize_columns(stack);
  return out;
}

}  // namespace

StitchOutcome stitch(const std::vector<PartitionOutput>& outputs, Matcher matcher) {
  if (outputs.empty()) throw std::invalid_argument("stitch: no partition outputs");
  const int k = static_cast<int>(outputs[0].anchor_stack.cols());

  int max_var = -1;
  for (const auto& o : outputs)
    for (const auto& [v, th] : o.thetas) max_var = std::max(max_var, v);

  StitchOutcome out;
  out.params.thetas.resize(max_var + 1);
  out.params.alpha = VectorXd();
  out.reports.resize(outputs.size());
  out.weights.resize(outputs.size());

  std::vector<char> assigned(max_var + 1, 0);
  for (std::size_t q = 0; q < outputs.size(); ++q) {
    Permutation psi = Permutation::identity(k);
    if (q == 0) {
      MatchReport rep;
      rep.permutation = psi;
      rep.valid = true;
      rep.score = 1.0;
      out.reports[0] = rep;
    } else {
      const MatchReport rep =
          matcher == Matcher::procrustes
              ? match_procrustes(outputs[0].anchor_stack, Permutation::identity(k),
                                 outputs[q].anchor_stack)
              : match_smallest_angle(outputs[0].anchor_stack, Permutation::identity(k),
                                     outputs[q].anchor_stack);
      out.reports[q] = rep;
      if (!rep.permutation)
        throw std::runtime_error("stitch: matching failed for partition " + std::to_string(q));
      psi = *rep.permutation;
    }
    for (const auto& [v, th] : outputs[q].thetas) {
      if (assigned[v]) continue;  // anchors keep partition 0's estimate
      out.params.thetas[v] = apply_permutation(psi, th);
      assigned[v] = 1;
    }
    if (outputs[q].weights.size() == k) {
      VectorXd w(k);
      for (int h = 0; h < k; ++h) w[h] = outputs[q].weights[psi.psi[h]];
      out.weights[q] = w;
    }
  }
  for (int v = 0; v <= max_var; ++v)
    if (!assigned[v]) throw std::runtime_error("stitch: variable " + std::to_string(v) +
                                               " has no estimate");
  return out;
}

namespace {

FitResult fit_partitioned_impl(const std::vector<Tensor3>* blocks, const Dataset* data,
                               const std::vector<int>& categories, int k, double alpha0,
                               const PartitionPlan& plan, const FitOptions& opts) {
  plan.validate(static_cast<int>(categories.size()));
  if (k < 1) throw std::invalid_argument("fit_partitioned: k must be >= 1");
  const int r = plan.r();
  const int workers = opts.workers > 0 ? opts.workers : omp_get_max_threads();

  std::vector<PartitionOutput> outputs(r);
  std::vector<std::string> errors(r);
  const auto fit_one = [&](int q) {
    try {
      const auto& triple = plan.partitions[q];
      Tensor3 block = blocks ? (*blocks)[q]
                             : block_tensor(*data, triple[0], triple[1], triple[2], alpha0);
      outputs[q] = fit_one_partition(block, triple, categories, plan.anchors, k, opts);
    } catch (const std::exception& e) {
      errors[q] = e.what();
    }
  };
  const int team = std::max(1, std::min(workers, r));
  if (team == 1) {
    for (int q = 0; q < r; ++q) fit_one(q);
  } else {
#pragma omp parallel for schedule(dynamic) num_threads(team)
    for (int q = 0; q < r; ++q) fit_one(q);
  }
  for (int q = 0; q < r; ++q)
    if (!errors[q].empty())
      throw std::runtime_error("fit_partitioned: partition " + std::to_string(q) + ": " +
                               errors[q]);

  StitchOutcome st = stitch(outputs, opts.matcher);

  FitResult res;
  res.params = std::move(st.params);
  res.params.alpha0 = alpha0;
  res.reports = std::move(st.reports);
  res.weights = std::move(st.weights);
  res.converged.resize(r);
  res.objectives.resize(r);
  for (int q = 0; q < r; ++q) {
    res.converged[q] = outputs[q].converged;
    res.objectives[q] = outputs[q].objective;
  }
  res.anchor_matrix = outputs[0].anchor_stack;
  Eigen::JacobiSVD<MatrixXd> svd(res.anchor_matrix);
  res.anchor_rank_warning = svd.singularValues()(k - 1) <= 1e-6;
  return res;
}

}  // namespace

FitResult fit_partitioned(const Dataset& data, int k, double alpha0,
                          const PartitionPlan& plan, const FitOptions& opts) {
  data.validate();
  if (!(alpha0 > 0.0)) throw std::invalid_argument("fit_partitioned: alpha0 must be positive");
  return fit_partitioned_impl(nullptr, &data, data.categories, k, alpha0, plan, opts);
}

FitResult fit_partitioned_blocks(const std::vector<Tensor3>& blocks,
                                 const std::vector<int>& categories, int k,
                                 const PartitionPlan& plan, const FitOptions& opts) {
  if (static_cast<int>(blocks.size()) != plan.r())
    throw std::invalid_argument("fit_partitioned_blocks: block count differs from plan");
  for (int q = 0; q < plan.r(); ++q) {
    const auto& triple = plan.partitions[q];
    int D[3] = {0, 0, 0};
    for (int m = 0; m < 3; ++m)
      for (int v : triple[m]) D[m] += categories[v];
    if (blocks[q].d1() != D[0] || blocks[q].d2() != D[1] || blocks[q].d3() != D[2])
      throw std::invalid_argument("fit_partitioned_blocks: block " + std::to_string(q) +
                                  " shape differs from plan");
  }
  // alpha0 is irrelevant when blocks are prebuilt; recorded as 0 in params.
  FitResult res = fit_partitioned_impl(&blocks, nullptr, categories, k, 0.0, plan, opts);
  return res;
}

}  // namespace gdlm
