#pragma once

// Primal network simplex for the uncapacitated transportation problem between
// k supply nodes (rows) and m demand nodes (columns) with cost |u_i - x_j|^2 / 2.
//
// The spanning tree is kept in the parent/thread/succ_num form and the leaving
// arc is chosen so the tree stays strongly feasible, which rules out cycling.
// An artificial root joins every node through an artificial arc.
//
// Small instances carry every arc of the complete bipartite graph. Large ones
// start from a sparse candidate set: when no candidate prices out, all k*m arcs
// are priced and the violating ones join the set, until none is left. The tree
// stays a valid basis while arcs are added, so the result is an exact optimum
// of the full problem either way.

#include <cstdint>
#include <limits>
#include <vector>

#include "vqar/points.hpp"
#include "vqar/transport.hpp"

namespace vqar::detail {

class NetworkSimplex {
 public:
  using Flow = std::int64_t;

  /// `supply` (size k) and `demand` (size m) must have equal sums.
  ///
  /// With `row_hint` (approximate row potentials, e.g. from a subsampled
  /// problem) the initial tree hangs every column under the row minimizing
  /// c_ij + hint_i instead of starting from the all-artificial tree.
  NetworkSimplex(const PointSet& rows, const PointSet& cols, std::vector<Flow> supply,
                 std::vector<Flow> demand, PivotRule rule,
                 const std::vector<double>* row_hint = nullptr);

  /// Runs to optimality. Throws SolverFailure if the artificial arcs keep flow.
  void run();

  struct Arc {
    std::size_t row;
    std::size_t col;
    Flow flow;
  };
  /// Real tree arcs with positive flow, sorted by (row, col).
  std::vector<Arc> support() const;

  /// Potentials in the convention c_ij + pi_i - pi_{k+j} >= 0.
  const std::vector<double>& potentials() const { return pi_; }
  std::size_t pivots() const { return pivots_; }

  /// Complete graphs up to this many arcs are built explicitly.
  static constexpr std::int64_t kDenseLimit = 200'000;
  /// Violating arcs added per column in a pricing round.
  static constexpr std::int64_t kArcsPerColumn = 8;

 private:
  enum : int { kUp = 1, kDown = -1 };
  static constexpr std::int64_t kArtificial = std::int64_t{1} << 62;

  double real_cost(std::int64_t i, std::int64_t j) const {
    const double* u = row_data_ + i * dim_;
    const double* x = col_data_ + j * dim_;
    if (dim_ == 2) {
      const double a = u[0] - x[0], b = u[1] - x[1];
      return 0.5 * (a * a + b * b);
    }
    double s = 0.0;
    for (std::int64_t c = 0; c < dim_; ++c) s += (u[c] - x[c]) * (u[c] - x[c]);
    return 0.5 * s;
  }
  // Artificial arc of node u runs u -> root when art_up_[u], else root -> u.
  double cost(std::int64_t arc) const {
    if (arc < kArtificial) return real_cost(arc_row_[arc], arc_col_[arc]);
    return art_cost_of_[arc - kArtificial];
  }
  std::int64_t source(std::int64_t arc) const {
    if (arc < kArtificial) return arc_row_[arc];
    const std::int64_t u = arc - kArtificial;
    return art_up_[u] ? u : root_;
  }
  std::int64_t target(std::int64_t arc) const {
    if (arc < kArtificial) return k_ + arc_col_[arc];
    const std::int64_t u = arc - kArtificial;
    return art_up_[u] ? root_ : u;
  }
  bool in_tree(std::int64_t arc) const {
    return pred_[source(arc)] == arc || pred_[target(arc)] == arc;
  }

  void init_artificial_tree();
  void init_warm_tree(const std::vector<double>& hint, double max_cost);
  void add_arc(std::int64_t i, std::int64_t j);
  void resize_block();
  /// Prices all k*m arcs against the current potentials; returns the number added.
  std::int64_t price_all();

  bool find_entering_arc();
  void find_join_node();
  void find_leaving_arc();
  void change_flow();
  void update_tree_structure();
  void update_potential();
  void refresh_potentials();

  const double* row_data_;
  const double* col_data_;
  std::int64_t dim_;
  std::int64_t k_;
  std::int64_t m_;
  std::int64_t node_num_;  // k + m real nodes; the root is node_num_
  std::int64_t root_;
  PivotRule rule_;
  bool dense_ = true;

  std::vector<std::int32_t> arc_row_;
  std::vector<std::int32_t> arc_col_;
  std::vector<double> row_half_norm_;
  std::vector<double> col_half_norm_;

  std::vector<Flow> supply_;
  std::vector<double> art_cost_of_;
  std::vector<char> art_up_;
  double tolerance_ = 0.0;

  std::vector<std::int64_t> parent_;
  std::vector<std::int64_t> pred_;
  std::vector<int> pred_dir_;
  std::vector<Flow> pred_flow_;
  std::vector<std::int64_t> thread_;
  std::vector<std::int64_t> rev_thread_;
  std::vector<std::int64_t> succ_num_;
  std::vector<std::int64_t> last_succ_;
  std::vector<double> pi_;
  std::vector<std::int64_t> dirty_revs_;

  std::int64_t block_size_ = 0;
  std::int64_t next_arc_ = 0;
  std::size_t pivots_ = 0;

  // Pivot state.
  std::int64_t in_arc_ = -1;
  std::int64_t join_ = -1;
  std::int64_t u_in_ = -1, v_in_ = -1, u_out_ = -1, v_out_ = -1;
  Flow delta_ = 0;
};

}  // namespace vqar::detail
