#include "network_simplex.hpp"

#include <algorithm>
#include <cmath>

#include "vqar/error.hpp"

namespace vqar::detail {

namespace {
constexpr NetworkSimplex::Flow kInf = std::numeric_limits<NetworkSimplex::Flow>::max();
}

NetworkSimplex::NetworkSimplex(const PointSet& rows, const PointSet& cols,
                               std::vector<Flow> supply, std::vector<Flow> demand,
                               PivotRule rule, const std::vector<double>* row_hint)
    : row_data_(rows.data().data()),
      col_data_(cols.data().data()),
      dim_(static_cast<std::int64_t>(rows.dim())),
      k_(static_cast<std::int64_t>(rows.size())),
      m_(static_cast<std::int64_t>(cols.size())),
      node_num_(k_ + m_),
      root_(k_ + m_),
      rule_(rule),
      dense_(k_ * m_ <= kDenseLimit) {
  if (k_ >= std::numeric_limits<std::int32_t>::max() ||
      m_ >= std::numeric_limits<std::int32_t>::max())
    throw Error(ErrorCode::InvalidCount, "transport problem too large");
  supply_.resize(static_cast<std::size_t>(node_num_ + 1));
  for (std::int64_t i = 0; i < k_; ++i) supply_[i] = supply[i];
  for (std::int64_t j = 0; j < m_; ++j) supply_[k_ + j] = -demand[j];

  row_half_norm_.resize(static_cast<std::size_t>(k_));
  col_half_norm_.resize(static_cast<std::size_t>(m_));
  for (std::int64_t i = 0; i < k_; ++i) row_half_norm_[i] = 0.5 * dot(rows[i], rows[i]);
  for (std::int64_t j = 0; j < m_; ++j) col_half_norm_[j] = 0.5 * dot(cols[j], cols[j]);

  double max_cost = 0.0;
  for (std::int64_t i = 0; i < k_; ++i)
    for (std::int64_t j = 0; j < m_; ++j) max_cost = std::max(max_cost, real_cost(i, j));
  tolerance_ = 1e-12 * (1.0 + max_cost);

  const auto n = static_cast<std::size_t>(node_num_ + 1);
  parent_.assign(n, -1);
  pred_.assign(n, -1);
  pred_dir_.assign(n, kUp);
  pred_flow_.assign(n, 0);
  thread_.assign(n, 0);
  rev_thread_.assign(n, 0);
  succ_num_.assign(n, 1);
  last_succ_.assign(n, 0);
  pi_.assign(n, 0.0);
  art_cost_of_.assign(n, 0.0);
  art_up_.assign(n, 1);

  if (dense_) {
    arc_row_.reserve(static_cast<std::size_t>(k_ * m_));
    arc_col_.reserve(static_cast<std::size_t>(k_ * m_));
    for (std::int64_t i = 0; i < k_; ++i)
      for (std::int64_t j = 0; j < m_; ++j) add_arc(i, j);
  }

  if (row_hint != nullptr && static_cast<std::int64_t>(row_hint->size()) == k_) {
    init_warm_tree(*row_hint, max_cost);
  } else {
    // On a complete bipartite graph any supply/demand pair routed through the
    // root can be rerouted along its direct arc, so an artificial cost above the
    // largest real cost drives the artificial flow to zero.
    for (std::int64_t u = k_; u < node_num_; ++u) {
      art_up_[u] = 0;
      art_cost_of_[u] = max_cost + 1.0;
    }
    init_artificial_tree();
  }
  resize_block();
}

void NetworkSimplex::add_arc(std::int64_t i, std::int64_t j) {
  arc_row_.push_back(static_cast<std::int32_t>(i));
  arc_col_.push_back(static_cast<std::int32_t>(j));
}

void NetworkSimplex::init_artificial_tree() {
  thread_[root_] = 0;
  rev_thread_[0] = root_;
  succ_num_[root_] = node_num_ + 1;
  last_succ_[root_] = root_ - 1;
  for (std::int64_t u = 0; u < node_num_; ++u) {
    parent_[u] = root_;
    pred_[u] = kArtificial + u;
    thread_[u] = u + 1;
    rev_thread_[u + 1] = u;
    succ_num_[u] = 1;
    last_succ_[u] = u;
    pred_dir_[u] = art_up_[u] ? kUp : kDown;
    pred_flow_[u] = art_up_[u] ? supply_[u] : -supply_[u];
  }
  refresh_potentials();
}

void NetworkSimplex::init_warm_tree(const std::vector<double>& hint, double max_cost) {
  // Column j hangs under r(j) = argmin_i c_ij + hint_i with its whole demand.
  // Each row reaches the root through its artificial arc, which absorbs the
  // row's imbalance: rows with spare supply send it up at cost -hint_i, rows
  // short of supply receive from the root at cost hint_i + big. big exceeds
  // any saving from routing through the root, so the optimum uses no
  // artificial flow.
  std::vector<std::int64_t> owner(static_cast<std::size_t>(m_));
  std::vector<Flow> balance(supply_.begin(), supply_.begin() + k_);
  std::vector<std::int64_t> count(static_cast<std::size_t>(k_), 0);
  for (std::int64_t j = 0; j < m_; ++j) {
    double best = std::numeric_limits<double>::infinity();
    std::int64_t arg = 0;
    for (std::int64_t i = 0; i < k_; ++i) {
      const double v = real_cost(i, j) + hint[i];
      if (v < best) {
        best = v;
        arg = i;
      }
    }
    owner[j] = arg;
    balance[arg] += supply_[k_ + j];
    ++count[arg];
  }
  const auto [lo, hi] = std::minmax_element(hint.begin(), hint.end());
  const double big = max_cost + (*hi - *lo) + 1.0;

  // Children grouped by owner, in column order.
  std::vector<std::int64_t> start(static_cast<std::size_t>(k_ + 1), 0);
  for (std::int64_t i = 0; i < k_; ++i) start[i + 1] = start[i] + count[i];
  std::vector<std::int64_t> order(static_cast<std::size_t>(m_));
  {
    std::vector<std::int64_t> fill(start.begin(), start.end() - 1);
    for (std::int64_t j = 0; j < m_; ++j) order[fill[owner[j]]++] = j;
  }

  for (std::int64_t u = k_; u < node_num_; ++u) {
    art_up_[u] = 0;
    art_cost_of_[u] = big;
  }
  succ_num_[root_] = node_num_ + 1;
  std::int64_t prev = root_;
  for (std::int64_t i = 0; i < k_; ++i) {
    parent_[i] = root_;
    pred_[i] = kArtificial + i;
    if (balance[i] >= 0) {
      art_up_[i] = 1;
      art_cost_of_[i] = -hint[i];
      pred_dir_[i] = kUp;
      pred_flow_[i] = balance[i];
    } else {
      art_up_[i] = 0;
      art_cost_of_[i] = hint[i] + big;
      pred_dir_[i] = kDown;
      pred_flow_[i] = -balance[i];
    }
    thread_[prev] = i;
    rev_thread_[i] = prev;
    prev = i;
    succ_num_[i] = 1 + count[i];
    for (std::int64_t p = start[i]; p < start[i + 1]; ++p) {
      const std::int64_t j = order[p];
      const std::int64_t u = k_ + j;
      std::int64_t arc;
      if (dense_) {
        arc = i * m_ + j;
      } else {
        arc = static_cast<std::int64_t>(arc_row_.size());
        add_arc(i, j);
      }
      parent_[u] = i;
      pred_[u] = arc;
      pred_dir_[u] = kDown;
      pred_flow_[u] = -supply_[u];
      succ_num_[u] = 1;
      last_succ_[u] = u;
      thread_[prev] = u;
      rev_thread_[u] = prev;
      prev = u;
    }
    last_succ_[i] = prev;
  }
  thread_[prev] = root_;
  rev_thread_[root_] = prev;
  last_succ_[root_] = prev;
  refresh_potentials();
}

void NetworkSimplex::resize_block() {
  const auto arcs = static_cast<std::int64_t>(arc_row_.size());
  if (rule_ == PivotRule::Dantzig) {
    block_size_ = arcs;
  } else {
    block_size_ = std::max<std::int64_t>(
        10, static_cast<std::int64_t>(std::sqrt(static_cast<double>(arcs))));
    block_size_ = std::min(block_size_, arcs);
  }
}

bool NetworkSimplex::find_entering_arc() {
  // Reduced cost of (i, j) expanded as |u_i|^2/2 + pi_i + |x_j|^2/2 - pi_j - <u_i, x_j>.
  const auto arcs = static_cast<std::int64_t>(arc_row_.size());
  if (arcs == 0) return false;
  double best = -tolerance_;
  std::int64_t best_arc = -1;
  std::int64_t count = block_size_;
  std::int64_t e = next_arc_ < arcs ? next_arc_ : 0;
  const double* pj = pi_.data() + k_;
  for (std::int64_t scanned = 0; scanned < arcs; ++scanned) {
    const std::int64_t i = arc_row_[e];
    const std::int64_t j = arc_col_[e];
    const double* u = row_data_ + i * dim_;
    const double* x = col_data_ + j * dim_;
    double ip;
    if (dim_ == 2) {
      ip = u[0] * x[0] + u[1] * x[1];
    } else {
      ip = 0.0;
      for (std::int64_t q = 0; q < dim_; ++q) ip += u[q] * x[q];
    }
    const double rc = row_half_norm_[i] + pi_[i] + col_half_norm_[j] - pj[j] - ip;
    if (rc < best && !in_tree(e)) {
      best = rc;
      best_arc = e;
    }
    if (++e == arcs) e = 0;
    if (--count == 0) {
      if (best_arc >= 0) break;
      count = block_size_;
    }
  }
  if (best_arc < 0) return false;
  in_arc_ = best_arc;
  next_arc_ = e;
  return true;
}

std::int64_t NetworkSimplex::price_all() {
  // Same expansion as find_entering_arc, so an arc already in the list that
  // priced out there is never selected again here.
  std::vector<std::pair<double, std::int32_t>> found;
  std::int64_t added = 0;
  for (std::int64_t j = 0; j < m_; ++j) {
    const double* x = col_data_ + j * dim_;
    const double b = col_half_norm_[j] - pi_[k_ + j];
    found.clear();
    for (std::int64_t i = 0; i < k_; ++i) {
      const double* u = row_data_ + i * dim_;
      double ip = 0.0;
      for (std::int64_t q = 0; q < dim_; ++q) ip += u[q] * x[q];
      const double rc = row_half_norm_[i] + pi_[i] + b - ip;
      if (rc < -tolerance_) found.emplace_back(rc, static_cast<std::int32_t>(i));
    }
    if (static_cast<std::int64_t>(found.size()) > kArcsPerColumn) {
      std::nth_element(found.begin(), found.begin() + kArcsPerColumn, found.end());
      found.resize(kArcsPerColumn);
    }
    for (const auto& f : found) {
      arc_row_.push_back(f.second);
      arc_col_.push_back(static_cast<std::int32_t>(j));
      ++added;
    }
  }
  resize_block();
  return added;
}

void NetworkSimplex::find_join_node() {
  std::int64_t u = source(in_arc_);
  std::int64_t v = target(in_arc_);
  while (u != v) {
    if (succ_num_[u] < succ_num_[v]) {
      u = parent_[u];
    } else {
      v = parent_[v];
    }
  }
  join_ = u;
}

void NetworkSimplex::find_leaving_arc() {
  // Entering arcs sit at their lower bound, so the cycle runs along the arc.
  const std::int64_t first = source(in_arc_);
  const std::int64_t second = target(in_arc_);
  delta_ = kInf;
  int result = 0;
  for (std::int64_t u = first; u != join_; u = parent_[u]) {
    const Flow d = pred_dir_[u] == kUp ? pred_flow_[u] : kInf;
    if (d < delta_) {
      delta_ = d;
      u_out_ = u;
      result = 1;
    }
  }
  for (std::int64_t u = second; u != join_; u = parent_[u]) {
    const Flow d = pred_dir_[u] == kDown ? pred_flow_[u] : kInf;
    if (d <= delta_) {
      delta_ = d;
      u_out_ = u;
      result = 2;
    }
  }
  if (result == 0) throw Error(ErrorCode::SolverFailure, "unbounded pivot cycle");
  if (result == 1) {
    u_in_ = first;
    v_in_ = second;
  } else {
    u_in_ = second;
    v_in_ = first;
  }
}

void NetworkSimplex::change_flow() {
  if (delta_ > 0) {
    for (std::int64_t u = source(in_arc_); u != join_; u = parent_[u])
      pred_flow_[u] -= pred_dir_[u] * delta_;
    for (std::int64_t u = target(in_arc_); u != join_; u = parent_[u])
      pred_flow_[u] += pred_dir_[u] * delta_;
  }
}

void NetworkSimplex::update_tree_structure() {
  const std::int64_t old_rev_thread = rev_thread_[u_out_];
  const std::int64_t old_succ_num = succ_num_[u_out_];
  const std::int64_t old_last_succ = last_succ_[u_out_];
  v_out_ = parent_[u_out_];

  if (u_in_ == u_out_) {
    parent_[u_in_] = v_in_;
    pred_[u_in_] = in_arc_;
    pred_dir_[u_in_] = u_in_ == source(in_arc_) ? kUp : kDown;
    pred_flow_[u_in_] = delta_;

    if (thread_[v_in_] != u_out_) {
      std::int64_t after = thread_[old_last_succ];
      thread_[old_rev_thread] = after;
      rev_thread_[after] = old_rev_thread;
      after = thread_[v_in_];
      thread_[v_in_] = u_out_;
      rev_thread_[u_out_] = v_in_;
      thread_[old_last_succ] = after;
      rev_thread_[after] = old_last_succ;
    }
  } else {
    const std::int64_t thread_continue =
        old_rev_thread == v_in_ ? thread_[old_last_succ] : thread_[v_in_];

    // Re-hang the stem nodes between u_in and u_out.
    std::int64_t stem = u_in_;
    std::int64_t par_stem = v_in_;
    std::int64_t next_stem;
    std::int64_t last = last_succ_[u_in_];
    std::int64_t before;
    std::int64_t after = thread_[last];
    thread_[v_in_] = u_in_;
    dirty_revs_.clear();
    dirty_revs_.push_back(v_in_);
    while (stem != u_out_) {
      next_stem = parent_[stem];
      thread_[last] = next_stem;
      dirty_revs_.push_back(last);

      before = rev_thread_[stem];
      thread_[before] = after;
      rev_thread_[after] = before;

      parent_[stem] = par_stem;
      par_stem = stem;
      stem = next_stem;

      last = last_succ_[stem] == last_succ_[par_stem] ? rev_thread_[par_stem]
                                                      : last_succ_[stem];
      after = thread_[last];
    }
    parent_[u_out_] = par_stem;
    thread_[last] = thread_continue;
    rev_thread_[thread_continue] = last;
    last_succ_[u_out_] = last;

    if (old_rev_thread != v_in_) {
      thread_[old_rev_thread] = after;
      rev_thread_[after] = old_rev_thread;
    }

    for (const std::int64_t u : dirty_revs_) rev_thread_[thread_[u]] = u;

    // Stem arcs flip orientation: each node takes over its old parent's arc.
    std::int64_t tmp_sc = 0;
    const std::int64_t tmp_ls = last_succ_[u_out_];
    for (std::int64_t u = u_out_, p = parent_[u]; u != u_in_; u = p, p = parent_[u]) {
      pred_[u] = pred_[p];
      pred_dir_[u] = -pred_dir_[p];
      pred_flow_[u] = pred_flow_[p];
      tmp_sc += succ_num_[u] - succ_num_[p];
      succ_num_[u] = tmp_sc;
      last_succ_[p] = tmp_ls;
    }
    pred_[u_in_] = in_arc_;
    pred_dir_[u_in_] = u_in_ == source(in_arc_) ? kUp : kDown;
    pred_flow_[u_in_] = delta_;
    succ_num_[u_in_] = old_succ_num;
  }

  const std::int64_t up_limit_out = last_succ_[join_] == v_in_ ? join_ : -1;
  const std::int64_t last_succ_out = last_succ_[u_out_];
  for (std::int64_t u = v_in_; u != -1 && last_succ_[u] == v_in_; u = parent_[u])
    last_succ_[u] = last_succ_out;

  if (join_ != old_rev_thread && v_in_ != old_rev_thread) {
    for (std::int64_t u = v_out_; u != up_limit_out && last_succ_[u] == old_last_succ;
         u = parent_[u])
      last_succ_[u] = old_rev_thread;
  } else if (last_succ_out != old_last_succ) {
    for (std::int64_t u = v_out_; u != up_limit_out && last_succ_[u] == old_last_succ;
         u = parent_[u])
      last_succ_[u] = last_succ_out;
  }

  for (std::int64_t u = v_in_; u != join_; u = parent_[u]) succ_num_[u] += old_succ_num;
  for (std::int64_t u = v_out_; u != join_; u = parent_[u]) succ_num_[u] -= old_succ_num;
}

void NetworkSimplex::update_potential() {
  const double sigma = pi_[v_in_] - pi_[u_in_] - pred_dir_[u_in_] * cost(in_arc_);
  const std::int64_t end = thread_[last_succ_[u_in_]];
  // Potentials matter up to a constant: shift whichever side of the cut is smaller.
  if (2 * succ_num_[u_in_] <= node_num_ + 1) {
    for (std::int64_t u = u_in_; u != end; u = thread_[u]) pi_[u] += sigma;
  } else {
    for (std::int64_t u = end; u != u_in_; u = thread_[u]) pi_[u] -= sigma;
  }
}

void NetworkSimplex::refresh_potentials() {
  pi_[root_] = 0.0;
  for (std::int64_t u = thread_[root_]; u != root_; u = thread_[u])
    pi_[u] = pi_[parent_[u]] - pred_dir_[u] * cost(pred_[u]);
}

void NetworkSimplex::run() {
  const std::size_t refresh_every = static_cast<std::size_t>(node_num_) + 1;
  if (!dense_) price_all();
  for (;;) {
    while (find_entering_arc()) {
      find_join_node();
      find_leaving_arc();
      change_flow();
      update_tree_structure();
      update_potential();
      if (++pivots_ % refresh_every == 0) refresh_potentials();
    }
    // Accumulated rounding in the incremental potentials can hide a candidate.
    refresh_potentials();
    if (find_entering_arc()) continue;
    if (dense_ || price_all() == 0) break;
  }
  for (std::int64_t u = 0; u < node_num_; ++u) {
    if (pred_[u] >= kArtificial && pred_flow_[u] != 0)
      throw Error(ErrorCode::SolverFailure, "artificial arc retains flow at optimum");
  }
}

std::vector<NetworkSimplex::Arc> NetworkSimplex::support() const {
  std::vector<Arc> arcs;
  for (std::int64_t u = 0; u < node_num_; ++u) {
    const std::int64_t e = pred_[u];
    if (e >= 0 && e < kArtificial && pred_flow_[u] > 0)
      arcs.push_back({static_cast<std::size_t>(arc_row_[e]),
                      static_cast<std::size_t>(arc_col_[e]), pred_flow_[u]});
  }
  std::sort(arcs.begin(), arcs.end(), [](const Arc& a, const Arc& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  return arcs;
}

}  // namespace vqar::detail
