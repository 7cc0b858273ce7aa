#include "auction/verify.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <utility>

namespace auction {

InterimReport monte_carlo_interim(const TypeUniverse& u, const VecXd& mass,
                                  const MechanismRunner& run, const VecXd& target, long long n,
                                  Rng& rng, double z_max) {
  if (n < 10000) throw StructuralError("need at least 10^4 samples for the normal bands");
  const int D = u.type_count();
  if (target.size() != D) throw StructuralError("target dimension mismatch");

  VecXd hits = VecXd::Zero(D);
  for (long long s = 0; s < n; ++s) {
    TypeProfile profile = sample_profile(u, mass, rng);
    TypeMask served = run(profile, rng) & profile_mask(profile);
    while (served) {
      hits[std::countr_zero(served)] += 1.0;
      served &= served - 1;
    }
  }

  InterimReport report;
  report.target = target;
  report.measured = hits / static_cast<double>(n);
  report.se.resize(D);
  report.z.resize(D);
  report.z_max = z_max;
  report.samples = n;
  report.pass = true;
  for (int t = 0; t < D; ++t) {
    double p = report.measured[t];
    double se = std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(n));
    se = std::max(se, 1.0 / static_cast<double>(n));
    report.se[t] = se;
    report.z[t] = (p - target[t]) / se;
    if (std::abs(report.z[t]) > z_max) report.pass = false;
  }
  return report;
}

namespace {

// Dense-capacity Dinic over exact arithmetic.
template <typename Scalar>
class MaxFlow {
 public:
  explicit MaxFlow(int nodes) : adj_(nodes) {}

  void add_edge(int from, int to, Scalar cap) {
    adj_[from].push_back({to, std::move(cap), static_cast<int>(adj_[to].size())});
    adj_[to].push_back({from, Scalar(0), static_cast<int>(adj_[from].size()) - 1});
  }

  Scalar run(int source, int sink) {
    Scalar total(0);
    while (levels(source, sink)) {
      iter_.assign(adj_.size(), 0);
      while (true) {
        Scalar pushed = augment(source, sink, Scalar(-1));
        if (pushed == Scalar(0)) break;
        total += pushed;
      }
    }
    return total;
  }

  // Flow on the j-th edge added out of `from` equals its lost capacity,
  // recoverable from the reverse edge.
  Scalar flow_on(int from, int edge_index) const {
    const Edge& e = adj_[from][edge_index];
    return adj_[e.to][e.rev].cap;
  }

  // Residual reachability from the source after run().
  std::vector<bool> reachable(int source) const {
    std::vector<bool> seen(adj_.size(), false);
    std::queue<int> queue;
    seen[source] = true;
    queue.push(source);
    while (!queue.empty()) {
      int v = queue.front();
      queue.pop();
      for (const Edge& e : adj_[v])
        if (!seen[e.to] && e.cap > Scalar(0)) {
          seen[e.to] = true;
          queue.push(e.to);
        }
    }
    return seen;
  }

 private:
  struct Edge {
    int to;
    Scalar cap;
    int rev;
  };

  bool levels(int source, int sink) {
    level_.assign(adj_.size(), -1);
    std::queue<int> queue;
    level_[source] = 0;
    queue.push(source);
    while (!queue.empty()) {
      int v = queue.front();
      queue.pop();
      for (const Edge& e : adj_[v])
        if (level_[e.to] < 0 && e.cap > Scalar(0)) {
          level_[e.to] = level_[v] + 1;
          queue.push(e.to);
        }
    }
    return level_[sink] >= 0;
  }

  Scalar augment(int v, int sink, Scalar limit) {
    if (v == sink) return limit;
    for (int& i = iter_[v]; i < static_cast<int>(adj_[v].size()); ++i) {
      Edge& e = adj_[v][i];
      if (e.cap <= Scalar(0) || level_[e.to] != level_[v] + 1) continue;
      Scalar next = (limit < Scalar(0) || e.cap < limit) ? e.cap : limit;
      Scalar pushed = augment(e.to, sink, next);
      if (pushed > Scalar(0)) {
        e.cap -= pushed;
        adj_[e.to][e.rev].cap += pushed;
        return pushed;
      }
    }
    return Scalar(0);
  }

  std::vector<std::vector<Edge>> adj_;
  std::vector<int> level_;
  std::vector<int> iter_;
};

template <typename Scalar>
FlowSolutionT<Scalar> flow_oracle_impl(const TypeUniverse& u, const Vec<Scalar>& mass,
                                       const Vec<Scalar>& xbar, int k, const Scalar& tol,
                                       long long guard) {
  if (k < 1) throw StructuralError("supply needs at least one unit");
  const int D = u.type_count();
  const int n = u.agent_count();
  if (xbar.size() != D) throw StructuralError("interim rule dimension mismatch");

  FlowSolutionT<Scalar> sol;
  std::vector<Scalar> fp;
  for_each_profile<Scalar>(
      u, mass,
      [&](const TypeProfile& p, const Scalar& f) {
        sol.profiles.push_back(p);
        fp.push_back(f);
      },
      guard);
  const int P = static_cast<int>(sol.profiles.size());
  sol.profile_mass = Vec<Scalar>::Zero(P);
  for (int i = 0; i < P; ++i) sol.profile_mass[i] = fp[i];

  // Node layout: 0 = source, 1..P = profiles, P+1..P+D = types, P+D+1 = sink.
  const int source = 0, sink = P + D + 1;
  MaxFlow<Scalar> net(P + D + 2);
  std::vector<std::vector<int>> type_edge(P);  // edge index per agent slot
  for (int i = 0; i < P; ++i) {
    net.add_edge(source, 1 + i, Scalar(k) * fp[i]);
    // adj[1+i] slot 0 is the reverse edge of the source arc; forward arcs
    // to the realized types follow at 1..n.
    for (int a = 0; a < n; ++a) {
      type_edge[i].push_back(1 + a);
      net.add_edge(1 + i, 1 + P + sol.profiles[i].chosen[a], fp[i]);
    }
  }
  Scalar demand(0);
  for (int t = 0; t < D; ++t) {
    Scalar cap = xbar[t];
    if (cap < Scalar(0)) cap = Scalar(0);
    net.add_edge(1 + P + t, sink, cap);
    demand += cap;
  }

  Scalar value = net.run(source, sink);
  sol.saturated = (demand - value) <= tol;

  if (sol.saturated) {
    sol.ex_post = Mat<Scalar>::Zero(P, D);
    for (int i = 0; i < P; ++i) {
      if (fp[i] == Scalar(0)) continue;
      for (int a = 0; a < n; ++a) {
        int t = sol.profiles[i].chosen[a];
        sol.ex_post(i, t) += net.flow_on(1 + i, type_edge[i][a]) / fp[i];
      }
    }
  } else {
    auto seen = net.reachable(source);
    for (int t = 0; t < D; ++t)
      if (!seen[1 + P + t]) sol.cut_set |= TypeMask(1) << t;
  }
  return sol;
}

}  // namespace

FlowSolution flow_oracle(const TypeUniverse& u, const Vec<Rational>& mass,
                         const Vec<Rational>& xbar, int k, long long guard) {
  return flow_oracle_impl<Rational>(u, mass, xbar, k, Rational(0), guard);
}

FlowSolutionT<double> flow_oracle(const TypeUniverse& u, const VecXd& mass, const VecXd& xbar,
                                  int k, double tol, long long guard) {
  return flow_oracle_impl<double>(u, mass, xbar, k, tol, guard);
}

}  // namespace auction
