#include "granno/wmd/wmd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace granno {

BagOfWords make_bag(const Tokens& tokens, const EmbeddingTable& table) {
  std::map<std::string, size_t> counts;
  size_t total = 0;
  for (const auto& t : tokens) {
    if (!table.contains(t) && table.oov_policy() == OovPolicy::Drop) continue;
    ++counts[t];
    ++total;
  }
  if (total == 0) throw ScoreUndefined("empty bag of words after OOV handling");
  BagOfWords bag;
  for (const auto& [tok, n] : counts) {
    bag.tokens.push_back(tok);
    bag.weights.push_back(static_cast<double>(n) / static_cast<double>(total));
    bag.vectors.push_back(*table.lookup(tok));
  }
  return bag;
}

double euclidean(std::span<const double> u, std::span<const double> v) {
  double s = 0.0;
  for (size_t i = 0; i < u.size(); ++i) {
    double d = u[i] - v[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double transport_cost(std::span<const double> a, std::span<const double> b,
                      std::span<const double> cost) {
  // Successive shortest paths on the bipartite residual graph, with
  // Dijkstra over reduced costs. Nodes: 0 = source, 1..n supplies,
  // n+1..n+m demands, n+m+1 = sink.
  const size_t n = a.size(), m = b.size();
  const size_t V = n + m + 2, S = 0, T = n + m + 1;
  constexpr double kEps = 1e-15;
  constexpr double kInf = std::numeric_limits<double>::infinity();

  std::vector<double> supply(a.begin(), a.end()), demand(b.begin(), b.end());
  std::vector<double> flow(n * m, 0.0);
  std::vector<double> pot(V, 0.0), dist(V);
  std::vector<size_t> prev(V);
  std::vector<bool> done(V);

  auto reduced = [&](size_t u, size_t v, double c) { return c + pot[u] - pot[v]; };

  for (;;) {
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(done.begin(), done.end(), false);
    dist[S] = 0.0;
    for (;;) {
      size_t u = V;
      for (size_t v = 0; v < V; ++v) {
        if (!done[v] && dist[v] < kInf && (u == V || dist[v] < dist[u])) u = v;
      }
      if (u == V) break;
      done[u] = true;
      auto relax = [&](size_t v, double c) {
        double nd = dist[u] + std::max(0.0, reduced(u, v, c));
        if (nd < dist[v]) {
          dist[v] = nd;
          prev[v] = u;
        }
      };
      if (u == S) {
        for (size_t i = 0; i < n; ++i) {
          if (supply[i] > kEps) relax(1 + i, 0.0);
        }
      } else if (u <= n) {
        size_t i = u - 1;
        for (size_t j = 0; j < m; ++j) relax(1 + n + j, cost[i * m + j]);
      } else {
        size_t j = u - 1 - n;
        for (size_t i = 0; i < n; ++i) {
          if (flow[i * m + j] > kEps) relax(1 + i, -cost[i * m + j]);
        }
        if (demand[j] > kEps) relax(T, 0.0);
      }
    }
    if (dist[T] == kInf) break;

    double delta = kInf;
    for (size_t v = T; v != S; v = prev[v]) {
      size_t u = prev[v];
      if (u == S) {
        delta = std::min(delta, supply[v - 1]);
      } else if (v == T) {
        delta = std::min(delta, demand[u - 1 - n]);
      } else if (u > n) {  // backward edge demand -> supply
        delta = std::min(delta, flow[(v - 1) * m + (u - 1 - n)]);
      }
    }
    for (size_t v = T; v != S; v = prev[v]) {
      size_t u = prev[v];
      if (u == S) {
        supply[v - 1] -= delta;
      } else if (v == T) {
        demand[u - 1 - n] -= delta;
      } else if (u <= n) {
        flow[(u - 1) * m + (v - 1 - n)] += delta;
      } else {
        flow[(v - 1) * m + (u - 1 - n)] -= delta;
      }
    }
    for (size_t v = 0; v < V; ++v) {
      if (dist[v] < kInf) pot[v] += dist[v];
    }
  }

  double total = 0.0;
  for (size_t k = 0; k < n * m; ++k) total += flow[k] * cost[k];
  return std::max(0.0, total);
}

namespace {

std::vector<double> cost_matrix(const BagOfWords& x, const BagOfWords& c) {
  std::vector<double> cost(x.tokens.size() * c.tokens.size());
  for (size_t i = 0; i < x.tokens.size(); ++i) {
    for (size_t j = 0; j < c.tokens.size(); ++j) {
      cost[i * c.tokens.size() + j] =
          x.tokens[i] == c.tokens[j] ? 0.0 : euclidean(x.vectors[i], c.vectors[j]);
    }
  }
  return cost;
}

}  // namespace

double wmd(const BagOfWords& x, const BagOfWords& c) {
  return transport_cost(x.weights, c.weights, cost_matrix(x, c));
}

double wmd(const Tokens& x, const Tokens& c, const EmbeddingTable& table) {
  return wmd(make_bag(x, table), make_bag(c, table));
}

double nearest_word_cost(const BagOfWords& from, const BagOfWords& to) {
  auto cost = cost_matrix(from, to);
  const size_t n = from.tokens.size(), m = to.tokens.size();
  double total = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < m; ++j) best = std::min(best, cost[i * m + j]);
    total += from.weights[i] * best;
  }
  return total;
}

double relaxed_wmd(const BagOfWords& x, const BagOfWords& c) {
  return std::max(nearest_word_cost(x, c), nearest_word_cost(c, x));
}

double s0_score(const Tokens& x, const Tokens& c, const EmbeddingTable& table) {
  return -wmd(x, c, table);
}

}  // namespace granno
