#pragma once

// Brute-force reference implementations. Each one takes a different route
// from the library code it checks, and none of them calls into the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

// Rank of x[i] = 1 + (# strictly smaller) + (# equal others) / 2.
inline std::vector<double> nested_loop_ranks(const std::vector<double>& x) {
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double below = 0.0, equal = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (j == i) continue;
      if (x[j] < x[i]) below += 1.0;
      if (x[j] == x[i]) equal += 1.0;
    }
    r[i] = 1.0 + below + equal / 2.0;
  }
  return r;
}

inline double textbook_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  return textbook_pearson(nested_loop_ranks(x), nested_loop_ranks(y));
}

// Gauss-Jordan inverse with partial pivoting.
inline Matrix invert(Matrix a) {
  const std::size_t n = a.size();
  Matrix inv(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    if (std::abs(a[piv][c]) < 1e-14) throw std::runtime_error("singular");
    std::swap(a[c], a[piv]);
    std::swap(inv[c], inv[piv]);
    const double d = a[c][c];
    for (std::size_t k = 0; k < n; ++k) {
      a[c][k] /= d;
      inv[c][k] /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r][c];
      for (std::size_t k = 0; k < n; ++k) {
        a[r][k] -= f * a[c][k];
        inv[r][k] -= f * inv[c][k];
      }
    }
  }
  return inv;
}

struct LinearFit {
  std::vector<double> beta;
  double r2 = 0.0;
};

// beta = (X^T X)^-1 X^T y; rows of `x` already include the intercept.
inline LinearFit normal_equations(const Matrix& x, const std::vector<double>& y) {
  const std::size_t n = x.size(), p = x.front().size();
  Matrix xtx(p, std::vector<double>(p, 0.0));
  std::vector<double> xty(p, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < p; ++a) {
      xty[a] += x[i][a] * y[i];
      for (std::size_t b = 0; b < p; ++b) xtx[a][b] += x[i][a] * x[i][b];
    }
  const auto inv = invert(xtx);
  LinearFit fit;
  fit.beta.assign(p, 0.0);
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = 0; b < p; ++b) fit.beta[a] += inv[a][b] * xty[b];
  const double ybar = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sse = 0, sst = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double pred = 0;
    for (std::size_t a = 0; a < p; ++a) pred += x[i][a] * fit.beta[a];
    sse += (y[i] - pred) * (y[i] - pred);
    sst += (y[i] - ybar) * (y[i] - ybar);
  }
  fit.r2 = 1.0 - sse / sst;
  return fit;
}

struct Hierarchical {
  double r2_1, r2_2, delta, f, b0, b_log, b_cross;
};

inline Hierarchical hierarchical(const std::vector<double>& d, const std::vector<double>& logd,
                                 const std::vector<bool>& cross) {
  Matrix x1, x2;
  for (std::size_t i = 0; i < d.size(); ++i) {
    x1.push_back({1.0, logd[i]});
    x2.push_back({1.0, logd[i], cross[i] ? 1.0 : 0.0});
  }
  const auto s1 = normal_equations(x1, d);
  const auto s2 = normal_equations(x2, d);
  const double n = static_cast<double>(d.size());
  Hierarchical h{s1.r2, s2.r2, s2.r2 - s1.r2, 0.0, s2.beta[0], s2.beta[1], s2.beta[2]};
  h.f = h.delta * (n - 3.0) / (1.0 - s2.r2);
  return h;
}

// U of a by pairwise counting; p from every ordering of the pooled sample.
struct MannWhitney {
  double u, p;
};

inline double pairwise_u(const std::vector<double>& a, const std::vector<double>& b) {
  double u = 0.0;
  for (double x : a)
    for (double y : b) u += x > y ? 1.0 : (x == y ? 0.5 : 0.0);
  return u;
}

inline MannWhitney mann_whitney_by_permutation(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  const double mu = static_cast<double>(a.size() * b.size()) / 2.0;
  const double u_obs = pairwise_u(a, b);
  std::vector<std::size_t> idx(pooled.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  double extreme = 0, total = 0;
  do {
    std::vector<double> pa, pb;
    for (std::size_t i = 0; i < idx.size(); ++i) (i < a.size() ? pa : pb).push_back(pooled[idx[i]]);
    total += 1;
    if (std::abs(pairwise_u(pa, pb) - mu) >= std::abs(u_obs - mu) - 1e-9) extreme += 1;
  } while (std::next_permutation(idx.begin(), idx.end()));
  return {u_obs, extreme / total};
}

// Leading eigenvector of the sample covariance by power iteration, sign-fixed
// so the largest-magnitude entry is positive.
inline std::vector<double> power_iteration_pc1(const Matrix& rows) {
  const std::size_t n = rows.size(), d = rows.front().size();
  std::vector<double> mu(d, 0.0);
  for (const auto& r : rows)
    for (std::size_t k = 0; k < d; ++k) mu[k] += r[k] / static_cast<double>(n);
  Matrix cov(d, std::vector<double>(d, 0.0));
  for (const auto& r : rows)
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) cov[a][b] += (r[a] - mu[a]) * (r[b] - mu[b]);
  std::vector<double> v(d);
  for (std::size_t k = 0; k < d; ++k) v[k] = 1.0 + 0.01 * static_cast<double>(k);
  for (int it = 0; it < 200000; ++it) {
    std::vector<double> w(d, 0.0);
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) w[a] += cov[a][b] * v[b];
    double norm = 0;
    for (double x : w) norm += x * x;
    norm = std::sqrt(norm);
    double change = 0;
    for (std::size_t k = 0; k < d; ++k) {
      w[k] /= norm;
      change = std::max(change, std::abs(w[k] - v[k]));
    }
    v = w;
    if (change < 1e-15) break;
  }
  std::size_t big = 0;
  for (std::size_t k = 1; k < d; ++k)
    if (std::abs(v[k]) > std::abs(v[big])) big = k;
  if (v[big] < 0)
    for (double& x : v) x = -x;
  return v;
}

// Mantel p over all n! relabelings of b's items (identity included).
inline double exhaustive_mantel_p(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b) {
  const std::size_t n = a.size();
  auto upper = [n](const std::vector<std::vector<double>>& m, const std::vector<std::size_t>& p) {
    std::vector<double> v;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) v.push_back(m[p[i]][p[j]]);
    return v;
  };
  std::vector<std::size_t> id(n);
  std::iota(id.begin(), id.end(), std::size_t{0});
  const auto va = upper(a, id);
  const double obs = spearman(va, upper(b, id));
  auto p = id;
  double hits = 0, total = 0;
  do {
    total += 1;
    if (spearman(va, upper(b, p)) >= obs - 1e-12) hits += 1;
  } while (std::next_permutation(p.begin(), p.end()));
  return hits / total;
}

// Quadratic BH: reject p_i iff some p_j >= p_i has p_j <= #{k : p_k <= p_j} * alpha / m.
inline std::vector<bool> quadratic_bh(const std::vector<double>& p, double alpha) {
  const std::size_t m = p.size();
  double cutoff = -1.0;
  for (std::size_t j = 0; j < m; ++j) {
    double rank = 0;
    for (std::size_t k = 0; k < m; ++k)
      if (p[k] <= p[j]) rank += 1;
    if (p[j] <= rank * alpha / static_cast<double>(m)) cutoff = std::max(cutoff, p[j]);
  }
  std::vector<bool> out(m);
  for (std::size_t i = 0; i < m; ++i) out[i] = p[i] <= cutoff;
  return out;
}

// q_i = min over j with p_j >= p_i of p_j * m / rank_j, capped at 1.
inline std::vector<double> quadratic_bh_q(const std::vector<double>& p) {
  const std::size_t m = p.size();
  std::vector<double> q(m, 1.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      if (p[j] < p[i]) continue;
      double rank = 0;
      for (std::size_t k = 0; k < m; ++k)
        if (p[k] <= p[j]) rank += 1;
      q[i] = std::min(q[i], p[j] * static_cast<double>(m) / rank);
    }
  return q;
}

}  // namespace oracle
