#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "ghsim/core/error.hpp"
#include "ghsim/core/hash.hpp"
#include "ghsim/core/random.hpp"
#include "ghsim/ingest/bipartite.hpp"
#include "ghsim/models/linalg.hpp"

namespace ghsim {

enum class EmbeddingMethod : std::uint8_t { GF, LE, HOPE, Random };

constexpr std::string_view to_string(EmbeddingMethod m) {
  switch (m) {
    case EmbeddingMethod::GF: return "gf";
    case EmbeddingMethod::LE: return "le";
    case EmbeddingMethod::HOPE: return "hope";
    case EmbeddingMethod::Random: return "random";
  }
  return "?";
}

inline EmbeddingMethod parse_embedding_method(std::string_view s) {
  for (auto m : {EmbeddingMethod::GF, EmbeddingMethod::LE, EmbeddingMethod::HOPE, EmbeddingMethod::Random})
    if (s == to_string(m)) return m;
  fail(ErrorCode::Config, "unknown embedding method '" + std::string(s) + "'");
}

/// User and repository vectors for one event type; rows follow the id vectors.
struct Embedding {
  EventType event_type = EventType::Push;
  EmbeddingMethod method = EmbeddingMethod::GF;
  std::vector<std::string> user_ids, repo_ids;
  Matrix users, repos;

  Eigen::Index dim() const { return users.cols(); }
  double score(Eigen::Index u, Eigen::Index r) const { return users.row(u).dot(repos.row(r)); }
};

// -- Graph factorization ------------------------------------------------------

struct GfOptions {
  Eigen::Index dim = 64;
  double reg = 1e-3;
  double lr = 0.01;
  double lr_decay = 0.99;        // per epoch
  int epochs = 50;
  double init_scale = 0.1;
  double negatives_per_edge = 0;  // unobserved pairs fitted to zero, sampled once
  std::uint64_t seed = 1;
};

/// Training entries: observed edges with their weights followed by sampled zeros.
struct GfEntries {
  std::vector<std::uint32_t> user, repo;
  std::vector<double> target;
  std::vector<double> user_degree, repo_degree;

  std::size_t size() const { return target.size(); }
};

inline GfEntries gf_entries(const BipartiteGraph& g, double negatives_per_edge, std::uint64_t seed) {
  GfEntries e;
  g.for_each_edge([&](std::size_t u, std::size_t r, double w) {
    e.user.push_back(static_cast<std::uint32_t>(u));
    e.repo.push_back(static_cast<std::uint32_t>(r));
    e.target.push_back(w);
  });
  const std::uint64_t cells = static_cast<std::uint64_t>(g.user_count()) * g.repo_count();
  const std::uint64_t free_cells = cells - g.nnz();
  const auto wanted = std::min<std::uint64_t>(free_cells, static_cast<std::uint64_t>(negatives_per_edge * g.nnz()));
  if (wanted > 0) {
    Rng rng(derive_seed(seed, "gf-negatives"));
    std::unordered_set<std::uint64_t> taken;
    auto sample_one = [&](std::uint64_t cell) {
      const auto u = cell / g.repo_count(), r = cell % g.repo_count();
      if (g.weight(u, r) != 0 || !taken.insert(cell).second) return false;
      e.user.push_back(static_cast<std::uint32_t>(u));
      e.repo.push_back(static_cast<std::uint32_t>(r));
      e.target.push_back(0.0);
      return true;
    };
    if (wanted * 2 > free_cells) {
      std::vector<std::uint64_t> all;
      for (std::uint64_t c = 0; c < cells; ++c)
        if (g.weight(c / g.repo_count(), c % g.repo_count()) == 0) all.push_back(c);
      shuffle(rng, all);
      for (std::uint64_t i = 0; i < wanted; ++i) sample_one(all[i]);
    } else {
      std::uint64_t got = 0;
      while (got < wanted) got += sample_one(uniform_index(rng, cells));
    }
  }
  e.user_degree.assign(g.user_count(), 0);
  e.repo_degree.assign(g.repo_count(), 0);
  for (std::size_t i = 0; i < e.size(); ++i) {
    e.user_degree[e.user[i]] += 1;
    e.repo_degree[e.repo[i]] += 1;
  }
  return e;
}

/// sum (target - <x_u, y_r>)^2 + reg (|X|^2 + |Y|^2)
inline double gf_loss(const GfEntries& e, const Matrix& x, const Matrix& y, double reg) {
  double loss = 0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    const double d = e.target[i] - x.row(e.user[i]).dot(y.row(e.repo[i]));
    loss += d * d;
  }
  return loss + reg * (x.squaredNorm() + y.squaredNorm());
}

/// Full-batch gradient of gf_loss with respect to X and Y.
inline std::pair<Matrix, Matrix> gf_gradient(const GfEntries& e, const Matrix& x, const Matrix& y, double reg) {
  Matrix gx = 2 * reg * x, gy = 2 * reg * y;
  for (std::size_t i = 0; i < e.size(); ++i) {
    const auto u = e.user[i], r = e.repo[i];
    const double d = e.target[i] - x.row(u).dot(y.row(r));
    gx.row(u) -= 2 * d * y.row(r);
    gy.row(r) -= 2 * d * x.row(u);
  }
  return {gx, gy};
}

/// Stochastic gradient descent over the entries. An epoch that raises the loss
/// is rolled back and the step size halved, so the recorded loss never rises.
inline Embedding train_gf(const BipartiteGraph& g, const GfOptions& opts = {}, std::vector<double>* loss_trace = nullptr) {
  if (opts.dim < 1) fail(ErrorCode::InvalidArgument, "embedding dimension must be at least 1");
  if (g.nnz() == 0) fail(ErrorCode::InvalidArgument, "graph has no edges");
  if (!(opts.reg >= 0) || !(opts.lr > 0)) fail(ErrorCode::InvalidArgument, "GF needs reg >= 0 and lr > 0");
  const auto entries = gf_entries(g, opts.negatives_per_edge, opts.seed);
  Rng init(derive_seed(opts.seed, "gf-init"));
  const auto nu = static_cast<Eigen::Index>(g.user_count()), nr = static_cast<Eigen::Index>(g.repo_count());
  Matrix x(nu, opts.dim), y(nr, opts.dim);
  const double s = opts.init_scale / std::sqrt(static_cast<double>(opts.dim));
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = s * standard_normal(init);
  for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = s * standard_normal(init);

  std::vector<std::size_t> order(entries.size());
  std::iota(order.begin(), order.end(), 0);
  double lr = opts.lr;
  double loss = gf_loss(entries, x, y, opts.reg);
  if (loss_trace) loss_trace->assign(1, loss);
  Matrix bx, by;
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    bx = x;
    by = y;
    Rng rng(derive_seed(opts.seed, "gf-epoch", static_cast<std::uint64_t>(epoch)));
    shuffle(rng, order);
    for (auto i : order) {
      const auto u = entries.user[i], r = entries.repo[i];
      const double d = entries.target[i] - x.row(u).dot(y.row(r));
      const Vector xu = x.row(u);
      x.row(u) += lr * (2 * d * y.row(r) - (2 * opts.reg / entries.user_degree[u]) * x.row(u));
      y.row(r) += lr * (2 * d * xu.transpose() - (2 * opts.reg / entries.repo_degree[r]) * y.row(r));
    }
    const double next = gf_loss(entries, x, y, opts.reg);
    if (!std::isfinite(next)) fail(ErrorCode::NonFinite, "GF loss diverged; lower the learning rate");
    if (next > loss) {
      x = bx;
      y = by;
      lr *= 0.5;
    } else {
      loss = next;
      lr *= opts.lr_decay;
    }
    if (loss_trace) loss_trace->push_back(loss);
  }
  return {g.type(), EmbeddingMethod::GF, g.users(), g.repos(), std::move(x), std::move(y)};
}

// -- Spectral helpers -----------------------------------------------------------

inline SparseMatrix adjacency_matrix(const BipartiteGraph& g) {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(g.nnz());
  g.for_each_edge([&](std::size_t u, std::size_t r, double w) {
    t.emplace_back(static_cast<int>(u), static_cast<int>(r), w);
  });
  SparseMatrix b(static_cast<Eigen::Index>(g.user_count()), static_cast<Eigen::Index>(g.repo_count()));
  b.setFromTriplets(t.begin(), t.end());
  return b;
}

/// Component label per joint node (users first, then repos).
inline std::vector<std::uint32_t> bipartite_components(const BipartiteGraph& g, std::uint32_t* count = nullptr) {
  const std::size_t nu = g.user_count(), n = nu + g.repo_count();
  std::vector<std::uint32_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0u);
  auto find = [&](std::uint32_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  g.for_each_edge([&](std::size_t u, std::size_t r, double) {
    const auto a = find(static_cast<std::uint32_t>(u)), b = find(static_cast<std::uint32_t>(nu + r));
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  });
  std::vector<std::uint32_t> label(n, UINT32_MAX), remap(n, UINT32_MAX);
  std::uint32_t next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto root = find(static_cast<std::uint32_t>(i));
    if (remap[root] == UINT32_MAX) remap[root] = next++;
    label[i] = remap[root];
  }
  if (count) *count = next;
  return label;
}

/// sqrt(max row sum * max column sum): an upper bound on the largest singular value.
inline double singular_bound(const SparseMatrix& b) {
  double row_max = 0;
  Vector col_sum = Vector::Zero(b.cols());
  for (Eigen::Index u = 0; u < b.rows(); ++u) {
    double s = 0;
    for (SparseMatrix::InnerIterator it(b, u); it; ++it) {
      s += std::abs(it.value());
      col_sum(it.col()) += std::abs(it.value());
    }
    row_max = std::max(row_max, s);
  }
  return std::sqrt(row_max * (b.cols() ? col_sum.maxCoeff() : 0.0));
}

/// Largest singular value of the adjacency, which is the spectral radius of the
/// joint symmetric adjacency.
inline double spectral_radius(const BipartiteGraph& g, const SubspaceOptions& sub = {}) {
  const SparseMatrix b = adjacency_matrix(g);
  const SparseMatrix bt = b.transpose();
  const Eigen::Index nu = b.rows(), n = b.rows() + b.cols();
  if (n <= 600) {
    const Matrix dense(b);
    Eigen::JacobiSVD<Matrix> svd(dense);
    return svd.singularValues()(0);
  }
  const double bound = 1.01 * singular_bound(b);
  auto apply = [&](const Matrix& v) {
    Matrix out(v.rows(), v.cols());
    out.topRows(nu) = b * v.bottomRows(n - nu);
    out.bottomRows(n - nu) = bt * v.topRows(nu);
    return out;
  };
  return top_eigenpairs(apply, n, 1, -bound, bound, Matrix(n, 0), sub).values(0);
}

// -- Laplacian eigenmaps --------------------------------------------------------

struct LeOptions {
  Eigen::Index dim = 64;
  Eigen::Index dense_limit = 1500;  // joint node count handled by the dense solver
  SubspaceOptions subspace{};
};

namespace detail {

// Inside each run of (numerically) equal eigenvalues, rotates to the basis that
// diagonalizes the user-side projector, ordered by its eigenvalue. Symmetric
// nodes then receive equal coordinates whenever the eigenspace allows it.
inline void canonicalize_clusters(const Vector& values, Matrix& vectors, Eigen::Index users) {
  const Eigen::Index m = values.size();
  for (Eigen::Index i = 0; i < m;) {
    Eigen::Index j = i + 1;
    while (j < m && std::abs(values(j) - values(i)) < 1e-8) ++j;
    if (j - i > 1) {
      Matrix block = vectors.middleCols(i, j - i);
      const Matrix p = block.topRows(users).transpose() * block.topRows(users);
      Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (p + p.transpose()));
      vectors.middleCols(i, j - i) = detail::orthonormalize(block * es.eigenvectors());
    }
    i = j;
  }
}

}  // namespace detail

/// Bottom nontrivial eigenvectors of the symmetric normalized Laplacian of the
/// joint user+repo graph; users are the first |U| rows, repos the rest.
inline Embedding train_le(const BipartiteGraph& g, const LeOptions& opts = {}, Vector* eigenvalues = nullptr) {
  if (opts.dim < 1) fail(ErrorCode::InvalidArgument, "embedding dimension must be at least 1");
  if (g.nnz() == 0) fail(ErrorCode::InvalidArgument, "graph has no edges");
  const Eigen::Index nu = static_cast<Eigen::Index>(g.user_count());
  const Eigen::Index n = nu + static_cast<Eigen::Index>(g.repo_count());
  std::uint32_t comps = 0;
  const auto label = bipartite_components(g, &comps);
  const Eigen::Index avail = n - comps;
  if (avail < 1) fail(ErrorCode::InvalidArgument, "graph has no nontrivial eigenvectors");
  const Eigen::Index d = std::min(opts.dim, avail);

  Vector deg = Vector::Zero(n);
  g.for_each_edge([&](std::size_t u, std::size_t r, double w) {
    deg(static_cast<Eigen::Index>(u)) += w;
    deg(nu + static_cast<Eigen::Index>(r)) += w;
  });
  const Vector inv_sqrt = deg.cwiseSqrt().cwiseInverse();

  Vector values;
  Matrix vectors;
  if (n <= opts.dense_limit) {
    Matrix lap = Matrix::Identity(n, n);
    g.for_each_edge([&](std::size_t u, std::size_t r, double w) {
      const auto i = static_cast<Eigen::Index>(u), j = nu + static_cast<Eigen::Index>(r);
      const double v = w * inv_sqrt(i) * inv_sqrt(j);
      lap(i, j) -= v;
      lap(j, i) -= v;
    });
    auto ep = dense_eigen(lap);
    values = ep.values.tail(avail);
    vectors = ep.vectors.rightCols(avail);
  } else {
    Matrix trivial = Matrix::Zero(n, comps);
    for (Eigen::Index i = 0; i < n; ++i) trivial(i, label[i]) = std::sqrt(deg(i));
    for (Eigen::Index c = 0; c < trivial.cols(); ++c) trivial.col(c).normalize();
    const SparseMatrix b = adjacency_matrix(g);
    SparseMatrix nb = inv_sqrt.head(nu).asDiagonal() * b * inv_sqrt.tail(n - nu).asDiagonal();
    const SparseMatrix nbt = nb.transpose();
    auto apply = [&](const Matrix& v) {
      Matrix out(v.rows(), v.cols());
      out.topRows(nu) = nb * v.bottomRows(n - nu);
      out.bottomRows(n - nu) = nbt * v.topRows(nu);
      return out;
    };
    const Eigen::Index k = std::min<Eigen::Index>(avail, d + 4);
    auto ep = top_eigenpairs(apply, n, k, -1.0, 1.0, trivial, opts.subspace);
    values = Vector::Ones(k) - ep.values;
    vectors = std::move(ep.vectors);
  }
  detail::canonicalize_clusters(values, vectors, nu);
  Matrix chosen = vectors.leftCols(d);
  canonical_signs(chosen);
  if (eigenvalues) *eigenvalues = values.head(d);
  return {g.type(), EmbeddingMethod::LE, g.users(), g.repos(), chosen.topRows(nu), chosen.bottomRows(n - nu)};
}

// -- HOPE -------------------------------------------------------------------------

struct HopeOptions {
  Eigen::Index dim = 64;
  double beta = 0;  // 0 picks 0.5 / spectral radius
  Eigen::Index dense_limit = 1500;
  SubspaceOptions subspace{};
};

/// Rank-d factorization of the user-repo block of the Katz matrix
/// (I - beta A)^-1 beta A. With A's singular triplets (s, u, v) that block is
/// sum beta s / (1 - beta^2 s^2) u v^T, so its top triplets are A's.
inline Embedding train_hope(const BipartiteGraph& g, const HopeOptions& opts = {}, double* beta_used = nullptr) {
  if (opts.dim < 1) fail(ErrorCode::InvalidArgument, "embedding dimension must be at least 1");
  if (g.nnz() == 0) fail(ErrorCode::InvalidArgument, "graph has no edges");
  const Eigen::Index nu = static_cast<Eigen::Index>(g.user_count()), nr = static_cast<Eigen::Index>(g.repo_count());
  const Eigen::Index d = std::min({opts.dim, nu, nr});
  Vector sigma;
  Matrix left, right;
  if (nu + nr <= opts.dense_limit) {
    Eigen::BDCSVD<Matrix> svd(Matrix(adjacency_matrix(g)), Eigen::ComputeThinU | Eigen::ComputeThinV);
    sigma = svd.singularValues().head(d);
    left = svd.matrixU().leftCols(d);
    right = svd.matrixV().leftCols(d);
  } else {
    const SparseMatrix b = adjacency_matrix(g);
    const SparseMatrix bt = b.transpose();
    const double bound = 1.01 * singular_bound(b);
    auto apply = [&](const Matrix& v) {
      Matrix out(v.rows(), v.cols());
      out.topRows(nu) = b * v.bottomRows(nr);
      out.bottomRows(nr) = bt * v.topRows(nu);
      return out;
    };
    auto ep = top_eigenpairs(apply, nu + nr, d, -bound, bound, Matrix(nu + nr, 0), opts.subspace);
    sigma = ep.values.cwiseMax(0.0);
    left = std::sqrt(2.0) * ep.vectors.topRows(nu);
    right = std::sqrt(2.0) * ep.vectors.bottomRows(nr);
  }
  const double rho = nu + nr <= opts.dense_limit ? sigma(0) : spectral_radius(g, opts.subspace);
  const double beta = opts.beta > 0 ? opts.beta : 0.5 / rho;
  if (beta * rho >= 1.0) fail(ErrorCode::BetaTooLarge, "beta must be below 1 / spectral radius");
  if (beta_used) *beta_used = beta;
  Vector scale(d);
  for (Eigen::Index i = 0; i < d; ++i) scale(i) = std::sqrt(beta * sigma(i) / (1 - beta * beta * sigma(i) * sigma(i)));
  Matrix x = left * scale.asDiagonal(), y = right * scale.asDiagonal();
  // Fix the sign of each singular pair by its user vector.
  for (Eigen::Index j = 0; j < d; ++j) {
    Eigen::Index best = 0;
    x.col(j).cwiseAbs().maxCoeff(&best);
    if (x(best, j) < 0) {
      x.col(j) *= -1;
      y.col(j) *= -1;
    }
  }
  return {g.type(), EmbeddingMethod::HOPE, g.users(), g.repos(), std::move(x), std::move(y)};
}

/// Gaussian vectors: inner products are random scores.
inline Embedding random_embedding(const BipartiteGraph& g, Eigen::Index dim, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "random-embedding"));
  Matrix x(static_cast<Eigen::Index>(g.user_count()), dim), y(static_cast<Eigen::Index>(g.repo_count()), dim);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = standard_normal(rng);
  for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = standard_normal(rng);
  return {g.type(), EmbeddingMethod::Random, g.users(), g.repos(), std::move(x), std::move(y)};
}

struct TrainOptions {
  GfOptions gf{};
  LeOptions le{};
  HopeOptions hope{};
};

inline Embedding train_embedding(const BipartiteGraph& g, EmbeddingMethod m, const TrainOptions& opts = {}) {
  switch (m) {
    case EmbeddingMethod::GF: return train_gf(g, opts.gf);
    case EmbeddingMethod::LE: return train_le(g, opts.le);
    case EmbeddingMethod::HOPE: return train_hope(g, opts.hope);
    case EmbeddingMethod::Random: return random_embedding(g, opts.gf.dim, opts.gf.seed);
  }
  fail(ErrorCode::InvalidArgument, "unknown embedding method");
}

// -- MAP ----------------------------------------------------------------------------

struct MapOptions {
  std::size_t k_max = 100;
  std::size_t full_ranking_limit = 10000;  // above this many candidates, rank a sample
  std::size_t sampled_candidates = 1000;
  std::uint64_t seed = 1;
};

struct MapResult {
  double map = 0;
  std::size_t nodes = 0;
  std::size_t nodes_with_edges = 0;
  bool sampled = false;
};

/// Precision averaged over the hit positions among the first k_max ranked
/// candidates; zero when nothing is hit.
inline double average_precision(std::span<const std::uint32_t> ranked, const std::unordered_set<std::uint32_t>& observed,
                                std::size_t k_max) {
  double sum = 0;
  std::size_t hits = 0;
  const std::size_t depth = std::min(k_max, ranked.size());
  for (std::size_t k = 0; k < depth; ++k) {
    if (!observed.count(ranked[k])) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(k + 1);
  }
  return hits ? sum / static_cast<double>(hits) : 0.0;
}

/// Mean average precision over all |U| + |R| nodes of the embedding. For each
/// node the candidates are the opposite-side nodes it is not linked to in
/// `train` (when given), ranked by inner product, ties by position.
inline MapResult map_score(const Embedding& emb, const BipartiteGraph& held_out, const MapOptions& opts = {},
                           const BipartiteGraph* train = nullptr) {
  const std::size_t nu = emb.user_ids.size(), nr = emb.repo_ids.size();
  std::unordered_map<std::string, std::uint32_t> upos, rpos;
  for (std::size_t i = 0; i < nu; ++i) upos.emplace(emb.user_ids[i], static_cast<std::uint32_t>(i));
  for (std::size_t i = 0; i < nr; ++i) rpos.emplace(emb.repo_ids[i], static_cast<std::uint32_t>(i));

  std::vector<std::unordered_set<std::uint32_t>> obs(nu + nr), known(nu + nr);
  auto collect = [&](const BipartiteGraph& g, std::vector<std::unordered_set<std::uint32_t>>& sets) {
    g.for_each_edge([&](std::size_t u, std::size_t r, double) {
      auto a = upos.find(g.users()[u]);
      auto b = rpos.find(g.repos()[r]);
      if (a == upos.end() || b == rpos.end()) return;
      sets[a->second].insert(b->second);
      sets[nu + b->second].insert(a->second);
    });
  };
  collect(held_out, obs);
  if (train) collect(*train, known);

  MapResult res;
  res.nodes = nu + nr;
  double total = 0;
  std::vector<std::uint32_t> cand;
  std::vector<double> score;
  for (std::size_t i = 0; i < nu + nr; ++i) {
    if (obs[i].empty()) continue;
    ++res.nodes_with_edges;
    const bool is_user = i < nu;
    const std::size_t other = is_user ? nr : nu;
    cand.clear();
    for (std::uint32_t c = 0; c < other; ++c)
      if (!known[i].count(c)) cand.push_back(c);
    if (cand.size() > opts.full_ranking_limit) {
      res.sampled = true;
      Rng rng(derive_seed(opts.seed, "map-candidates", i));
      std::vector<std::uint32_t> keep;
      for (auto c : obs[i])
        if (!known[i].count(c)) keep.push_back(c);
      std::sort(keep.begin(), keep.end());
      shuffle(rng, cand);
      for (std::size_t j = 0; j < cand.size() && keep.size() < opts.sampled_candidates + obs[i].size(); ++j)
        if (!obs[i].count(cand[j])) keep.push_back(cand[j]);
      cand = std::move(keep);
    }
    score.resize(other);
    if (is_user) {
      const Vector s = emb.repos * emb.users.row(static_cast<Eigen::Index>(i)).transpose();
      for (auto c : cand) score[c] = s(c);
    } else {
      const Vector s = emb.users * emb.repos.row(static_cast<Eigen::Index>(i - nu)).transpose();
      for (auto c : cand) score[c] = s(c);
    }
    auto better = [&](std::uint32_t a, std::uint32_t b) { return score[a] > score[b] || (score[a] == score[b] && a < b); };
    const std::size_t depth = std::min(opts.k_max, cand.size());
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(depth), cand.end(), better);
    total += average_precision(std::span<const std::uint32_t>(cand.data(), depth), obs[i], opts.k_max);
  }
  res.map = res.nodes ? total / static_cast<double>(res.nodes) : 0.0;
  return res;
}

// -- Persistence ----------------------------------------------------------------------

/// Writes `<prefix>.bin` (little-endian float32, user rows then repo rows) and
/// `<prefix>.json` (ids, dimension, event type, method).
inline void save_embedding(const Embedding& emb, const std::filesystem::path& prefix) {
  std::ofstream bin(prefix.string() + ".bin", std::ios::binary);
  if (!bin) fail(ErrorCode::Io, "cannot write " + prefix.string() + ".bin");
  auto put = [&](const Matrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        const float f = static_cast<float>(m(i, j));
        std::uint32_t bits;
        std::memcpy(&bits, &f, 4);
        const unsigned char b[4] = {static_cast<unsigned char>(bits), static_cast<unsigned char>(bits >> 8),
                                    static_cast<unsigned char>(bits >> 16), static_cast<unsigned char>(bits >> 24)};
        bin.write(reinterpret_cast<const char*>(b), 4);
      }
  };
  put(emb.users);
  put(emb.repos);
  nlohmann::json j = {{"event_type", std::string(to_string(emb.event_type))},
                      {"method", std::string(to_string(emb.method))},
                      {"dimension", emb.dim()},
                      {"users", emb.user_ids},
                      {"repos", emb.repo_ids}};
  std::ofstream side(prefix.string() + ".json");
  if (!side) fail(ErrorCode::Io, "cannot write " + prefix.string() + ".json");
  side << j.dump(1) << '\n';
}

inline Embedding load_embedding(const std::filesystem::path& prefix) {
  std::ifstream side(prefix.string() + ".json");
  if (!side) fail(ErrorCode::Io, "cannot read " + prefix.string() + ".json");
  const auto j = nlohmann::json::parse(side, nullptr, false);
  if (j.is_discarded()) fail(ErrorCode::MalformedRecord, "bad embedding sidecar");
  Embedding emb;
  emb.event_type = parse_event_type(j.at("event_type").get<std::string>());
  emb.method = parse_embedding_method(j.at("method").get<std::string>());
  emb.user_ids = j.at("users").get<std::vector<std::string>>();
  emb.repo_ids = j.at("repos").get<std::vector<std::string>>();
  const auto d = j.at("dimension").get<Eigen::Index>();
  std::ifstream bin(prefix.string() + ".bin", std::ios::binary);
  if (!bin) fail(ErrorCode::Io, "cannot read " + prefix.string() + ".bin");
  auto get = [&](Eigen::Index rows) {
    Matrix m(rows, d);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index k = 0; k < d; ++k) {
        unsigned char b[4];
        if (!bin.read(reinterpret_cast<char*>(b), 4)) fail(ErrorCode::MalformedRecord, "embedding file truncated");
        const std::uint32_t bits = b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
        float f;
        std::memcpy(&f, &bits, 4);
        m(i, k) = f;
      }
    return m;
  };
  emb.users = get(static_cast<Eigen::Index>(emb.user_ids.size()));
  emb.repos = get(static_cast<Eigen::Index>(emb.repo_ids.size()));
  return emb;
}

}  // namespace ghsim
