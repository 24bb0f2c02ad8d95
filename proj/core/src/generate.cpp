#include "qgd/generate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qgd {

namespace {

struct Named {
  Family family;
  const char* name;
};

constexpr Named kNames[] = {
    {Family::identity, "identity"},
    {Family::diag, "diag"},
    {Family::random_psd, "random-psd"},
    {Family::low_rank, "low-rank"},
    {Family::perturbed_permutation, "perturbed-permutation"},
    {Family::sign, "sign"},
};

Matrix gaussian(std::size_t rows, std::size_t cols, Rng& rng) {
  std::normal_distribution<double> nd;
  Matrix g(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, j) = nd(rng);
  }
  return g;
}

// Orthonormal rows x cols (cols <= rows) from the thin QR of a Gaussian.
Matrix orthonormal_columns(std::size_t rows, std::size_t cols, Rng& rng) {
  const Matrix g = gaussian(rows, cols, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(g.rows(), g.cols());
  const Matrix r = qr.matrixQR().topRows(g.cols()).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

void check_kappa(double kappa) {
  if (!(kappa >= 1.0) || !std::isfinite(kappa)) throw InvalidArgument("generate: kappa must be >= 1");
}

}  // namespace

std::string to_string(Family f) {
  for (const auto& e : kNames) {
    if (e.family == f) return e.name;
  }
  return "unknown";
}

Family parse_family(const std::string& name) {
  for (const auto& e : kNames) {
    if (name == e.name) return e.family;
  }
  throw InvalidArgument("unknown matrix family '" + name + "'");
}

std::vector<std::string> family_names() {
  std::vector<std::string> out;
  for (const auto& e : kNames) out.emplace_back(e.name);
  return out;
}

Matrix random_orthogonal(std::size_t n, Rng& rng) { return orthonormal_columns(n, n, rng); }

Vector geometric_spectrum(std::size_t n, double kappa) {
  check_kappa(kappa);
  Vector s(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const double f = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    s(static_cast<Eigen::Index>(i)) = std::pow(kappa, -f);
  }
  return s;
}

Matrix generate(Family family, const GenParams& params, Rng& rng) {
  const std::size_t n = params.n;
  const std::size_t m = params.m == 0 ? n : params.m;
  if (n == 0) throw InvalidArgument("generate: n must be positive");
  const auto ni = static_cast<Eigen::Index>(n);
  const auto mi = static_cast<Eigen::Index>(m);
  switch (family) {
    case Family::identity:
      if (m != n) throw InvalidArgument("generate: identity must be square");
      return Matrix::Identity(ni, ni);
    case Family::diag: {
      if (m != n) throw InvalidArgument("generate: diag must be square");
      if (params.diagonal.empty()) return geometric_spectrum(n, params.kappa).asDiagonal();
      if (params.diagonal.size() != n) throw InvalidArgument("generate: diagonal needs n entries");
      return Eigen::Map<const Vector>(params.diagonal.data(), ni).asDiagonal();
    }
    case Family::random_psd: {
      if (m != n) throw InvalidArgument("generate: random-psd must be square");
      const Matrix q = random_orthogonal(n, rng);
      const Matrix a = q * geometric_spectrum(n, params.kappa).asDiagonal() * q.transpose();
      return 0.5 * (a + a.transpose());
    }
    case Family::low_rank: {
      if (params.rank == 0 || params.rank > std::min(m, n)) throw InvalidArgument("generate: need 1 <= rank <= min(m, n)");
      const Matrix u = orthonormal_columns(m, params.rank, rng);
      const Matrix v = orthonormal_columns(n, params.rank, rng);
      return u * v.transpose();
    }
    case Family::perturbed_permutation: {
      if (m != n) throw InvalidArgument("generate: perturbed-permutation must be square");
      if (!(params.perturbation >= 0.0) || !std::isfinite(params.perturbation)) {
        throw InvalidArgument("generate: perturbation must be >= 0");
      }
      std::vector<std::size_t> perm(n);
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      // Uniform on [-1, 1] without 0, so every entry is nonzero when perturbed.
      std::uniform_real_distribution<double> ud(-1.0, 1.0);
      Matrix a(ni, ni);
      for (Eigen::Index j = 0; j < ni; ++j) {
        for (Eigen::Index i = 0; i < ni; ++i) {
          double u = ud(rng);
          while (u == 0.0) u = ud(rng);
          a(i, j) = params.perturbation * u;
        }
      }
      for (std::size_t i = 0; i < n; ++i) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(perm[i])) += 1.0;
      return a;
    }
    case Family::sign: {
      std::bernoulli_distribution coin;
      Matrix a(mi, ni);
      for (Eigen::Index j = 0; j < ni; ++j) {
        for (Eigen::Index i = 0; i < mi; ++i) a(i, j) = coin(rng) ? 1.0 : -1.0;
      }
      return a;
    }
  }
  throw InvalidArgument("generate: unknown family");
}

}  // namespace qgd
