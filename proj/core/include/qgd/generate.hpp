#pragma once

// Seeded test-matrix families.

#include <string>
#include <vector>

#include "qgd/types.hpp"

namespace qgd {

enum class Family {
  identity,               // I_n
  diag,                   // given diagonal, or a geometric spectrum in [1/kappa, 1]
  random_psd,             // Q diag(geometric in [1/kappa, 1]) Q^T, Q Haar orthogonal
  low_rank,               // U V^T with orthonormal columns, so ||A||_F = sqrt(rank)
  perturbed_permutation,  // a random permutation plus perturbation * uniform(-1, 1)
  sign,                   // uniform +-1 entries
};

std::string to_string(Family f);
/// Accepts the names printed by to_string. Throws InvalidArgument otherwise.
Family parse_family(const std::string& name);
std::vector<std::string> family_names();

struct GenParams {
  std::size_t n = 4;
  std::size_t m = 0;  // rows; 0 means square
  double kappa = 4.0;
  std::size_t rank = 2;
  double perturbation = 0.01;
  std::vector<double> diagonal;  // explicit diagonal for Family::diag
};

/// Throws InvalidArgument on parameters the family cannot honor.
Matrix generate(Family family, const GenParams& params, Rng& rng);

/// Haar-distributed orthogonal n x n matrix (QR of a Gaussian matrix with the
/// sign of R's diagonal fixed).
Matrix random_orthogonal(std::size_t n, Rng& rng);

/// n values spaced geometrically from 1 down to 1/kappa.
Vector geometric_spectrum(std::size_t n, double kappa);

}  // namespace qgd
