/*
 * (C) Copyright 2026 rigidreg contributors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <span>
#include <string>
#include <vector>

#include "rigidreg/matrix.hpp"
#include "rigidreg/rng.hpp"

namespace rigidreg {

/// P_ij = cosine similarity of source embedding row i and target row j.
/// Rows with norm below 1e-12 produce zero similarity to everything.
/// Throws std::invalid_argument when the embedding widths differ.
Matrix soft_correspondence(const Matrix& hx, const Matrix& hy);

/// Row-wise argmax of P; ties resolve to the lowest column.
std::vector<int> hard_map(const Matrix& p);

/// Per-source confidence p_m (row maxima clipped at zero) and the sampling
/// PMF s. When every clipped maximum is zero, s falls back to uniform.
struct ConfidenceDistribution {
  std::vector<double> p_m;
  std::vector<double> s;
};

ConfidenceDistribution confidence(const Matrix& p);

/// `size` i.i.d. draws from dist.s, with replacement.
std::vector<int> sample_bag(const ConfidenceDistribution& dist, int size, Rng& rng);

/// Multiplicity of each source index in the bag; the counts sum to |bag|.
std::vector<int> bag_weights(std::span<const int> bag, int n_source);

/// Gradient of a scalar loss through the cosine layer: given dL/dP, fills
/// dL/dhx and dL/dhy. Zero-norm rows receive zero gradient.
void cosine_backward(const Matrix& hx, const Matrix& hy, const Matrix& p,
                     const Matrix& d_p, Matrix& d_hx, Matrix& d_hy);

/// Debug dump: P (one row per line) followed by the sampling PMF, as CSV.
void dump_correspondence_csv(const Matrix& p, const ConfidenceDistribution& dist,
                             const std::string& path);

}  // namespace rigidreg
