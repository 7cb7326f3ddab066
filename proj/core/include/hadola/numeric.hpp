#pragma once

#include <span>
#include <vector>

namespace hadola {

// Softmax with max-subtraction.
std::vector<double> softmax(std::span<const double> logits);

// Sorts a copy of `values` and sums it pairwise, so the result does not depend
// on the order in which the values were produced.
double stable_sum(std::span<const double> values);
double stable_mean(std::span<const double> values);
// Population standard deviation built on stable_mean.
double stable_stddev(std::span<const double> values);

double dot(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> v);
double l1_distance(std::span<const double> a, std::span<const double> b);

// Cosine similarity; defined as 0 when either norm is below 1e-12.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

// Index of the largest entry; ties resolve to the smallest index.
std::size_t argmax(std::span<const double> values);

}  // namespace hadola
