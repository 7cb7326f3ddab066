#pragma once

// Brute-force reference implementations used by the tests. Nothing here calls
// the arithmetic of the library it checks: logits, softmax, KL, profiles and
// gradients are recomputed with naive loops.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hadola/annotations.hpp"
#include "hadola/model.hpp"

namespace hadola::oracle {

// Naive KL(h || p) in nats; SupportMismatch on length mismatch, +inf when
// p_i == 0 < h_i.
double kl_bruteforce(std::span<const double> h, std::span<const double> p);

// Sorted descending, truncated or zero-padded to k, renormalized.
std::vector<double> profile_bruteforce(std::span<const double> weights, std::size_t k);

double l1_bruteforce(std::span<const double> a, std::span<const double> b);

// Softmax classifier pieces, computed from scratch.
std::vector<double> logits(const SurrogateModel& model, std::span<const double> x);
std::vector<double> probabilities(std::span<const double> z);

// Reference HaDola loss (total only).
double loss_reference(const SurrogateModel& model, const SurrogateModel& hu_model, const Example& ex,
                      const LossWeights& w);

// Central differences of loss_reference for every parameter.
GradientVector finite_diff_grad(const SurrogateModel& model, const SurrogateModel& hu_model, const Example& ex,
                                const LossWeights& w, double step = 1e-5);

// Mean CE over `samples` with majority labels; used for finite-difference
// validation gradients.
double validation_loss(const SurrogateModel& model, const std::vector<AnnotatedSample>& samples);

// Most frequent answer with ties to the lexicographically smallest.
std::string majority_bruteforce(const AnnotatedSample& sample);

// Analytic CE gradient for one (x, label), built without the library.
GradientVector ce_gradient(const SurrogateModel& model, std::span<const double> x, std::size_t label);

// <g(theta0), grad L_val(theta0)> + <g(thetaT), grad L_val(thetaT)>.
double tracin_oracle(std::span<const double> x, std::size_t label, const SurrogateModel& theta0,
                     const SurrogateModel& theta_t, const std::vector<AnnotatedSample>& val_set);

// Same, with the validation gradients taken by central differences.
double tracin_oracle_fd(std::span<const double> x, std::size_t label, const SurrogateModel& theta0,
                        const SurrogateModel& theta_t, const std::vector<AnnotatedSample>& val_set,
                        double step = 1e-5);

}  // namespace hadola::oracle
