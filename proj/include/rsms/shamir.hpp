#pragma once

#include <concepts>
#include <span>
#include <stdexcept>
#include <vector>

#include "rsms/curve.hpp"
#include "rsms/rng.hpp"

namespace rsms {

// The sharing code is generic over the coefficient field so that small toy
// fields can drive exhaustive cross-checks next to the production scalar
// field.
template <class F>
concept ShamirField = requires(const F a, const F b, Rng& rng) {
  { a.add(b) } -> std::same_as<F>;
  { a.sub(b) } -> std::same_as<F>;
  { a.mul(b) } -> std::same_as<F>;
  { a.neg() } -> std::same_as<F>;
  { a.inverse() } -> std::same_as<F>;
  { a.is_zero() } -> std::same_as<bool>;
  { a == b } -> std::same_as<bool>;
  { F::zero() } -> std::same_as<F>;
  { F::one() } -> std::same_as<F>;
  { F::random(rng) } -> std::same_as<F>;
};

template <ShamirField F>
struct Share {
  F x;  // evaluation point, nonzero
  F y;  // f(x)
};

namespace detail {

template <ShamirField F>
void require_distinct_nonzero(std::span<const F> xs) {
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i].is_zero())
      throw std::invalid_argument("shamir: zero evaluation point");
    for (std::size_t j = i + 1; j < xs.size(); ++j)
      if (xs[i] == xs[j])
        throw std::invalid_argument("shamir: duplicate evaluation point");
  }
}

}  // namespace detail

// Horner evaluation of sum_k coeffs[k] * x^k.
template <ShamirField F>
F poly_eval(std::span<const F> coeffs, const F& x) {
  F acc = F::zero();
  for (std::size_t i = coeffs.size(); i-- > 0;) acc = acc.mul(x).add(coeffs[i]);
  return acc;
}

// Degree-N polynomial with constant term = secret and uniformly random
// higher coefficients, evaluated at the given N+1 points.
template <ShamirField F>
std::vector<Share<F>> share_generate(const F& secret, std::span<const F> xs,
                                     std::size_t degree, Rng& rng) {
  if (xs.size() != degree + 1)
    throw std::invalid_argument("share_generate: need degree+1 evaluation points");
  detail::require_distinct_nonzero(xs);
  std::vector<F> coeffs;
  coeffs.reserve(degree + 1);
  coeffs.push_back(secret);
  for (std::size_t i = 0; i < degree; ++i) coeffs.push_back(F::random(rng));
  std::vector<Share<F>> shares;
  shares.reserve(xs.size());
  for (const F& x : xs)
    shares.push_back(Share<F>{x, poly_eval(std::span<const F>(coeffs), x)});
  return shares;
}

// lambda_i = prod_{r != i} (-x_r) / (x_i - x_r); sum_i lambda_i f(x_i) = f(0).
template <ShamirField F>
F lagrange_coeff_at_zero(std::span<const F> xs, std::size_t i) {
  if (i >= xs.size()) throw std::invalid_argument("lagrange: index out of range");
  detail::require_distinct_nonzero(xs);
  F num = F::zero();
  F den = F::zero();
  bool first = true;
  for (std::size_t r = 0; r < xs.size(); ++r) {
    if (r == i) continue;
    if (first) {
      num = xs[r].neg();
      den = xs[i].sub(xs[r]);
      first = false;
    } else {
      num = num.mul(xs[r].neg());
      den = den.mul(xs[i].sub(xs[r]));
    }
  }
  if (first) return F::one();  // single node: coefficient is 1
  return num.mul(den.inverse());
}

template <ShamirField F>
std::vector<F> lagrange_coeffs_at_zero(std::span<const F> xs) {
  std::vector<F> out;
  out.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i)
    out.push_back(lagrange_coeff_at_zero(xs, i));
  return out;
}

// Interpolates f(0) from degree+1 shares. With fewer shares than the degree
// requires, the result is an arbitrary field element; callers verify against
// the published commitment.
template <ShamirField F>
F share_reconstruct(std::span<const Share<F>> shares) {
  if (shares.empty()) throw std::invalid_argument("share_reconstruct: no shares");
  std::vector<F> xs;
  xs.reserve(shares.size());
  for (const auto& s : shares) xs.push_back(s.x);
  detail::require_distinct_nonzero(std::span<const F>(xs));
  F acc = F::zero();
  for (std::size_t i = 0; i < shares.size(); ++i) {
    F li = lagrange_coeff_at_zero(std::span<const F>(xs), i);
    acc = acc.add(li.mul(shares[i].y));
  }
  return acc;
}

}  // namespace rsms
