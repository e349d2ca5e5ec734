#include "homolab/exact.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace homolab {

Rational parse_rational(const std::string& text) {
  const auto slash = text.find('/');
  try {
    if (slash == std::string::npos) return Rational(BigInt(text));
    BigInt num(text.substr(0, slash));
    BigInt den(text.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("zero denominator in '" + text + "'");
    return Rational(num, den);
  } catch (const std::runtime_error&) {
    throw std::invalid_argument("not a rational literal: '" + text + "'");
  }
}

double to_double(const Rational& r) { return r.convert_to<double>(); }

double QuadraticSurd::value(long radicand) const {
  if (b == 0) return to_double(a);
  return to_double(a) + to_double(b) * std::sqrt(static_cast<double>(radicand));
}

int exact_rank(std::vector<std::vector<Rational>> rows) {
  if (rows.empty()) return 0;
  const std::size_t cols = rows.front().size();
  int rank = 0;
  for (std::size_t c = 0; c < cols && rank < static_cast<int>(rows.size()); ++c) {
    std::size_t pivot = rank;
    while (pivot < rows.size() && rows[pivot][c] == 0) ++pivot;
    if (pivot == rows.size()) continue;
    std::swap(rows[pivot], rows[rank]);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (r == static_cast<std::size_t>(rank) || rows[r][c] == 0) continue;
      const Rational f = rows[r][c] / rows[rank][c];
      for (std::size_t k = c; k < cols; ++k) rows[r][k] -= f * rows[rank][k];
    }
    ++rank;
  }
  return rank;
}

std::vector<BigInt> primitive_direction(const std::vector<Rational>& v) {
  BigInt lcm = 1;
  for (const auto& x : v) {
    const BigInt den = boost::multiprecision::denominator(x);
    lcm = lcm / boost::multiprecision::gcd(lcm, den) * den;
  }
  std::vector<BigInt> out;
  BigInt g = 0;
  for (const auto& x : v) {
    out.push_back(boost::multiprecision::numerator(x) * (lcm / boost::multiprecision::denominator(x)));
    g = boost::multiprecision::gcd(g, boost::multiprecision::abs(out.back()));
  }
  if (g == 0) throw std::invalid_argument("primitive_direction: zero vector");
  for (auto& x : out) x /= g;
  return out;
}

std::optional<std::pair<std::int64_t, std::int64_t>> reconstruct_rational(double x, std::int64_t max_denominator,
                                                                          double tol) {
  if (!std::isfinite(x)) return std::nullopt;
  // Convergents h/k of the continued fraction of x.
  const double sign = x < 0 ? -1.0 : 1.0;
  double r = std::fabs(x);
  std::int64_t h0 = 1, k0 = 0;
  std::int64_t h1 = static_cast<std::int64_t>(std::floor(r)), k1 = 1;
  double frac = r - std::floor(r);
  std::optional<std::pair<std::int64_t, std::int64_t>> best;
  double best_err = std::numeric_limits<double>::infinity();
  auto consider = [&](std::int64_t h, std::int64_t k) {
    const double err = std::fabs(r - static_cast<double>(h) / static_cast<double>(k));
    if (err <= tol && err < best_err) {
      best_err = err;
      best = {static_cast<std::int64_t>(sign) * h, k};
    }
  };
  consider(h1, k1);
  for (int it = 0; it < 64 && frac > 0.0; ++it) {
    const double inv = 1.0 / frac;
    if (inv > 9e18) break;
    const auto a = static_cast<std::int64_t>(std::floor(inv));
    frac = inv - std::floor(inv);
    if (a > 0 && k1 > (max_denominator - k0) / a) {
      // Largest admissible semiconvergent.
      const std::int64_t t = (max_denominator - k0) / k1;
      if (t > 0) consider(t * h1 + h0, t * k1 + k0);
      break;
    }
    const std::int64_t h2 = a * h1 + h0;
    const std::int64_t k2 = a * k1 + k0;
    h0 = h1;
    k0 = k1;
    h1 = h2;
    k1 = k2;
    consider(h1, k1);
  }
  return best;
}

Rational exact_from_double(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("exact_from_double: non-finite value");
  int exp = 0;
  const double mant = std::frexp(x, &exp);
  const auto scaled = static_cast<std::int64_t>(std::ldexp(mant, 53));
  Rational out{BigInt(scaled)};
  const int shift = exp - 53;
  if (shift >= 0) out *= Rational(BigInt(1) << shift);
  else out /= Rational(BigInt(1) << (-shift));
  return out;
}

}  // namespace homolab
