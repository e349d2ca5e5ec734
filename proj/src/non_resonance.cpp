#include "homolab/surface.hpp"

#include <cmath>
#include <limits>

namespace homolab {

namespace {

struct RationalLine {
  std::vector<Rational> q;  // nonzero, same orientation as the normal
};

std::optional<RationalLine> exact_line(const ExactDirection& e) {
  const std::size_t d = e.a.size();
  bool b_zero = true, a_zero = true;
  for (std::size_t i = 0; i < d; ++i) {
    b_zero = b_zero && e.b[i] == 0;
    a_zero = a_zero && e.a[i] == 0;
  }
  if (b_zero || e.radicand == 0) return RationalLine{e.a};
  if (a_zero) return RationalLine{e.b};
  // a + b sqrt(D) is a rational direction iff a and b are parallel.
  std::vector<std::vector<Rational>> rows{e.a, e.b};
  if (exact_rank(rows) == 2) return std::nullopt;
  // b = lambda a; the direction is a (1 + lambda sqrt(D)).
  std::size_t i = 0;
  while (e.a[i] == 0) ++i;
  const Rational lambda = e.b[i] / e.a[i];
  const double factor = 1.0 + to_double(lambda) * std::sqrt(static_cast<double>(e.radicand));
  std::vector<Rational> q = e.a;
  if (factor < 0)
    for (auto& x : q) x = -x;
  return RationalLine{q};
}

std::optional<RationalLine> floating_line(const std::vector<double>& n, std::int64_t max_den) {
  std::size_t pivot = 0;
  for (std::size_t i = 1; i < n.size(); ++i)
    if (std::fabs(n[i]) > std::fabs(n[pivot])) pivot = i;
  if (n[pivot] == 0.0) return std::nullopt;
  std::vector<Rational> q(n.size());
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (i == pivot) {
      q[i] = Rational(n[pivot] > 0 ? 1 : -1);
      continue;
    }
    const double ratio = n[i] / n[pivot];
    const double tol = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::fabs(ratio));
    const auto pq = reconstruct_rational(ratio, max_den, tol);
    if (!pq) return std::nullopt;
    q[i] = Rational(pq->first, pq->second) * (n[pivot] > 0 ? 1 : -1);
  }
  return RationalLine{q};
}

std::vector<double> sample_normal(const SurfaceChart& s, int piece) {
  if (s.dimension() == 2) {
    const auto& c = *s.curves()[piece];
    const Vec2 n = c.normal(0.5 * (c.t0() + c.t1()));
    return {n.x(), n.y()};
  }
  const auto& p = *s.patches()[piece];
  const auto ur = p.u_range();
  const auto vr = p.v_range();
  const Vec3 n = p.normal(0.5 * (ur[0] + ur[1]), 0.5 * (vr[0] + vr[1]));
  return {n.x(), n.y(), n.z()};
}

}  // namespace

NonResonanceVerdict check_non_resonance(const SurfaceChart& surface, const std::vector<std::vector<int>>& lattice,
                                        std::int64_t max_denominator) {
  const int d = surface.dimension();
  std::vector<std::vector<Rational>> basis;
  if (lattice.empty()) {
    for (int i = 0; i < d; ++i) {
      std::vector<Rational> row(d, Rational(0));
      row[i] = 1;
      basis.push_back(row);
    }
  } else {
    for (const auto& row : lattice) {
      if (static_cast<int>(row.size()) != d) throw NonResonanceError("degenerate lattice basis: wrong vector length");
      std::vector<Rational> r;
      for (int v : row) r.emplace_back(v);
      basis.push_back(r);
    }
    if (exact_rank(basis) != static_cast<int>(basis.size()))
      throw NonResonanceError("degenerate lattice basis: vectors are linearly dependent");
  }
  if (max_denominator < 1) throw NonResonanceError("max_denominator must be positive");
  const int basis_rank = static_cast<int>(basis.size());

  NonResonanceVerdict verdict;
  for (int piece = 0; piece < surface.piece_count(); ++piece) {
    const PieceFlag flag = surface.flag(piece);
    if (flag == PieceFlag::exotic)
      throw NonResonanceError("undecidable for this piece type: piece " + std::to_string(piece) + " (" +
                              (d == 2 ? surface.curves()[piece]->type() : surface.patches()[piece]->type()) + ")");
    if (flag != PieceFlag::flat) continue;

    const auto exact = d == 2 ? surface.curves()[piece]->exact_normal() : surface.patches()[piece]->exact_normal();
    const auto normal = sample_normal(surface, piece);
    const auto line = exact ? exact_line(*exact) : floating_line(normal, max_denominator);
    if (!line) continue;
    auto rows = basis;
    rows.push_back(line->q);
    if (exact_rank(rows) != basis_rank) continue;

    OffendingPiece off;
    off.piece = piece;
    off.normal = normal;
    for (const auto& k : primitive_direction(line->q)) off.k.push_back(k.convert_to<long long>());
    verdict.offending.push_back(off);
    verdict.rational_measure += surface.piece_measure(piece);
  }
  verdict.satisfies = verdict.rational_measure == 0.0;
  return verdict;
}

}  // namespace homolab
