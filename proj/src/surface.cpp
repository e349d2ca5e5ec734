#include "homolab/surface.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace homolab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kClosureTol = 1e-12;

struct Gauss8 {
  std::array<double, 8> x{};
  std::array<double, 8> w{};
  Gauss8() {
    using rule = boost::math::quadrature::gauss<double, 8>;
    const auto& a = rule::abscissa();
    const auto& wt = rule::weights();
    for (int i = 0; i < 4; ++i) {
      x[3 - i] = -a[i];
      w[3 - i] = wt[i];
      x[4 + i] = a[i];
      w[4 + i] = wt[i];
    }
  }
};

const Gauss8& gauss8() {
  static const Gauss8 g;
  return g;
}

double sgn(double v) { return (v > 0) - (v < 0); }

}  // namespace

const std::array<double, 8>& gauss8_nodes() { return gauss8().x; }
const std::array<double, 8>& gauss8_weights() { return gauss8().w; }

std::string to_string(PieceFlag flag) {
  switch (flag) {
    case PieceFlag::flat: return "flat";
    case PieceFlag::strictly_curved: return "strictly_curved";
    case PieceFlag::curved: return "curved";
    case PieceFlag::exotic: return "exotic";
  }
  return "unknown";
}

// ---- CurvePiece ----------------------------------------------------------

Vec2 CurvePiece::normal(double t) const {
  const Vec2 v = d1(t);
  return Vec2(v.y(), -v.x()) / v.norm();
}

double CurvePiece::curvature(double t) const {
  const Vec2 a = d1(t);
  const Vec2 b = d2(t);
  return (a.x() * b.y() - a.y() * b.x()) / std::pow(a.norm(), 3);
}

double CurvePiece::arc_length(double a, double b) const {
  if (b <= a) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate([this](double t) { return speed(t); }, a, b,
                                                                     12, 1e-14);
}

double CurvePiece::param_at_arc_length(double s) const {
  const double total = arc_length(t0_, t1_);
  if (s <= 0.0) return t0_;
  if (s >= total) return t1_;
  double lo = t0_, hi = t1_;
  double t = t0_ + (t1_ - t0_) * s / total;
  for (int it = 0; it < 60; ++it) {
    const double f = arc_length(t0_, t) - s;
    if (std::fabs(f) <= 1e-14 * std::max(1.0, total)) break;
    if (f > 0) hi = t;
    else lo = t;
    double next = t - f / speed(t);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    t = next;
  }
  return t;
}

std::pair<double, double> CurvePiece::closest(const Vec2& x) const {
  constexpr int kSamples = 64;
  double best_t = t0_;
  double best_d = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= kSamples; ++i) {
    const double t = t0_ + (t1_ - t0_) * i / kSamples;
    const double dd = (position(t) - x).squaredNorm();
    if (dd < best_d) {
      best_d = dd;
      best_t = t;
    }
  }
  double t = best_t;
  for (int it = 0; it < 30; ++it) {
    const Vec2 r = position(t) - x;
    const Vec2 p1 = d1(t);
    const double g = r.dot(p1);
    const double gp = p1.squaredNorm() + r.dot(d2(t));
    if (gp <= 0.0) break;
    const double next = std::clamp(t - g / gp, t0_, t1_);
    const double step = std::fabs(next - t);
    t = next;
    if (step <= 1e-15 * std::max(1.0, std::fabs(t))) break;
  }
  const double d = (position(t) - x).norm();
  if (d * d <= best_d) return {t, d};
  return {best_t, std::sqrt(best_d)};
}

// ---- PatchPiece ----------------------------------------------------------

Vec3 PatchPiece::normal(double u, double v) const {
  const auto dd = d1(u, v);
  const Vec3 c = dd[0].cross(dd[1]);
  return orientation_ * c / c.norm();
}

std::array<double, 2> PatchPiece::principal_curvatures(double u, double v) const {
  const auto dd = d1(u, v);
  const auto sd = d2(u, v);
  const Vec3 n = normal(u, v);
  Eigen::Matrix2d first, second;
  first << dd[0].dot(dd[0]), dd[0].dot(dd[1]), dd[0].dot(dd[1]), dd[1].dot(dd[1]);
  second << sd[0].dot(n), sd[1].dot(n), sd[1].dot(n), sd[2].dot(n);
  // Generalized symmetric eigenproblem -II x = k I x.
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix2d> es(-second, first);
  const auto ev = es.eigenvalues();
  return {ev(0), ev(1)};
}

// ---- builtin curves -------------------------------------------------------

EllipseArc::EllipseArc(Vec2 center, double a, double b, double t0, double t1)
    : CurvePiece(t0, t1), c_(center), a_(a), b_(b) {
  if (!(a > 0 && b > 0)) throw GeometryError("ellipse semi-axes must be positive");
}
Vec2 EllipseArc::position(double t) const { return c_ + Vec2(a_ * std::cos(t), b_ * std::sin(t)); }
Vec2 EllipseArc::d1(double t) const { return Vec2(-a_ * std::sin(t), b_ * std::cos(t)); }
Vec2 EllipseArc::d2(double t) const { return Vec2(-a_ * std::cos(t), -b_ * std::sin(t)); }

Segment::Segment(Vec2 p0, Vec2 p1, std::optional<ExactDirection> exact_edge) : CurvePiece(0.0, 1.0), p0_(p0), p1_(p1) {
  if ((p1 - p0).norm() == 0.0) throw GeometryError("degenerate polygon edge");
  if (exact_edge) {
    ExactDirection n;
    n.radicand = exact_edge->radicand;
    n.a = {exact_edge->a[1], -exact_edge->a[0]};
    n.b = {exact_edge->b[1], -exact_edge->b[0]};
    normal_ = n;
  }
}

SuperellipseArc::SuperellipseArc(double a, double b, double p, double t0, double t1)
    : CurvePiece(t0, t1), a_(a), b_(b), p_(p) {
  if (!(a > 0 && b > 0)) throw GeometryError("superellipse semi-axes must be positive");
  if (!(p >= 2.0)) throw GeometryError("superellipse exponent must be >= 2");
}

std::array<double, 3> SuperellipseArc::radius(double t) const {
  const double c = std::cos(t), s = std::sin(t);
  const double u = std::fabs(c), v = std::fabs(s);
  const double u1 = -sgn(c) * s, v1 = sgn(s) * c;
  const double u2 = -u, v2 = -v;
  const double ap = std::pow(a_, p_), bp = std::pow(b_, p_);
  const double p = p_;
  const double g = std::pow(u, p) / ap + std::pow(v, p) / bp;
  const double g1 = p * (std::pow(u, p - 1) * u1 / ap + std::pow(v, p - 1) * v1 / bp);
  const double g2 = p * (((p - 1) * std::pow(u, p - 2) * u1 * u1 + std::pow(u, p - 1) * u2) / ap +
                         ((p - 1) * std::pow(v, p - 2) * v1 * v1 + std::pow(v, p - 1) * v2) / bp);
  const double r = std::pow(g, -1.0 / p);
  const double r1 = -(1.0 / p) * std::pow(g, -1.0 / p - 1) * g1;
  const double r2 = -(1.0 / p) * ((-1.0 / p - 1) * std::pow(g, -1.0 / p - 2) * g1 * g1 + std::pow(g, -1.0 / p - 1) * g2);
  return {r, r1, r2};
}

Vec2 SuperellipseArc::position(double t) const {
  const double r = radius(t)[0];
  return Vec2(r * std::cos(t), r * std::sin(t));
}

Vec2 SuperellipseArc::d1(double t) const {
  const auto [r, r1, r2] = radius(t);
  const double c = std::cos(t), s = std::sin(t);
  return Vec2(r1 * c - r * s, r1 * s + r * c);
}

Vec2 SuperellipseArc::d2(double t) const {
  const auto [r, r1, r2] = radius(t);
  const double c = std::cos(t), s = std::sin(t);
  return Vec2(r2 * c - 2 * r1 * s - r * c, r2 * s + 2 * r1 * c - r * s);
}

GenericCurve::GenericCurve(double t0, double t1, Fn pos, Fn d1, Fn d2, PieceFlag flag, std::string type)
    : CurvePiece(t0, t1), pos_(std::move(pos)), d1_(std::move(d1)), d2_(std::move(d2)), flag_(flag),
      type_(std::move(type)) {}

MovedCurve::MovedCurve(std::shared_ptr<const CurvePiece> base, const Eigen::Matrix2d& rotation, const Vec2& shift)
    : CurvePiece(base->t0(), base->t1()), base_(std::move(base)), rot_(rotation), shift_(shift) {}

std::optional<ExactDirection> MovedCurve::exact_normal() const {
  if (rot_ != Eigen::Matrix2d::Identity()) return std::nullopt;
  return base_->exact_normal();
}

// ---- builtin patches ------------------------------------------------------

EllipsoidPatch::EllipsoidPatch(Vec3 center, double a, double b, double c)
    : PatchPiece({0.0, 2 * kPi}, {0.0, kPi}), c_(center), a_(a), b_(b), cc_(c) {
  if (!(a > 0 && b > 0 && c > 0)) throw GeometryError("ellipsoid semi-axes must be positive");
  set_orientation(-1);
}

Vec3 EllipsoidPatch::position(double u, double v) const {
  return c_ + Vec3(a_ * std::sin(v) * std::cos(u), b_ * std::sin(v) * std::sin(u), cc_ * std::cos(v));
}

std::array<Vec3, 2> EllipsoidPatch::d1(double u, double v) const {
  const double su = std::sin(u), cu = std::cos(u), sv = std::sin(v), cv = std::cos(v);
  return {Vec3(-a_ * sv * su, b_ * sv * cu, 0.0), Vec3(a_ * cv * cu, b_ * cv * su, -cc_ * sv)};
}

std::array<Vec3, 3> EllipsoidPatch::d2(double u, double v) const {
  const double su = std::sin(u), cu = std::cos(u), sv = std::sin(v), cv = std::cos(v);
  return {Vec3(-a_ * sv * cu, -b_ * sv * su, 0.0), Vec3(-a_ * cv * su, b_ * cv * cu, 0.0),
          Vec3(-a_ * sv * cu, -b_ * sv * su, -cc_ * cv)};
}

RevolutionPatch::RevolutionPatch(std::shared_ptr<const CurvePiece> profile)
    : PatchPiece({profile->t0(), profile->t1()}, {0.0, 2 * kPi}), profile_(std::move(profile)) {
  set_orientation(-1);
}

Vec3 RevolutionPatch::position(double u, double v) const {
  const Vec2 p = profile_->position(u);
  return Vec3(p.x() * std::cos(v), p.x() * std::sin(v), p.y());
}

std::array<Vec3, 2> RevolutionPatch::d1(double u, double v) const {
  const Vec2 p = profile_->position(u);
  const Vec2 q = profile_->d1(u);
  const double c = std::cos(v), s = std::sin(v);
  return {Vec3(q.x() * c, q.x() * s, q.y()), Vec3(-p.x() * s, p.x() * c, 0.0)};
}

std::array<Vec3, 3> RevolutionPatch::d2(double u, double v) const {
  const Vec2 p = profile_->position(u);
  const Vec2 q = profile_->d1(u);
  const Vec2 w = profile_->d2(u);
  const double c = std::cos(v), s = std::sin(v);
  return {Vec3(w.x() * c, w.x() * s, w.y()), Vec3(-q.x() * s, q.x() * c, 0.0), Vec3(-p.x() * c, -p.x() * s, 0.0)};
}

PieceFlag RevolutionPatch::flag() const {
  const PieceFlag pf = profile_->flag();
  if (pf == PieceFlag::exotic) return pf;
  if (pf == PieceFlag::flat) return profile_->d1(profile_->t0()).y() == 0.0 ? PieceFlag::flat : PieceFlag::curved;
  if (pf == PieceFlag::curved) return pf;
  // Parallel curvature z' / (r |x'|) must also stay positive.
  for (int i = 1; i < 32; ++i) {
    const double t = profile_->t0() + (profile_->t1() - profile_->t0()) * i / 32.0;
    const Vec2 p = profile_->position(t);
    const Vec2 q = profile_->d1(t);
    if (!(q.y() / (p.x() * q.norm()) > 0.0)) return PieceFlag::curved;
  }
  return PieceFlag::strictly_curved;
}

std::optional<ExactDirection> RevolutionPatch::exact_normal() const {
  if (flag() != PieceFlag::flat) return std::nullopt;
  ExactDirection n;
  const double rp = profile_->d1(profile_->t0()).x();
  n.a = {Rational(0), Rational(0), Rational(rp > 0 ? -1 : 1)};
  n.b = {Rational(0), Rational(0), Rational(0)};
  return n;
}

// ---- SurfaceChart ---------------------------------------------------------

SurfaceChart SurfaceChart::circle(double r, Vec2 center) {
  SurfaceChart s = from_curves({std::make_shared<EllipseArc>(center, r, r, 0.0, 2 * kPi)}, "circle");
  return s;
}

SurfaceChart SurfaceChart::ellipse(double a, double b, Vec2 center) {
  return from_curves({std::make_shared<EllipseArc>(center, a, b, 0.0, 2 * kPi)}, "ellipse");
}

SurfaceChart SurfaceChart::polygon(const std::vector<Vec2>& v) {
  if (v.size() < 3) throw GeometryError("polygon needs at least three vertices");
  double area = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vec2& p = v[i];
    const Vec2& q = v[(i + 1) % v.size()];
    area += p.x() * q.y() - q.x() * p.y();
  }
  if (!(area > 0)) throw GeometryError("polygon vertices must be counter-clockwise");
  std::vector<std::shared_ptr<const CurvePiece>> pieces;
  for (std::size_t i = 0; i < v.size(); ++i) pieces.push_back(std::make_shared<Segment>(v[i], v[(i + 1) % v.size()]));
  return from_curves(std::move(pieces), "polygon");
}

SurfaceChart SurfaceChart::polygon_exact(const std::vector<std::array<QuadraticSurd, 2>>& v, long radicand) {
  if (v.size() < 3) throw GeometryError("polygon needs at least three vertices");
  if (radicand < 0 || radicand == 1) throw GeometryError("radicand must be 0 or >= 2");
  std::vector<Vec2> pts;
  for (const auto& p : v) pts.emplace_back(p[0].value(radicand), p[1].value(radicand));
  SurfaceChart s = polygon(pts);
  std::vector<std::shared_ptr<const CurvePiece>> pieces;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto& p = v[i];
    const auto& q = v[(i + 1) % v.size()];
    ExactDirection e;
    e.radicand = radicand;
    e.a = {q[0].a - p[0].a, q[1].a - p[1].a};
    e.b = {q[0].b - p[0].b, q[1].b - p[1].b};
    if (radicand == 0 && (e.b[0] != 0 || e.b[1] != 0)) throw GeometryError("irrational vertex part without a radicand");
    pieces.push_back(std::make_shared<Segment>(pts[i], pts[(i + 1) % v.size()], e));
  }
  s.curves_ = std::move(pieces);
  return s;
}

SurfaceChart SurfaceChart::superellipse(double a, double b, double p) {
  std::vector<std::shared_ptr<const CurvePiece>> pieces;
  for (int q = 0; q < 4; ++q) pieces.push_back(std::make_shared<SuperellipseArc>(a, b, p, q * kPi / 2, (q + 1) * kPi / 2));
  return from_curves(std::move(pieces), "superellipse");
}

SurfaceChart SurfaceChart::sphere(double r, Vec3 center) {
  SurfaceChart s = ellipsoid(r, r, r, center);
  s.name_ = "sphere";
  return s;
}

SurfaceChart SurfaceChart::ellipsoid(double a, double b, double c, Vec3 center) {
  SurfaceChart s;
  s.d_ = 3;
  s.name_ = "ellipsoid";
  s.patches_.push_back(std::make_shared<EllipsoidPatch>(center, a, b, c));
  return s;
}

SurfaceChart SurfaceChart::revolution(std::vector<std::shared_ptr<const CurvePiece>> profile) {
  if (profile.empty()) throw GeometryError("revolution needs a profile");
  const double r_start = profile.front()->position(profile.front()->t0()).x();
  const double r_end = profile.back()->position(profile.back()->t1()).x();
  if (std::fabs(r_start) > kClosureTol || std::fabs(r_end) > kClosureTol)
    throw GeometryError("revolution profile must start and end on the axis");
  for (std::size_t i = 0; i + 1 < profile.size(); ++i) {
    const Vec2 e = profile[i]->position(profile[i]->t1());
    const Vec2 s = profile[i + 1]->position(profile[i + 1]->t0());
    if ((e - s).norm() > kClosureTol) throw GeometryError("revolution profile is not connected");
  }
  SurfaceChart s;
  s.d_ = 3;
  s.name_ = "revolution";
  for (auto& p : profile) s.patches_.push_back(std::make_shared<RevolutionPatch>(p));
  return s;
}

SurfaceChart SurfaceChart::from_curves(std::vector<std::shared_ptr<const CurvePiece>> pieces, std::string name) {
  SurfaceChart s;
  s.d_ = 2;
  s.name_ = std::move(name);
  s.curves_ = std::move(pieces);
  s.validate_closed();
  return s;
}

void SurfaceChart::validate_closed() const {
  if (d_ != 2) return;
  if (curves_.empty()) throw GeometryError("surface has no pieces");
  double scale = 1.0;
  for (const auto& c : curves_) scale = std::max(scale, c->position(c->t0()).norm());
  for (std::size_t i = 0; i < curves_.size(); ++i) {
    const auto& a = curves_[i];
    const auto& b = curves_[(i + 1) % curves_.size()];
    const double gap = (a->position(a->t1()) - b->position(b->t0())).norm();
    if (gap > kClosureTol * scale)
      throw GeometryError("surface is not closed: gap " + std::to_string(gap) + " after piece " + std::to_string(i));
  }
}

PieceFlag SurfaceChart::flag(int piece) const {
  return d_ == 2 ? curves_.at(piece)->flag() : patches_.at(piece)->flag();
}

std::vector<QuadratureNode> SurfaceChart::quadrature(double nodes_per_unit) const {
  if (!(nodes_per_unit > 0)) throw GeometryError("quadrature density must be positive");
  const auto& g = gauss8();
  std::vector<QuadratureNode> nodes;
  if (d_ == 2) {
    for (int pi = 0; pi < static_cast<int>(curves_.size()); ++pi) {
      const auto& c = *curves_[pi];
      double vmax = 0.0;
      for (int i = 0; i <= 64; ++i) vmax = std::max(vmax, c.speed(c.t0() + (c.t1() - c.t0()) * i / 64.0));
      const double len = 1.05 * vmax * (c.t1() - c.t0());
      const auto panels = static_cast<std::int64_t>(std::max(1.0, std::ceil(len * nodes_per_unit / 8.0)));
      const std::size_t base = nodes.size();
      nodes.resize(base + panels * 8);
      const double hp = (c.t1() - c.t0()) / static_cast<double>(panels);
#pragma omp parallel for schedule(static)
      for (std::int64_t p = 0; p < panels; ++p) {
        const double mid = c.t0() + (p + 0.5) * hp;
        for (int q = 0; q < 8; ++q) {
          const double t = mid + 0.5 * hp * g.x[q];
          const Vec2 x = c.position(t);
          const Vec2 v = c.d1(t);
          const double sp = v.norm();
          QuadratureNode& node = nodes[base + p * 8 + q];
          node.x = Vec3(x.x(), x.y(), 0.0);
          node.n = Vec3(v.y() / sp, -v.x() / sp, 0.0);
          node.w = sp * 0.5 * hp * g.w[q];
          node.piece = pi;
          node.param = {t, 0.0};
        }
      }
    }
    return nodes;
  }
  for (int pi = 0; pi < static_cast<int>(patches_.size()); ++pi) {
    const auto& s = *patches_[pi];
    const auto ur = s.u_range();
    const auto vr = s.v_range();
    double su = 0.0, sv = 0.0;
    for (int i = 0; i <= 16; ++i)
      for (int j = 0; j <= 16; ++j) {
        const auto dd = s.d1(ur[0] + (ur[1] - ur[0]) * i / 16.0, vr[0] + (vr[1] - vr[0]) * j / 16.0);
        su = std::max(su, dd[0].norm());
        sv = std::max(sv, dd[1].norm());
      }
    const auto pu = static_cast<std::int64_t>(std::max(1.0, std::ceil(1.05 * su * (ur[1] - ur[0]) * nodes_per_unit / 8.0)));
    const auto pv = static_cast<std::int64_t>(std::max(1.0, std::ceil(1.05 * sv * (vr[1] - vr[0]) * nodes_per_unit / 8.0)));
    const double hu = (ur[1] - ur[0]) / static_cast<double>(pu);
    const double hv = (vr[1] - vr[0]) / static_cast<double>(pv);
    const std::size_t base = nodes.size();
    nodes.resize(base + pu * pv * 64);
#pragma omp parallel for schedule(static)
    for (std::int64_t cell = 0; cell < pu * pv; ++cell) {
      const std::int64_t iu = cell / pv, iv = cell % pv;
      for (int a = 0; a < 8; ++a)
        for (int b = 0; b < 8; ++b) {
          const double u = ur[0] + (iu + 0.5) * hu + 0.5 * hu * g.x[a];
          const double v = vr[0] + (iv + 0.5) * hv + 0.5 * hv * g.x[b];
          const auto dd = s.d1(u, v);
          const Vec3 c = dd[0].cross(dd[1]);
          const double area = c.norm();
          QuadratureNode& node = nodes[base + cell * 64 + a * 8 + b];
          node.x = s.position(u, v);
          node.n = area > 0 ? Vec3(s.orientation() * c / area) : Vec3::Zero();
          node.w = area * 0.25 * hu * hv * g.w[a] * g.w[b];
          node.piece = pi;
          node.param = {u, v};
        }
    }
  }
  return nodes;
}

double SurfaceChart::piece_measure(int piece) const {
  if (d_ == 2) {
    const auto& c = *curves_.at(piece);
    return c.arc_length(c.t0(), c.t1());
  }
  SurfaceChart single;
  single.d_ = 3;
  single.patches_ = {patches_.at(piece)};
  double sum = 0.0;
  for (const auto& n : single.quadrature(64.0)) sum += n.w;
  return sum;
}

double SurfaceChart::measure() const {
  double sum = 0.0;
  for (int i = 0; i < piece_count(); ++i) sum += piece_measure(i);
  return sum;
}

std::vector<double> SurfaceChart::curvature_at(int piece, std::span<const double> param) const {
  if (flag(piece) == PieceFlag::flat) throw GeometryError("curvature_at: piece " + std::to_string(piece) + " is flat");
  if (d_ == 2) {
    if (param.size() != 1) throw GeometryError("curvature_at: curve pieces take one parameter");
    return {curves_.at(piece)->curvature(param[0])};
  }
  if (param.size() != 2) throw GeometryError("curvature_at: surface pieces take two parameters");
  const auto k = patches_.at(piece)->principal_curvatures(param[0], param[1]);
  return {k[0], k[1]};
}

double SurfaceChart::distance(const Vec2& x) const {
  if (d_ != 2) throw GeometryError("distance is only available for curves");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : curves_) best = std::min(best, c->closest(x).second);
  return best;
}

double SurfaceChart::enclosed_measure() const {
  double sum = 0.0;
  for (const auto& n : quadrature(64.0)) sum += n.x.dot(n.n) * n.w;
  return sum / d_;
}

Vec2 SurfaceChart::centroid2() const {
  if (d_ != 2) throw GeometryError("centroid2 needs a curve");
  Vec2 m = Vec2::Zero();
  double area = 0.0;
  for (const auto& n : quadrature(64.0)) {
    m.x() += 0.5 * n.x.x() * n.x.x() * n.n.x() * n.w;
    m.y() += 0.5 * n.x.y() * n.x.y() * n.n.y() * n.w;
    area += 0.5 * n.x.dot(n.n) * n.w;
  }
  return m / area;
}

std::array<double, 4> SurfaceChart::bounding_box2() const {
  if (d_ != 2) throw GeometryError("bounding_box2 needs a curve");
  std::array<double, 4> box{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                            -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& c : curves_)
    for (int i = 0; i <= 1024; ++i) {
      const Vec2 p = c->position(c->t0() + (c->t1() - c->t0()) * i / 1024.0);
      box[0] = std::min(box[0], p.x());
      box[1] = std::min(box[1], p.y());
      box[2] = std::max(box[2], p.x());
      box[3] = std::max(box[3], p.y());
    }
  return box;
}

SurfaceChart SurfaceChart::translated(std::span<const double> shift) const {
  if (d_ != 2 || shift.size() != 2) throw GeometryError("translated: only planar curves are supported");
  std::vector<std::shared_ptr<const CurvePiece>> pieces;
  for (const auto& c : curves_)
    pieces.push_back(std::make_shared<MovedCurve>(c, Eigen::Matrix2d::Identity(), Vec2(shift[0], shift[1])));
  return from_curves(std::move(pieces), name_);
}

SurfaceChart SurfaceChart::rotated(double angle) const {
  if (d_ != 2) throw GeometryError("rotated: only planar curves are supported");
  Eigen::Matrix2d r;
  r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  std::vector<std::shared_ptr<const CurvePiece>> pieces;
  for (const auto& c : curves_) pieces.push_back(std::make_shared<MovedCurve>(c, r, Vec2::Zero()));
  return from_curves(std::move(pieces), name_);
}

}  // namespace homolab
