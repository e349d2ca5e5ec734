#pragma once

#include "homolab/exact.hpp"

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace homolab {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// flat: constant normal. strictly_curved: every principal curvature positive
/// in the interior. curved: non-constant analytic normal with some vanishing
/// curvature (cones, cylinders, superellipse ends). exotic: no structural
/// information about the normal set.
enum class PieceFlag { flat, strictly_curved, curved, exotic };

std::string to_string(PieceFlag flag);

/// Exact direction a + b sqrt(D) of a flat piece's outward normal.
struct ExactDirection {
  std::vector<Rational> a;
  std::vector<Rational> b;
  long radicand = 0;
};

/// A parametrized arc t in [t0, t1] of a closed curve, traversed
/// counter-clockwise so the outward normal is (y', -x') / |x'|.
class CurvePiece {
 public:
  CurvePiece(double t0, double t1) : t0_(t0), t1_(t1) {}
  virtual ~CurvePiece() = default;

  double t0() const { return t0_; }
  double t1() const { return t1_; }
  virtual Vec2 position(double t) const = 0;
  virtual Vec2 d1(double t) const = 0;
  virtual Vec2 d2(double t) const = 0;
  virtual PieceFlag flag() const = 0;
  virtual std::string type() const = 0;
  virtual std::optional<ExactDirection> exact_normal() const { return std::nullopt; }

  Vec2 normal(double t) const;
  double speed(double t) const { return d1(t).norm(); }
  double curvature(double t) const;
  /// Arc length between parameters a <= b.
  double arc_length(double a, double b) const;
  /// Parameter at arc length s from t0.
  double param_at_arc_length(double s) const;
  /// Parameter of the closest point to x, and its distance.
  std::pair<double, double> closest(const Vec2& x) const;

 protected:
  double t0_;
  double t1_;
};

/// A parametrized patch (u, v) in [u0, u1] x [v0, v1] of a closed surface in R^3.
class PatchPiece {
 public:
  PatchPiece(std::array<double, 2> u, std::array<double, 2> v) : u_(u), v_(v) {}
  virtual ~PatchPiece() = default;

  std::array<double, 2> u_range() const { return u_; }
  std::array<double, 2> v_range() const { return v_; }
  virtual Vec3 position(double u, double v) const = 0;
  /// First derivatives (x_u, x_v) and second (x_uu, x_uv, x_vv).
  virtual std::array<Vec3, 2> d1(double u, double v) const = 0;
  virtual std::array<Vec3, 3> d2(double u, double v) const = 0;
  virtual PieceFlag flag() const = 0;
  virtual std::string type() const = 0;
  virtual std::optional<ExactDirection> exact_normal() const { return std::nullopt; }

  /// +1 or -1 so that orientation() * (x_u x x_v) points outward.
  int orientation() const { return orientation_; }
  void set_orientation(int s) { orientation_ = s; }
  Vec3 normal(double u, double v) const;
  /// Principal curvatures, positive for a convex surface with outward normal.
  std::array<double, 2> principal_curvatures(double u, double v) const;

 protected:
  std::array<double, 2> u_;
  std::array<double, 2> v_;
  int orientation_ = 1;
};

// Builtin 2-D pieces.

class EllipseArc final : public CurvePiece {
 public:
  EllipseArc(Vec2 center, double a, double b, double t0, double t1);
  Vec2 position(double t) const override;
  Vec2 d1(double t) const override;
  Vec2 d2(double t) const override;
  PieceFlag flag() const override { return PieceFlag::strictly_curved; }
  std::string type() const override { return a_ == b_ ? "circle_arc" : "ellipse_arc"; }

 private:
  Vec2 c_;
  double a_, b_;
};

class Segment final : public CurvePiece {
 public:
  Segment(Vec2 p0, Vec2 p1, std::optional<ExactDirection> exact_edge = std::nullopt);
  Vec2 position(double t) const override { return p0_ + t * (p1_ - p0_); }
  Vec2 d1(double) const override { return p1_ - p0_; }
  Vec2 d2(double) const override { return Vec2::Zero(); }
  PieceFlag flag() const override { return PieceFlag::flat; }
  std::string type() const override { return "segment"; }
  std::optional<ExactDirection> exact_normal() const override { return normal_; }

 private:
  Vec2 p0_, p1_;
  std::optional<ExactDirection> normal_;
};

/// Quarter of |x/a|^p + |y/b|^p = 1 in polar form r(theta), theta in [t0, t1].
class SuperellipseArc final : public CurvePiece {
 public:
  SuperellipseArc(double a, double b, double p, double t0, double t1);
  Vec2 position(double t) const override;
  Vec2 d1(double t) const override;
  Vec2 d2(double t) const override;
  PieceFlag flag() const override { return p_ == 2.0 ? PieceFlag::strictly_curved : PieceFlag::curved; }
  std::string type() const override { return "superellipse_arc"; }

 private:
  std::array<double, 3> radius(double t) const;  // r, r', r''
  double a_, b_, p_;
};

/// Piece given by closures; its flag is whatever the caller declares.
class GenericCurve final : public CurvePiece {
 public:
  using Fn = std::function<Vec2(double)>;
  GenericCurve(double t0, double t1, Fn pos, Fn d1, Fn d2, PieceFlag flag, std::string type);
  Vec2 position(double t) const override { return pos_(t); }
  Vec2 d1(double t) const override { return d1_(t); }
  Vec2 d2(double t) const override { return d2_(t); }
  PieceFlag flag() const override { return flag_; }
  std::string type() const override { return type_; }

 private:
  Fn pos_, d1_, d2_;
  PieceFlag flag_;
  std::string type_;
};

/// Rigid motion x -> R x + c of another piece.
class MovedCurve final : public CurvePiece {
 public:
  MovedCurve(std::shared_ptr<const CurvePiece> base, const Eigen::Matrix2d& rotation, const Vec2& shift);
  Vec2 position(double t) const override { return rot_ * base_->position(t) + shift_; }
  Vec2 d1(double t) const override { return rot_ * base_->d1(t); }
  Vec2 d2(double t) const override { return rot_ * base_->d2(t); }
  PieceFlag flag() const override { return base_->flag(); }
  std::string type() const override { return base_->type(); }
  std::optional<ExactDirection> exact_normal() const override;

 private:
  std::shared_ptr<const CurvePiece> base_;
  Eigen::Matrix2d rot_;
  Vec2 shift_;
};

// Builtin 3-D pieces.

/// x = (a sin v cos u, b sin v sin u, c cos v) + center.
class EllipsoidPatch final : public PatchPiece {
 public:
  EllipsoidPatch(Vec3 center, double a, double b, double c);
  Vec3 position(double u, double v) const override;
  std::array<Vec3, 2> d1(double u, double v) const override;
  std::array<Vec3, 3> d2(double u, double v) const override;
  PieceFlag flag() const override { return PieceFlag::strictly_curved; }
  std::string type() const override { return "ellipsoid"; }

 private:
  Vec3 c_;
  double a_, b_, cc_;
};

/// Profile curve (r(t), z(t)), r >= 0, revolved about the z axis; u = t, v = angle.
class RevolutionPatch final : public PatchPiece {
 public:
  explicit RevolutionPatch(std::shared_ptr<const CurvePiece> profile);
  Vec3 position(double u, double v) const override;
  std::array<Vec3, 2> d1(double u, double v) const override;
  std::array<Vec3, 3> d2(double u, double v) const override;
  PieceFlag flag() const override;
  std::string type() const override { return "revolution(" + profile_->type() + ")"; }
  std::optional<ExactDirection> exact_normal() const override;

 private:
  std::shared_ptr<const CurvePiece> profile_;
};

/// Point, outward unit normal and weight of a surface quadrature rule.
struct QuadratureNode {
  Vec3 x = Vec3::Zero();
  Vec3 n = Vec3::Zero();
  double w = 0.0;
  int piece = 0;
  std::array<double, 2> param{0.0, 0.0};
};

struct OffendingPiece {
  int piece = 0;
  std::vector<double> normal;
  std::vector<long long> k;
};

struct NonResonanceVerdict {
  bool satisfies = true;
  double rational_measure = 0.0;
  std::vector<OffendingPiece> offending;
};

/// Closed piecewise-parametrized curve (d = 2) or surface (d = 3).
class SurfaceChart {
 public:
  static SurfaceChart circle(double r, Vec2 center = Vec2::Zero());
  static SurfaceChart ellipse(double a, double b, Vec2 center = Vec2::Zero());
  /// Counter-clockwise vertices.
  static SurfaceChart polygon(const std::vector<Vec2>& vertices);
  /// Vertices with coordinates in Q(sqrt(radicand)); radicand 0 means rational.
  static SurfaceChart polygon_exact(const std::vector<std::array<QuadraticSurd, 2>>& vertices, long radicand = 0);
  static SurfaceChart superellipse(double a, double b, double p);
  static SurfaceChart sphere(double r, Vec3 center = Vec3::Zero());
  static SurfaceChart ellipsoid(double a, double b, double c, Vec3 center = Vec3::Zero());
  /// Profile pieces in the (r, z) half plane running from the axis back to the axis.
  static SurfaceChart revolution(std::vector<std::shared_ptr<const CurvePiece>> profile);
  static SurfaceChart from_curves(std::vector<std::shared_ptr<const CurvePiece>> pieces, std::string name = "custom");

  int dimension() const { return d_; }
  const std::string& name() const { return name_; }
  int piece_count() const { return d_ == 2 ? static_cast<int>(curves_.size()) : static_cast<int>(patches_.size()); }
  const std::vector<std::shared_ptr<const CurvePiece>>& curves() const { return curves_; }
  const std::vector<std::shared_ptr<const PatchPiece>>& patches() const { return patches_; }
  PieceFlag flag(int piece) const;

  /// Composite 8-point Gauss rule per piece with at least nodes_per_unit
  /// nodes per unit length in each parameter direction.
  std::vector<QuadratureNode> quadrature(double nodes_per_unit) const;
  /// Total surface measure.
  double measure() const;
  double piece_measure(int piece) const;
  /// Signed principal curvature(s) with respect to the outward normal.
  std::vector<double> curvature_at(int piece, std::span<const double> param) const;
  /// Distance from x to the curve (d = 2 only).
  double distance(const Vec2& x) const;
  /// Area (d = 2) or volume (d = 3) enclosed, from the divergence theorem.
  double enclosed_measure() const;
  Vec2 centroid2() const;
  std::array<double, 4> bounding_box2() const;

  SurfaceChart translated(std::span<const double> shift) const;
  /// Planar rotation about the origin (d = 2).
  SurfaceChart rotated(double angle) const;

 private:
  void validate_closed() const;

  int d_ = 2;
  std::string name_;
  std::vector<std::shared_ptr<const CurvePiece>> curves_;
  std::vector<std::shared_ptr<const PatchPiece>> patches_;
};

class NonResonanceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Structural decision of the non-resonance condition with respect to the
/// lattice spanned by `lattice` (rows; empty means Z^d). Flat pieces are
/// tested exactly when they carry exact directions, otherwise by continued
/// fractions with denominators up to max_denominator.
NonResonanceVerdict check_non_resonance(const SurfaceChart& surface, const std::vector<std::vector<int>>& lattice = {},
                                        std::int64_t max_denominator = 1000000000);

/// Gauss-Legendre nodes and weights on [-1, 1].
const std::array<double, 8>& gauss8_nodes();
const std::array<double, 8>& gauss8_weights();

}  // namespace homolab
