#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace tvlevel {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm2(Vec2 a) { return std::hypot(a.x, a.y); }

/// Symmetric 2x2 matrix [[a11,a12],[a12,a22]].
struct Mat2 {
  double a11 = 1.0, a12 = 0.0, a22 = 1.0;

  Vec2 apply(Vec2 v) const { return {a11 * v.x + a12 * v.y, a12 * v.x + a22 * v.y}; }
  double quad(Vec2 v) const { return dot(v, apply(v)); }
  double det() const { return a11 * a22 - a12 * a12; }
  bool spd() const { return a11 > 0.0 && det() > 0.0; }
  Mat2 inverse() const {
    const double d = det();
    return {a22 / d, -a12 / d, a11 / d};
  }
  /// Eigenvalues, ascending. Always real (symmetric).
  std::pair<double, double> eigenvalues() const {
    const double tr = a11 + a22;
    const double disc = std::sqrt(std::max(0.0, tr * tr / 4 - det()));
    return {tr / 2 - disc, tr / 2 + disc};
  }
};

/// Requested operation is undefined for this norm kind (e.g. gradient of a
/// crystalline norm).
class capability_error : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class NormKind { Euclidean, WeightedL2, Lp, L1, Linf };

const char* to_string(NormKind k);

/// A symmetric norm phi on the plane. Immutable after construction; cheap to
/// copy and safe to share across threads.
class Anisotropy {
 public:
  static Anisotropy euclidean() { return Anisotropy(NormKind::Euclidean); }
  static Anisotropy weighted_l2(const Mat2& m);
  static Anisotropy lp(double p);
  static Anisotropy l1() { return Anisotropy(NormKind::L1); }
  static Anisotropy linf() { return Anisotropy(NormKind::Linf); }

  NormKind kind() const { return kind_; }
  double exponent() const { return p_; }
  const Mat2& matrix() const { return m_; }

  /// l1 and linf have flat facets; their gradient is undefined and they are
  /// accepted by the geometric solver only.
  bool crystalline() const { return kind_ == NormKind::L1 || kind_ == NormKind::Linf; }

  /// Whether phi^2 is strongly convex on the whole plane.
  bool squared_strongly_convex() const;

  double eval(Vec2 v) const;

  /// Closed-form polar norm: euclidean is self-polar, weighted-l2 maps to the
  /// inverse matrix, lp to the Hoelder conjugate, l1 and linf swap.
  Anisotropy polar() const;
  double polar_eval(Vec2 xi) const { return polar().eval(xi); }

  /// Gradient of phi away from the origin. Throws std::domain_error at 0 and
  /// capability_error for crystalline kinds.
  Vec2 grad(Vec2 v) const;

  /// Constants (A, B) with A|x| <= phi(x) <= B|x|.
  std::pair<double, double> equivalence_constants() const;

  /// Parse the JSON descriptor
  ///   {"kind": "euclidean"|"weighted_l2"|"lp"|"l1"|"linf",
  ///    "matrix": [[m11,m12],[m12,m22]]?, "p": number?}.
  /// Rejects non-SPD matrices, p <= 1 and unknown keys.
  static Anisotropy from_json_text(const std::string& text);
  std::string to_json_text() const;

 private:
  explicit Anisotropy(NormKind k) : kind_(k) {}

  NormKind kind_ = NormKind::Euclidean;
  Mat2 m_;         // WeightedL2 only
  double p_ = 2.0; // Lp only
};

}  // namespace tvlevel
