#pragma once

// Shared vocabulary: points, complex scalars, wavenumbers, precision tiers and
// the error type every module throws.

#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <stdexcept>
#include <string>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_complex.hpp>

namespace helmrec {

using Complex = std::complex<double>;

/// 50-significant-digit real/complex used for sample delivery and the
/// extended-precision recovery path.
using Real50 = boost::multiprecision::cpp_bin_float_50;
using Complex50 = boost::multiprecision::cpp_complex_50;

template <class T> struct ComplexOf;
template <> struct ComplexOf<double> { using type = std::complex<double>; };
template <> struct ComplexOf<Real50> { using type = Complex50; };
template <class T> using ComplexT = typename ComplexOf<T>::type;

template <class T> inline T pi_v() { return boost::math::constants::pi<T>(); }
template <> inline double pi_v<double>() { return M_PI; }

// ---------------------------------------------------------------------------

enum class ErrorKind {
  Domain,      // evaluation at a singular / excluded point
  Validation,  // bad parameters or inputs, detected before computing
  Numerical,   // precision exhaustion, singular systems, bad conditioning
  Io
};

/// Every failure carries the originating module and stage so the CLI can
/// report "scattering/ls_solve: ..." without string parsing.
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, std::string module, std::string stage, const std::string& what)
      : std::runtime_error(module + "/" + stage + ": " + what),
        kind_(kind), module_(std::move(module)), stage_(std::move(stage)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& module() const noexcept { return module_; }
  const std::string& stage() const noexcept { return stage_; }

private:
  ErrorKind kind_;
  std::string module_;
  std::string stage_;
};

// ---------------------------------------------------------------------------

struct Vec3 {
  double x = 0, y = 0, z = 0;

  constexpr Vec3() = default;
  constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

  constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator-() const { return {-x, -y, -z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  constexpr bool operator==(const Vec3&) const = default;

  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  Vec3 normalized() const { return *this / norm(); }
};

constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }
constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

/// Unit direction; construction normalises and rejects the zero vector.
class Direction {
public:
  Direction() = default;
  explicit Direction(const Vec3& v) {
    const double n = v.norm();
    if (!(n > 0) || !std::isfinite(n))
      throw Error(ErrorKind::Validation, "core", "direction", "zero or non-finite direction vector");
    u_ = v / n;
  }
  const Vec3& vec() const noexcept { return u_; }
  operator const Vec3&() const noexcept { return u_; }

private:
  Vec3 u_{0, 0, 1};
};

/// kappa > 0, in reciprocal length units.
class WaveNumber {
public:
  WaveNumber() = default;
  explicit WaveNumber(double kappa) : kappa_(kappa) {
    if (!(kappa > 0) || !std::isfinite(kappa))
      throw Error(ErrorKind::Validation, "core", "wavenumber", "kappa must be positive and finite");
  }
  double value() const noexcept { return kappa_; }
  double wavelength() const noexcept { return 2 * M_PI / kappa_; }

private:
  double kappa_ = 1.0;
};

struct Ray {
  Vec3 origin;
  Direction direction;
  Vec3 at(double s) const { return origin + direction.vec() * s; }
};

/// Arithmetic tier for the recovery recursion.
enum class Precision { Double, Digits50 };

inline Precision precision_for_digits(int digits) {
  if (digits <= 0 || digits > 50)
    throw Error(ErrorKind::Validation, "core", "precision",
                "precision digits must be in 1..50, got " + std::to_string(digits));
  return digits <= 15 ? Precision::Double : Precision::Digits50;
}

inline double significant_digits(Precision p) { return p == Precision::Double ? 15.95 : 50.0; }

/// %.3e formatting for error messages.
inline std::string fmt_sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

}  // namespace helmrec
