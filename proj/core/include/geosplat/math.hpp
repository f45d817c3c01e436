/*
 * Copyright (C) 2025 The geosplat authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>

namespace geosplat {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Vec2 {
    double x = 0, y = 0;

    double& operator[](int i) { return (&x)[i]; }
    double operator[](int i) const { return (&x)[i]; }
};

struct Vec3 {
    double x = 0, y = 0, z = 0;

    double& operator[](int i) { return (&x)[i]; }
    double operator[](int i) const { return (&x)[i]; }
};

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
inline Vec3 operator*(const Vec3& a, double s) { return {a.x * s, a.y * s, a.z * s}; }
inline Vec3 operator*(double s, const Vec3& a) { return a * s; }
inline Vec3 operator*(const Vec3& a, const Vec3& b) { return {a.x * b.x, a.y * b.y, a.z * b.z}; }
inline Vec3 operator/(const Vec3& a, double s) { return {a.x / s, a.y / s, a.z / s}; }
inline Vec3 operator/(const Vec3& a, const Vec3& b) { return {a.x / b.x, a.y / b.y, a.z / b.z}; }
inline Vec3& operator+=(Vec3& a, const Vec3& b) { a = a + b; return a; }
inline Vec3& operator-=(Vec3& a, const Vec3& b) { a = a - b; return a; }
inline Vec3& operator*=(Vec3& a, double s) { a = a * s; return a; }
inline Vec3& operator/=(Vec3& a, double s) { a = a / s; return a; }
inline bool operator==(const Vec3& a, const Vec3& b) { return a.x == b.x && a.y == b.y && a.z == b.z; }

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double length_squared(const Vec3& a) { return dot(a, a); }
inline double length(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline Vec3 normalize(const Vec3& a) {
    double l = length(a);
    return l > 0 ? a / l : Vec3{0, 0, 0};
}
inline Vec3 min(const Vec3& a, const Vec3& b) {
    return {std::min(a.x, b.x), std::min(a.y, b.y), std::min(a.z, b.z)};
}
inline Vec3 max(const Vec3& a, const Vec3& b) {
    return {std::max(a.x, b.x), std::max(a.y, b.y), std::max(a.z, b.z)};
}
inline Vec3 clamp(const Vec3& a, double lo, double hi) {
    return {std::clamp(a.x, lo, hi), std::clamp(a.y, lo, hi), std::clamp(a.z, lo, hi)};
}
inline Vec3 lerp(const Vec3& a, const Vec3& b, double t) { return a * (1 - t) + b * t; }
inline double max_component(const Vec3& a) { return std::max(a.x, std::max(a.y, a.z)); }
inline double mean_component(const Vec3& a) { return (a.x + a.y + a.z) / 3.0; }
inline bool is_finite(const Vec3& a) {
    return std::isfinite(a.x) && std::isfinite(a.y) && std::isfinite(a.z);
}
inline Vec3 abs(const Vec3& a) { return {std::abs(a.x), std::abs(a.y), std::abs(a.z)}; }

/// Mirror direction of `v` about unit normal `n` (both pointing away from the surface).
inline Vec3 reflect(const Vec3& v, const Vec3& n) { return n * (2 * dot(v, n)) - v; }

inline std::ostream& operator<<(std::ostream& os, const Vec3& v) {
    return os << "(" << v.x << ", " << v.y << ", " << v.z << ")";
}

// Row-major 3x3 matrix.
struct Mat3 {
    std::array<std::array<double, 3>, 3> m{};

    static Mat3 identity() {
        Mat3 r;
        r.m[0][0] = r.m[1][1] = r.m[2][2] = 1;
        return r;
    }
    static Mat3 from_columns(const Vec3& c0, const Vec3& c1, const Vec3& c2) {
        Mat3 r;
        for (int i = 0; i < 3; i++) {
            r.m[i][0] = c0[i];
            r.m[i][1] = c1[i];
            r.m[i][2] = c2[i];
        }
        return r;
    }
    static Mat3 diagonal(const Vec3& d) {
        Mat3 r;
        r.m[0][0] = d.x;
        r.m[1][1] = d.y;
        r.m[2][2] = d.z;
        return r;
    }
    Vec3 column(int j) const { return {m[0][j], m[1][j], m[2][j]}; }
    Vec3 row(int i) const { return {m[i][0], m[i][1], m[i][2]}; }
};

inline Vec3 operator*(const Mat3& a, const Vec3& v) {
    return {dot(a.row(0), v), dot(a.row(1), v), dot(a.row(2), v)};
}
inline Mat3 operator*(const Mat3& a, const Mat3& b) {
    Mat3 r;
    for (int i = 0; i < 3; i++)
        for (int j = 0; j < 3; j++)
            r.m[i][j] = a.m[i][0] * b.m[0][j] + a.m[i][1] * b.m[1][j] + a.m[i][2] * b.m[2][j];
    return r;
}
inline Mat3 transpose(const Mat3& a) {
    Mat3 r;
    for (int i = 0; i < 3; i++)
        for (int j = 0; j < 3; j++) r.m[i][j] = a.m[j][i];
    return r;
}

/// Rotation about an arbitrary unit axis (Rodrigues).
inline Mat3 rotation_about_axis(const Vec3& axis, double angle) {
    double c = std::cos(angle), s = std::sin(angle);
    Vec3 u = normalize(axis);
    Mat3 r;
    r.m[0] = {c + u.x * u.x * (1 - c), u.x * u.y * (1 - c) - u.z * s, u.x * u.z * (1 - c) + u.y * s};
    r.m[1] = {u.y * u.x * (1 - c) + u.z * s, c + u.y * u.y * (1 - c), u.y * u.z * (1 - c) - u.x * s};
    r.m[2] = {u.z * u.x * (1 - c) - u.y * s, u.z * u.y * (1 - c) + u.x * s, c + u.z * u.z * (1 - c)};
    return r;
}

// Row-major 4x4 matrix; used for rigid world<->camera transforms.
struct Mat4 {
    std::array<std::array<double, 4>, 4> m{};

    static Mat4 identity() {
        Mat4 r;
        r.m[0][0] = r.m[1][1] = r.m[2][2] = r.m[3][3] = 1;
        return r;
    }
    static Mat4 from_rotation_translation(const Mat3& rot, const Vec3& t) {
        Mat4 r = identity();
        for (int i = 0; i < 3; i++) {
            for (int j = 0; j < 3; j++) r.m[i][j] = rot.m[i][j];
            r.m[i][3] = t[i];
        }
        return r;
    }
    Mat3 rotation() const {
        Mat3 r;
        for (int i = 0; i < 3; i++)
            for (int j = 0; j < 3; j++) r.m[i][j] = m[i][j];
        return r;
    }
    Vec3 translation() const { return {m[0][3], m[1][3], m[2][3]}; }
    Vec3 transform_point(const Vec3& p) const {
        return rotation() * p + translation();
    }
    Vec3 transform_direction(const Vec3& d) const { return rotation() * d; }
};

inline Mat4 operator*(const Mat4& a, const Mat4& b) {
    Mat4 r;
    for (int i = 0; i < 4; i++)
        for (int j = 0; j < 4; j++) {
            double s = 0;
            for (int k = 0; k < 4; k++) s += a.m[i][k] * b.m[k][j];
            r.m[i][j] = s;
        }
    return r;
}

/// Inverse of a rigid transform (orthonormal rotation block).
inline Mat4 rigid_inverse(const Mat4& a) {
    Mat3 rt = transpose(a.rotation());
    return Mat4::from_rotation_translation(rt, -(rt * a.translation()));
}

/// Unit quaternion (w, x, y, z) from an orthonormal rotation matrix.
inline std::array<double, 4> quaternion_from_matrix(const Mat3& r) {
    double tr = r.m[0][0] + r.m[1][1] + r.m[2][2];
    std::array<double, 4> q{};
    if (tr > 0) {
        double s = std::sqrt(tr + 1.0) * 2;
        q = {0.25 * s, (r.m[2][1] - r.m[1][2]) / s, (r.m[0][2] - r.m[2][0]) / s,
             (r.m[1][0] - r.m[0][1]) / s};
    } else if (r.m[0][0] > r.m[1][1] && r.m[0][0] > r.m[2][2]) {
        double s = std::sqrt(1.0 + r.m[0][0] - r.m[1][1] - r.m[2][2]) * 2;
        q = {(r.m[2][1] - r.m[1][2]) / s, 0.25 * s, (r.m[0][1] + r.m[1][0]) / s,
             (r.m[0][2] + r.m[2][0]) / s};
    } else if (r.m[1][1] > r.m[2][2]) {
        double s = std::sqrt(1.0 + r.m[1][1] - r.m[0][0] - r.m[2][2]) * 2;
        q = {(r.m[0][2] - r.m[2][0]) / s, (r.m[0][1] + r.m[1][0]) / s, 0.25 * s,
             (r.m[1][2] + r.m[2][1]) / s};
    } else {
        double s = std::sqrt(1.0 + r.m[2][2] - r.m[0][0] - r.m[1][1]) * 2;
        q = {(r.m[1][0] - r.m[0][1]) / s, (r.m[0][2] + r.m[2][0]) / s, (r.m[1][2] + r.m[2][1]) / s,
             0.25 * s};
    }
    return q;
}

inline Mat3 matrix_from_quaternion(const std::array<double, 4>& q) {
    double w = q[0], x = q[1], y = q[2], z = q[3];
    Mat3 r;
    r.m[0] = {1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)};
    r.m[1] = {2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)};
    r.m[2] = {2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)};
    return r;
}

/// Max absolute entry of R^T R - I; zero for orthonormal matrices.
inline double orthonormality_error(const Mat3& r) {
    Mat3 g = transpose(r) * r;
    double e = 0;
    for (int i = 0; i < 3; i++)
        for (int j = 0; j < 3; j++) e = std::max(e, std::abs(g.m[i][j] - (i == j ? 1.0 : 0.0)));
    return e;
}

/// Some right-handed tangent basis completing `n`; not continuous in n.
inline void orthonormal_basis(const Vec3& n, Vec3& t, Vec3& b) {
    // Duff et al., "Building an Orthonormal Basis, Revisited"
    double sign = std::copysign(1.0, n.z);
    double a = -1.0 / (sign + n.z);
    double c = n.x * n.y * a;
    t = {1.0 + sign * n.x * n.x * a, sign * c, -sign * n.x};
    b = {c, sign + n.y * n.y * a, -n.y};
}

struct Box3 {
    Vec3 lo{kInf, kInf, kInf};
    Vec3 hi{-kInf, -kInf, -kInf};

    bool empty() const { return lo.x > hi.x; }
    void expand(const Vec3& p) {
        lo = min(lo, p);
        hi = max(hi, p);
    }
    void expand(const Box3& b) {
        lo = min(lo, b.lo);
        hi = max(hi, b.hi);
    }
    Vec3 extent() const { return hi - lo; }
    Vec3 center() const { return (lo + hi) * 0.5; }
    double diagonal() const { return empty() ? 0.0 : length(extent()); }
    bool contains(const Vec3& p) const {
        return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y && p.z >= lo.z && p.z <= hi.z;
    }
};

inline double degrees(double rad) { return rad * (180.0 / kPi); }
inline double radians(double deg) { return deg * (kPi / 180.0); }

/// Logistic squashing and its derivative.
inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double logistic_derivative(double x) {
    double s = logistic(x);
    return s * (1.0 - s);
}

/// Angle between two (not necessarily unit) vectors, in radians, safe at ties.
inline double angle_between(const Vec3& a, const Vec3& b) {
    double la = length(a), lb = length(b);
    if (la == 0 || lb == 0) return 0;
    return std::acos(std::clamp(dot(a, b) / (la * lb), -1.0, 1.0));
}

}  // namespace geosplat
