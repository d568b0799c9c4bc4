/*
 * Copyright (C) 2026 The Transluce Authors
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

#include <array>
#include <cmath>

namespace transluce {

/// Forward-mode scalar with N tangent slots. The direct renderer shades with
/// Dual<5> (depth, normal xyz, roughness) so forward and backward share one
/// formula. max() takes the 0 subgradient exactly at the boundary.
template <int N>
struct Dual {
    double v = 0.0;
    std::array<double, N> d{};

    Dual() = default;
    Dual(double value) : v(value) {}

    static Dual seeded(double value, int slot) {
        Dual out(value);
        out.d[slot] = 1.0;
        return out;
    }

    Dual operator-() const {
        Dual out(-v);
        for (int i = 0; i < N; ++i) out.d[i] = -d[i];
        return out;
    }

    Dual operator+(const Dual& o) const {
        Dual out(v + o.v);
        for (int i = 0; i < N; ++i) out.d[i] = d[i] + o.d[i];
        return out;
    }
    Dual operator-(const Dual& o) const {
        Dual out(v - o.v);
        for (int i = 0; i < N; ++i) out.d[i] = d[i] - o.d[i];
        return out;
    }
    Dual operator*(const Dual& o) const {
        Dual out(v * o.v);
        for (int i = 0; i < N; ++i) out.d[i] = d[i] * o.v + v * o.d[i];
        return out;
    }
    Dual operator/(const Dual& o) const {
        Dual out(v / o.v);
        double inv2 = 1.0 / (o.v * o.v);
        for (int i = 0; i < N; ++i) out.d[i] = (d[i] * o.v - v * o.d[i]) * inv2;
        return out;
    }
    Dual& operator+=(const Dual& o) { return *this = *this + o; }
    Dual& operator-=(const Dual& o) { return *this = *this - o; }
    Dual& operator*=(const Dual& o) { return *this = *this * o; }
};

template <int N>
Dual<N> operator+(double a, const Dual<N>& b) { return Dual<N>(a) + b; }
template <int N>
Dual<N> operator-(double a, const Dual<N>& b) { return Dual<N>(a) - b; }
template <int N>
Dual<N> operator*(double a, const Dual<N>& b) { return Dual<N>(a) * b; }
template <int N>
Dual<N> operator/(double a, const Dual<N>& b) { return Dual<N>(a) / b; }

template <int N>
Dual<N> sqrt(const Dual<N>& x) {
    Dual<N> out(std::sqrt(x.v));
    double k = 0.5 / out.v;
    for (int i = 0; i < N; ++i) out.d[i] = k * x.d[i];
    return out;
}

template <int N>
Dual<N> exp(const Dual<N>& x) {
    Dual<N> out(std::exp(x.v));
    for (int i = 0; i < N; ++i) out.d[i] = out.v * x.d[i];
    return out;
}

template <int N>
Dual<N> abs(const Dual<N>& x) {
    return x.v < 0.0 ? -x : x;
}

/// max with a constant; subgradient 0 exactly on the boundary.
template <int N>
Dual<N> max0(const Dual<N>& x) {
    return x.v > 0.0 ? x : Dual<N>(0.0);
}

// Plain-double shims so shared templates compile for both scalar types.
inline double max0(double x) { return x > 0.0 ? x : 0.0; }
inline double value_of(double x) { return x; }
template <int N>
double value_of(const Dual<N>& x) {
    return x.v;
}

}  // namespace transluce

// Pull std names into scope for the double instantiation of templated code.
namespace transluce::dualmath {
using std::abs;
using std::exp;
using std::sqrt;
using transluce::abs;
using transluce::exp;
using transluce::sqrt;
}  // namespace transluce::dualmath
