#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "cmlevy/error.hpp"
#include "cmlevy/levy_model.hpp"
#include "cmlevy/rng.hpp"

namespace cmlevy {

struct Face {
    double start = 0.0;
    double length = 0.0;
    double slope = 0.0;

    double end() const { return start + length; }
    double height() const { return slope * length; }
    bool operator==(const Face&) const = default;
};

//! Slopes closer than this (relative, floored at 1) are merged into one face.
inline constexpr double slope_tie_tolerance = 1e-12;

inline bool slopes_tied(double a, double b) {
    return std::abs(a - b) <= slope_tie_tolerance * std::max({1.0, std::abs(a), std::abs(b)});
}

/*!
 * Piecewise linear convex function on [0,T] with C(0) = 0, stored as faces
 * sorted by slope (equivalently by start time).
 */
class ConvexMinorant {
  public:
    ConvexMinorant() = default;
    ConvexMinorant(std::vector<Face> faces, double horizon)
        : faces_(std::move(faces)), horizon_(horizon) {}

    const std::vector<Face>& faces() const noexcept { return faces_; }
    double horizon() const noexcept { return horizon_; }
    std::size_t size() const noexcept { return faces_.size(); }

    //! Index of the face whose half-open interval [start, end) contains t.
    std::size_t face_at(double t) const {
        auto it = std::upper_bound(faces_.begin(), faces_.end(), t,
                                   [](double x, const Face& f) { return x < f.start; });
        if (it == faces_.begin())
            return 0;
        return static_cast<std::size_t>(std::distance(faces_.begin(), it) - 1);
    }

    //! C(t) for t in [0,T].
    double value(double t) const {
        double c = 0.0;
        for (const auto& f : faces_) {
            if (t <= f.start)
                break;
            c += f.slope * (std::min(t, f.end()) - f.start);
        }
        return c;
    }

  private:
    std::vector<Face> faces_;
    double horizon_ = 0.0;
};

//! Right-derivative C'_t, 0 < t < T.
inline double right_derivative(const ConvexMinorant& cm, double t) {
    if (!(t > 0.0 && t < cm.horizon()))
        throw DomainError("right_derivative requires 0 < t < T");
    return cm.faces()[cm.face_at(t)].slope;
}

struct VertexTimeQuery {
    double tau = 0.0;
    //! Slope of the face starting at tau; +inf when tau = T.
    double attained_slope = std::numeric_limits<double>::infinity();
    std::size_t face_index = 0;
};

//! First time the right-derivative exceeds s, capped at T.
inline VertexTimeQuery vertex_time(const ConvexMinorant& cm, double s) {
    const auto& f = cm.faces();
    auto it = std::upper_bound(f.begin(), f.end(), s,
                               [](double x, const Face& face) { return x < face.slope; });
    VertexTimeQuery q;
    q.face_index = static_cast<std::size_t>(std::distance(f.begin(), it));
    if (it == f.end()) {
        q.tau = cm.horizon();
        return q;
    }
    q.tau = it->start;
    q.attained_slope = it->slope;
    return q;
}

//! Faces through consecutive vertices of a path, merging slope ties.
inline ConvexMinorant minorant_from_vertices(const SamplePath& path,
                                             const std::vector<std::size_t>& vertices) {
    std::vector<std::size_t> v;
    v.reserve(vertices.size());
    auto slope = [&](std::size_t i, std::size_t j) {
        return (path.values[j] - path.values[i]) / (path.times[j] - path.times[i]);
    };
    for (std::size_t idx : vertices) {
        // drop the previous vertex while it separates two tied slopes
        while (v.size() >= 2 && slopes_tied(slope(v[v.size() - 2], v.back()), slope(v.back(), idx)))
            v.pop_back();
        v.push_back(idx);
    }
    std::vector<Face> faces;
    faces.reserve(v.size());
    for (std::size_t k = 0; k + 1 < v.size(); ++k) {
        const double t0 = path.times[v[k]] - path.times.front();
        const double t1 = path.times[v[k + 1]] - path.times.front();
        faces.push_back({t0, t1 - t0, slope(v[k], v[k + 1])});
    }
    return {std::move(faces), path.times.back() - path.times.front()};
}

//! Indices of the lower hull vertices (Andrew's monotone chain on a time-sorted path).
inline std::vector<std::size_t> lower_hull_vertices(const SamplePath& path) {
    path.validate();
    CMLEVY_REQUIRE(path.size() >= 2, ArgumentError, "convex minorant needs at least two points");
    std::vector<std::size_t> hull;
    hull.reserve(64);
    auto slope = [&](std::size_t i, std::size_t j) {
        return (path.values[j] - path.values[i]) / (path.times[j] - path.times[i]);
    };
    for (std::size_t c = 0; c < path.size(); ++c) {
        while (hull.size() >= 2 && slope(hull[hull.size() - 2], hull.back()) >= slope(hull.back(), c))
            hull.pop_back();
        hull.push_back(c);
    }
    return hull;
}

//! Greatest convex function below the grid points of the path.
inline ConvexMinorant convex_minorant(const SamplePath& path) {
    return minorant_from_vertices(path, lower_hull_vertices(path));
}

struct Horizon {
    enum class Kind { fixed, exponential };
    Kind kind = Kind::fixed;
    double value = 1.0; //!< T for fixed, rate lambda for exponential

    static Horizon fixed(double t) { return {Kind::fixed, t}; }
    static Horizon exponential(double rate) { return {Kind::exponential, rate}; }
};

struct StickBreakingResult {
    ConvexMinorant minorant;
    double residual = 0.0;       //!< unbroken length, kept as a final face
    bool residual_flag = false;  //!< residual above 1e-9 T
};

/*!
 * Faces of the convex minorant sampled by uniform stick-breaking.
 *
 * Stick lengths l_k = U_k (T - l_1 - ... - l_{k-1}); heights are independent
 * draws of X_{l_k}. The remaining stick after n_faces breaks is kept as one
 * more face so the lengths add up to T.
 */
inline StickBreakingResult stick_breaking_minorant(const LevyModel& model, Horizon horizon,
                                                   int n_faces, RandomStream& rng) {
    CMLEVY_REQUIRE(n_faces >= 1, ArgumentError, "stick breaking needs n_faces >= 1");
    CMLEVY_REQUIRE(horizon.value > 0.0, ArgumentError, "horizon must be positive");
    double total = horizon.value;
    if (horizon.kind == Horizon::Kind::exponential)
        total = -std::log(rng.uniform()) / horizon.value;

    std::vector<std::pair<double, double>> sticks; // (length, height)
    sticks.reserve(static_cast<std::size_t>(n_faces) + 1);
    double rest = total;
    for (int k = 0; k < n_faces; ++k) {
        const double len = rest * rng.uniform();
        rest -= len;
        if (len > 0.0)
            sticks.emplace_back(len, model.sample_increment(len, rng));
    }
    StickBreakingResult out;
    out.residual = rest;
    out.residual_flag = rest > 1e-9 * total;
    if (rest > 0.0)
        sticks.emplace_back(rest, model.sample_increment(rest, rng));

    std::sort(sticks.begin(), sticks.end(), [](const auto& a, const auto& b) {
        return a.second / a.first < b.second / b.first;
    });
    std::vector<std::pair<double, double>> merged;
    for (const auto& s : sticks) {
        if (!merged.empty() && slopes_tied(merged.back().second / merged.back().first, s.second / s.first)) {
            merged.back().first += s.first;
            merged.back().second += s.second;
        } else {
            merged.push_back(s);
        }
    }
    std::vector<Face> faces;
    faces.reserve(merged.size());
    double start = 0.0;
    for (const auto& [len, h] : merged) {
        faces.push_back({start, len, h / len});
        start += len;
    }
    out.minorant = ConvexMinorant(std::move(faces), total);
    return out;
}

struct PostMinimum {
    double minimum = 0.0;
    double argmin = 0.0;
    std::size_t index = 0;
    SamplePath shifted; //!< X_{t + argmin} - minimum on the remaining grid
};

//! Grid minimum (last attainment) and the path re-rooted there.
inline PostMinimum post_minimum(const SamplePath& path) {
    CMLEVY_REQUIRE(!path.times.empty(), ArgumentError, "post_minimum of an empty path");
    std::size_t idx = 0;
    for (std::size_t i = 1; i < path.size(); ++i)
        if (path.values[i] <= path.values[idx])
            idx = i;
    PostMinimum pm;
    pm.index = idx;
    pm.minimum = path.values[idx];
    pm.argmin = path.times[idx];
    pm.shifted.interpolation = path.interpolation;
    pm.shifted.times.reserve(path.size() - idx);
    pm.shifted.values.reserve(path.size() - idx);
    for (std::size_t i = idx; i < path.size(); ++i) {
        pm.shifted.times.push_back(path.times[i] - pm.argmin);
        pm.shifted.values.push_back(path.values[i] - pm.minimum);
    }
    return pm;
}

} // namespace cmlevy
