#pragma once

// Paths from 0 to a target R in the region S_{eps,A} (right half strip with
// disks around the poles m pi removed), and quadrature along them.

#include "oddhyp/core/errors.hpp"
#include "oddhyp/core/quadrature.hpp"
#include "oddhyp/core/scalar.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace oddhyp {

struct PoleRegion {
    double eps = 0.3;
    double A = 1.0;

    void validate() const {
        if (!(eps > 0 && eps < kPi)) throw ConfigError("PoleRegion: eps must lie in (0, pi)");
        if (!(A > eps && A < kPi)) throw ConfigError("PoleRegion: A must lie in (eps, pi)");
    }

    bool contains(Complex R) const {
        if (!(R.real() > 0) || !(std::abs(R.imag()) < A)) return false;
        const long m = std::max(1L, std::lround(R.real() / kPi));
        for (long k = std::max(1L, m - 1); k <= m + 1; ++k)
            if (std::abs(R - Complex(k * kPi, 0.0)) <= eps) return false;
        return true;
    }
};

struct Segment {
    enum class Kind { line, arc };
    Kind kind = Kind::line;
    Complex a{}, b{};     // line endpoints
    Complex center{};     // arc center
    double radius = 0.0;  // arc radius
    double theta0 = 0.0, theta1 = 0.0;

    static Segment line(Complex a, Complex b) {
        Segment s;
        s.a = a;
        s.b = b;
        return s;
    }
    static Segment arc(Complex center, double radius, double theta0, double theta1) {
        Segment s;
        s.kind = Kind::arc;
        s.center = center;
        s.radius = radius;
        s.theta0 = theta0;
        s.theta1 = theta1;
        s.a = s.point(0.0);
        s.b = s.point(1.0);
        return s;
    }

    /// Position at s in [0, 1].
    Complex point(double s) const {
        if (kind == Kind::line) return a + (b - a) * s;
        const double th = theta0 + (theta1 - theta0) * s;
        return center + radius * Complex(std::cos(th), std::sin(th));
    }
    /// dz/ds.
    Complex tangent(double s) const {
        if (kind == Kind::line) return b - a;
        const double th = theta0 + (theta1 - theta0) * s;
        return radius * (theta1 - theta0) * Complex(-std::sin(th), std::cos(th));
    }
    double length() const { return kind == Kind::line ? std::abs(b - a) : radius * std::abs(theta1 - theta0); }

    bool same_as(const Segment& o) const {
        return kind == o.kind && a == o.a && b == o.b && center == o.center && radius == o.radius &&
               theta0 == o.theta0 && theta1 == o.theta1;
    }
};

struct ContourPath {
    std::vector<Segment> segments;

    Complex start() const { return segments.empty() ? Complex{} : segments.front().a; }
    Complex end() const { return segments.empty() ? Complex{} : segments.back().b; }
    double length() const {
        double L = 0.0;
        for (const auto& s : segments) L += s.length();
        return L;
    }

    /// Straight segment 0 -> R, for entire integrands.
    static ContourPath straight(Complex R) {
        ContourPath p;
        if (R != Complex{}) p.segments.push_back(Segment::line(Complex{}, R));
        return p;
    }
};

namespace detail {

inline void push_real(ContourPath& p, double x0, double x1, const std::vector<double>& breaks) {
    if (!(x1 > x0)) return;
    double cur = x0;
    for (double b : breaks) {
        if (b > cur && b < x1) {
            p.segments.push_back(Segment::line(cur, b));
            cur = b;
        }
    }
    p.segments.push_back(Segment::line(cur, x1));
}

}  // namespace detail

/// Real-axis segments joined by upper semicircles of radius rho_d around each
/// m pi passed. A target whose real part lies within rho_d of a pole is reached
/// by a partial arc followed by a radial segment. Real segments are split at
/// `breaks`, so that paths to several targets share identical pieces.
inline ContourPath build_contour(Complex R, const PoleRegion& region, double rho_d,
                                 const std::vector<double>& breaks = {}) {
    region.validate();
    if (!(rho_d > region.eps && rho_d < region.A))
        throw ConfigError("build_contour: detour radius must lie in (eps, A)");
    if (!region.contains(R)) throw InvalidTarget("build_contour: target outside S_{eps,A}");
    std::vector<double> sorted = breaks;
    std::sort(sorted.begin(), sorted.end());
    ContourPath path;
    const double x = R.real();
    double pos = 0.0;
    for (long m = 1;; ++m) {
        const double c = m * kPi;
        if (x < c - rho_d) break;
        detail::push_real(path, pos, c - rho_d, sorted);
        if (x <= c + rho_d) {
            const Complex d = R - c;
            const double th = std::arg(d);
            double end = th;
            if (th < -kPi / 2) end = th + 2.0 * kPi;  // lower left: short way round below
            path.segments.push_back(Segment::arc(Complex(c, 0.0), rho_d, kPi, end));
            const Complex on_circle = Complex(c, 0.0) + rho_d * Complex(std::cos(th), std::sin(th));
            if (std::abs(R - on_circle) > 0.0) path.segments.push_back(Segment::line(on_circle, R));
            return path;
        }
        path.segments.push_back(Segment::arc(Complex(c, 0.0), rho_d, kPi, 0.0));
        pos = c + rho_d;
    }
    detail::push_real(path, pos, x, sorted);
    if (R.imag() != 0.0) path.segments.push_back(Segment::line(Complex(x, 0.0), R));
    return path;
}

/// Adaptive Gauss-Kronrod on each segment; the global error estimate is
/// bounded by max(tol.abs, tol.rel |I|).
template <class F>
QuadResult contour_quad(F&& integrand, const ContourPath& path, const QuadTolerance& tol = {}) {
    if (path.segments.empty()) return {};
    auto f = [&](int piece, double s) -> Complex {
        const auto& seg = path.segments[piece];
        return Complex(integrand(seg.point(s))) * seg.tangent(s);
    };
    return adaptive_gk(f, static_cast<int>(path.segments.size()), tol);
}

/// Fixed composite Gauss-Kronrod rule along a set of segments. Each segment is
/// cut into panels no longer than `panel`; every panel carries the 21 Kronrod
/// nodes, and the embedded 10-point Gauss rule gives the error estimate.
struct PathRule {
    std::vector<Complex> nodes;
    std::vector<Complex> kronrod;  // weights including dz/ds
    std::vector<Complex> gauss;    // zero on Kronrod-only nodes
    std::vector<std::size_t> segment_begin;  // node offset of each segment, plus end

    std::size_t size() const { return nodes.size(); }

    static PathRule build(const std::vector<Segment>& segs, double panel) {
        PathRule r;
        for (const auto& seg : segs) {
            r.segment_begin.push_back(r.nodes.size());
            const int panels = std::max(1, static_cast<int>(std::ceil(seg.length() / panel)));
            for (int p = 0; p < panels; ++p) {
                const double a = double(p) / panels, b = double(p + 1) / panels;
                const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
                auto add = [&](double s, double wk, double wg) {
                    const Complex jac = seg.tangent(s) * half;
                    r.nodes.push_back(seg.point(s));
                    r.kronrod.push_back(wk * jac);
                    r.gauss.push_back(wg * jac);
                };
                for (int j = 0; j < 10; ++j) {
                    const double wg = (j % 2 == 1) ? detail::kWg[j / 2] : 0.0;
                    add(mid - half * detail::kXgk[j], detail::kWgk[j], wg);
                    add(mid + half * detail::kXgk[j], detail::kWgk[j], wg);
                }
                add(mid, detail::kWgk[10], 0.0);
            }
        }
        r.segment_begin.push_back(r.nodes.size());
        return r;
    }
};

/// Several targets whose contours share pieces. Every distinct segment gets a
/// fixed rule once; integrals to each target are sums over its segments.
class MultiTargetRule {
public:
    MultiTargetRule(const std::vector<Complex>& targets, const PoleRegion& region, double rho_d, double panel = 0.25)
        : MultiTargetRule(contours_for(targets, region, rho_d), panel) {}

    explicit MultiTargetRule(const std::vector<ContourPath>& paths, double panel = 0.25) {
        std::vector<Segment> unique;
        for (const auto& p : paths) {
            std::vector<std::size_t> ids;
            for (const auto& s : p.segments) {
                std::size_t k = 0;
                while (k < unique.size() && !unique[k].same_as(s)) ++k;
                if (k == unique.size()) unique.push_back(s);
                ids.push_back(k);
            }
            target_segments_.push_back(std::move(ids));
            paths_.push_back(p);
        }
        segments_ = unique;
        rule_ = PathRule::build(unique, panel);
    }

    static std::vector<ContourPath> contours_for(const std::vector<Complex>& targets, const PoleRegion& region,
                                                 double rho_d) {
        std::vector<double> breaks;
        for (const auto& R : targets) breaks.push_back(R.real());
        std::vector<ContourPath> out;
        for (const auto& R : targets) out.push_back(build_contour(R, region, rho_d, breaks));
        return out;
    }

    const PathRule& rule() const { return rule_; }
    const std::vector<Segment>& segments() const { return segments_; }
    const ContourPath& path(std::size_t j) const { return paths_[j]; }
    std::size_t targets() const { return paths_.size(); }

    struct Sums {
        std::vector<Complex> value;
        std::vector<double> error;
    };

    /// Integrals to each target given the integrand sampled at rule().nodes.
    Sums integrate(const std::vector<Complex>& samples) const {
        std::vector<Complex> seg_k(segments_.size());
        std::vector<double> seg_err(segments_.size());
        for (std::size_t s = 0; s < segments_.size(); ++s) {
            Complex k{};
            double err = 0.0, mag = 0.0;
            // per-panel error: 21 nodes per panel
            for (std::size_t i = rule_.segment_begin[s]; i < rule_.segment_begin[s + 1]; i += 21) {
                Complex pk{}, pg{};
                for (std::size_t j = i; j < i + 21; ++j) {
                    pk += rule_.kronrod[j] * samples[j];
                    pg += rule_.gauss[j] * samples[j];
                    mag += std::abs(rule_.kronrod[j] * samples[j]);
                }
                k += pk;
                err += std::abs(pk - pg);
            }
            seg_k[s] = k;
            // floor at accumulated roundoff
            seg_err[s] = std::max(err, 1e-15 * mag);
        }
        Sums out;
        for (const auto& ids : target_segments_) {
            Complex v{};
            double e = 0.0;
            for (auto id : ids) {
                v += seg_k[id];
                e += seg_err[id];
            }
            out.value.push_back(v);
            out.error.push_back(e);
        }
        return out;
    }

private:
    std::vector<ContourPath> paths_;
    std::vector<std::vector<std::size_t>> target_segments_;
    std::vector<Segment> segments_;
    PathRule rule_;
};

}  // namespace oddhyp
