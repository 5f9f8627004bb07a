#include "stwomble/surface.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace stw {

namespace {

int n_segments(const PolyCurveAtTime& c) {
    const int n = int(c.vertices.size());
    return c.closed ? n : n - 1;
}

const Eigen::Vector2d& vertex(const PolyCurveAtTime& c, int i) { return c.vertices[i % c.vertices.size()]; }

void reverse_curve(PolyCurveAtTime& c) {
    if (c.closed)
        std::reverse(c.vertices.begin() + 1, c.vertices.end());  // keep the start vertex
    else
        std::reverse(c.vertices.begin(), c.vertices.end());
}

double seg_dist(const Eigen::Vector2d& p, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    const Eigen::Vector2d d = b - a;
    const double l2 = d.squaredNorm();
    const double s = l2 > 0 ? std::clamp((p - a).dot(d) / l2, 0.0, 1.0) : 0.0;
    return (a + s * d - p).norm();
}

}  // namespace

double arc_length(const PolyCurveAtTime& c) {
    double s = 0;
    for (int i = 0; i < n_segments(c); ++i) s += (vertex(c, i + 1) - vertex(c, i)).norm();
    return s;
}

double signed_area(const PolyCurveAtTime& c) {
    double a = 0;
    const int n = int(c.vertices.size());
    for (int i = 0; i < n; ++i) {
        const auto& p = c.vertices[i];
        const auto& q = c.vertices[(i + 1) % n];
        a += p.x() * q.y() - q.x() * p.y();
    }
    return 0.5 * a;
}

double TriangulatedSurface::total_area() const {
    double a = 0;
    for (const auto& t : triangles) a += t.area;
    return a;
}

TriangulatedSurface triangulate(std::vector<PolyCurveAtTime> curves, int n_upsilon) {
    if (curves.size() < 2) throw GeometryError("need at least two curves");
    if (n_upsilon < 2) throw GeometryError("need at least two levels per time interval");
    const size_t nv = curves[0].vertices.size();
    for (const auto& c : curves) {
        if (c.vertices.size() != nv)
            throw MismatchedVertexCounts("curves have " + std::to_string(nv) + " and " +
                                         std::to_string(c.vertices.size()) + " vertices");
        if (c.closed != curves[0].closed) throw GeometryError("mixing open and closed curves");
    }
    if (nv < 2 || (curves[0].closed && nv < 3)) throw GeometryError("curve has too few vertices");
    for (size_t j = 1; j < curves.size(); ++j)
        if (!(curves[j].t > curves[j - 1].t)) throw NonIncreasingTimes("curve times must increase strictly");

    const bool closed = curves[0].closed;
    if (closed) {
        const double a0 = signed_area(curves[0]);
        for (const auto& c : curves)
            if (signed_area(c) * a0 <= 0) throw GeometryError("closed curves have inconsistent orientation");
        // the normal is the left side of the traversal; outward means clockwise
        if (a0 > 0)
            for (auto& c : curves) reverse_curve(c);
    }

    TriangulatedSurface s;
    s.n_omega = int(nv) + (closed ? 1 : 0);
    s.n_upsilon = n_upsilon;
    for (const auto& c : curves) s.times.push_back(c.t);

    double scale = 0;
    for (const auto& c : curves)
        for (const auto& v : c.vertices) scale = std::max(scale, v.cwiseAbs().maxCoeff());
    const double edge_tol = 1e-14 * std::max(scale, 1.0);

    for (size_t j = 0; j + 1 < curves.size(); ++j) {
        const auto& A = curves[j];
        const auto& B = curves[j + 1];
        const double t0 = A.t, t1 = B.t;
        auto P = [&](int i, int l) -> Eigen::Vector3d {
            const double lam = double(l) / (n_upsilon - 1);
            const Eigen::Vector2d xy = (1 - lam) * vertex(A, i) + lam * vertex(B, i);
            return {xy.x(), xy.y(), (1 - lam) * t0 + lam * t1};
        };
        for (int l = 0; l + 1 < n_upsilon; ++l)
            for (int i = 0; i + 1 < s.n_omega; ++i) {
                const Eigen::Vector3d p00 = P(i, l), p10 = P(i + 1, l), p01 = P(i, l + 1), p11 = P(i + 1, l + 1);
                const int cell = int(s.cell_mid.size());
                s.cell_mid.push_back(0.25 * (p00 + p10 + p01 + p11));
                double cell_area = 0;
                for (int k = 1; k <= 2; ++k) {
                    TrianglePlane T;
                    if (k == 1) {
                        T.v0 = p00;
                        T.e_omega = p10 - p00;
                        T.e_upsilon = p01 - p00;
                    } else {
                        T.v0 = p11;
                        T.e_omega = p01 - p11;
                        T.e_upsilon = p10 - p11;
                    }
                    if (T.e_omega.norm() <= edge_tol)
                        throw DegenerateEdge("zero-length curve edge at vertex " + std::to_string(i));
                    const Eigen::Vector3d n = T.normal_raw();
                    T.norm = n.norm();
                    if (!(T.norm > 0)) throw DegenerateEdge("triangle with zero area");
                    T.n_s = n.head<2>() / T.norm;
                    T.n_t = n.z() / T.norm;
                    T.area = 0.5 * T.norm;
                    T.i = i;
                    T.j = int(j);
                    T.level = l;
                    T.k = k;
                    T.cell = cell;
                    cell_area += T.area;
                    s.triangles.push_back(T);
                }
                s.partition_norm = std::max(s.partition_norm, cell_area);
            }
    }
    return s;
}

PolyCurveAtTime resample_curve(const PolyCurveAtTime& c, int n) {
    if (n < 2 || (c.closed && n < 3)) throw GeometryError("resampling target too small");
    const int m = int(c.vertices.size());
    const double total = arc_length(c);
    if (!(total > 0)) throw DegenerateCurve("curve has zero length");
    if (n == m) return c;
    const int ns = n_segments(c);
    PolyCurveAtTime out{c.t, {}, c.closed};
    if (n > m) {
        // refine the longest pieces; the original vertices stay, so length is unchanged
        std::vector<int> extra(ns, 0);
        std::vector<double> len(ns);
        for (int i = 0; i < ns; ++i) len[i] = (vertex(c, i + 1) - vertex(c, i)).norm();
        for (int r = 0; r < n - m; ++r) {
            int best = 0;
            for (int i = 1; i < ns; ++i)
                if (len[i] / (extra[i] + 1) > len[best] / (extra[best] + 1)) best = i;
            ++extra[best];
        }
        for (int i = 0; i < ns; ++i) {
            const Eigen::Vector2d a = vertex(c, i), b = vertex(c, i + 1);
            for (int k = 0; k <= extra[i]; ++k) out.vertices.push_back(a + (b - a) * (double(k) / (extra[i] + 1)));
        }
        if (!c.closed) out.vertices.push_back(c.vertices.back());
        return out;
    }
    // uniform arc-length positions
    const int pieces = c.closed ? n : n - 1;
    int seg = 0;
    double seg_start = 0;
    for (int k = 0; k < n; ++k) {
        const double target = total * k / pieces;
        if (!c.closed && k == n - 1) {
            out.vertices.push_back(c.vertices.back());
            break;
        }
        double L = (vertex(c, seg + 1) - vertex(c, seg)).norm();
        while (seg + 1 < ns && seg_start + L < target) {
            seg_start += L;
            ++seg;
            L = (vertex(c, seg + 1) - vertex(c, seg)).norm();
        }
        const double s = L > 0 ? std::clamp((target - seg_start) / L, 0.0, 1.0) : 0.0;
        out.vertices.push_back(vertex(c, seg) + s * (vertex(c, seg + 1) - vertex(c, seg)));
    }
    return out;
}

std::vector<PolyCurveAtTime> align_curves(std::vector<PolyCurveAtTime> curves, int n) {
    if (curves.empty()) return curves;
    size_t target = n;
    if (n == 0)
        for (const auto& c : curves) target = std::max(target, c.vertices.size());
    for (auto& c : curves) {
        if (c.closed) {
            if (signed_area(c) < 0) std::reverse(c.vertices.begin(), c.vertices.end());
            // start at the vertex closest to the +x ray from the centroid
            Eigen::Vector2d cen = Eigen::Vector2d::Zero();
            for (const auto& v : c.vertices) cen += v / double(c.vertices.size());
            size_t best = 0;
            double best_ang = 1e9;
            for (size_t i = 0; i < c.vertices.size(); ++i) {
                const Eigen::Vector2d d = c.vertices[i] - cen;
                const double ang = std::abs(std::atan2(d.y(), d.x()));
                if (ang < best_ang) {
                    best_ang = ang;
                    best = i;
                }
            }
            std::rotate(c.vertices.begin(), c.vertices.begin() + best, c.vertices.end());
        } else {
            const auto& r = curves[0].vertices;
            const Eigen::Vector2d ref = r.back() - r.front();
            if ((c.vertices.back() - c.vertices.front()).dot(ref) < 0)
                std::reverse(c.vertices.begin(), c.vertices.end());
        }
        c = resample_curve(c, int(target));
    }
    return curves;
}

std::vector<PolyCurveAtTime> level_curves(const GridField& f, double level) {
    const int nx = int(f.xs.size()), ny = int(f.ys.size());
    if (nx < 2 || ny < 2 || f.values.rows() != nx || f.values.cols() != ny)
        throw ShapeMismatch("grid field dimensions disagree");
    if (!f.values.allFinite()) throw GeometryError("grid field has non-finite values");
    auto above = [&](int ix, int iy) { return f.values(ix, iy) > level; };
    // edge keys: horizontal (ix,iy)-(ix+1,iy) -> 2*(ix*ny+iy), vertical (ix,iy)-(ix,iy+1) -> +1
    auto hkey = [&](int ix, int iy) { return 2L * (long(ix) * ny + iy); };
    auto vkey = [&](int ix, int iy) { return 2L * (long(ix) * ny + iy) + 1; };
    auto crossing = [&](long key) -> Eigen::Vector2d {
        const long base = key / 2;
        const int ix = int(base / ny), iy = int(base % ny);
        const bool vert = key & 1;
        const int jx = vert ? ix : ix + 1, jy = vert ? iy + 1 : iy;
        const double a = f.values(ix, iy), b = f.values(jx, jy);
        const double s = (level - a) / (b - a);
        return {f.xs[ix] + s * (f.xs[jx] - f.xs[ix]), f.ys[iy] + s * (f.ys[jy] - f.ys[iy])};
    };

    struct Seg {
        long from, to;
    };
    std::vector<Seg> segs;
    for (int ix = 0; ix + 1 < nx; ++ix)
        for (int iy = 0; iy + 1 < ny; ++iy) {
            // corners 0..3 counter-clockwise from (ix, iy); edge e joins corner e and e+1
            const bool c[4] = {above(ix, iy), above(ix + 1, iy), above(ix + 1, iy + 1), above(ix, iy + 1)};
            const long e[4] = {hkey(ix, iy), vkey(ix + 1, iy), hkey(ix, iy + 1), vkey(ix, iy)};
            std::vector<int> cut;
            for (int k = 0; k < 4; ++k)
                if (c[k] != c[(k + 1) % 4]) cut.push_back(k);
            std::vector<std::pair<int, int>> pairs;
            if (cut.size() == 2) {
                pairs.push_back({cut[0], cut[1]});
            } else if (cut.size() == 4) {
                const double mean = 0.25 * (f.values(ix, iy) + f.values(ix + 1, iy) + f.values(ix + 1, iy + 1) +
                                            f.values(ix, iy + 1));
                // isolate the two corners whose state differs from the cell centre
                const bool centre = mean > level;
                for (int k = 0; k < 4; ++k)
                    if (c[k] != centre) pairs.push_back({(k + 3) % 4, k});
            }
            // walking from edge ea to edge eb leaves corner ea + 1 on the right
            for (auto [ea, eb] : pairs) {
                if (c[(ea + 1) % 4])
                    segs.push_back({e[eb], e[ea]});
                else
                    segs.push_back({e[ea], e[eb]});
            }
        }
    if (segs.empty()) throw EmptyContour("no crossing of level " + std::to_string(level));

    std::map<long, int> by_from;
    std::map<long, int> to_count;
    for (int k = 0; k < int(segs.size()); ++k) {
        by_from[segs[k].from] = k;
        ++to_count[segs[k].to];
    }
    std::vector<bool> used(segs.size(), false);
    std::vector<PolyCurveAtTime> out;
    auto push_vertex = [](PolyCurveAtTime& c, const Eigen::Vector2d& p) {
        if (c.vertices.empty() || (c.vertices.back() - p).norm() > 1e-14) c.vertices.push_back(p);
    };
    auto trace = [&](int start, bool closed) {
        PolyCurveAtTime c{f.t, {}, closed};
        int k = start;
        push_vertex(c, crossing(segs[k].from));
        while (k >= 0 && !used[k]) {
            used[k] = true;
            push_vertex(c, crossing(segs[k].to));
            auto it = by_from.find(segs[k].to);
            k = it == by_from.end() ? -1 : it->second;
        }
        if (closed && c.vertices.size() > 1 && (c.vertices.front() - c.vertices.back()).norm() <= 1e-14)
            c.vertices.pop_back();
        const size_t need = closed ? 3 : 2;
        if (c.vertices.size() >= need) {
            if (closed && signed_area(c) < 0) std::reverse(c.vertices.begin(), c.vertices.end());
            out.push_back(std::move(c));
        }
    };
    for (int k = 0; k < int(segs.size()); ++k)
        if (!used[k] && !to_count.count(segs[k].from)) trace(k, false);
    for (int k = 0; k < int(segs.size()); ++k)
        if (!used[k]) trace(k, true);
    if (out.empty()) throw EmptyContour("no usable contour at level " + std::to_string(level));
    return out;
}

bool contains(const PolyCurveAtTime& c, const Eigen::Vector2d& p) {
    bool in = false;
    const size_t n = c.vertices.size();
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
        const auto& a = c.vertices[i];
        const auto& b = c.vertices[j];
        if ((a.y() > p.y()) != (b.y() > p.y()) && p.x() < (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x())
            in = !in;
    }
    return in;
}

PolyCurveAtTime closed_curve_around(const std::vector<PolyCurveAtTime>& curves, const Eigen::Vector2d& p) {
    const PolyCurveAtTime* best = nullptr;
    for (const auto& c : curves)
        if (c.closed && contains(c, p) && (!best || std::abs(signed_area(c)) < std::abs(signed_area(*best))))
            best = &c;
    if (!best) throw EmptyContour("no closed contour encloses the point");
    return *best;
}

PolyCurveAtTime open_curve_near(const std::vector<PolyCurveAtTime>& curves, const Eigen::Vector2d& p) {
    const PolyCurveAtTime* best = nullptr;
    double bd = INFINITY;
    for (const auto& c : curves) {
        if (c.closed) continue;
        for (size_t i = 0; i + 1 < c.vertices.size(); ++i) {
            const double d = seg_dist(p, c.vertices[i], c.vertices[i + 1]);
            if (d < bd) {
                bd = d;
                best = &c;
            }
        }
    }
    if (!best) throw EmptyContour("no open contour found");
    return *best;
}

}  // namespace stw
