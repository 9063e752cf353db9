// Copyright 2026 The Mollow Sensors Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mollow/leapfrog.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "mollow/errors.hpp"

namespace mollow {

namespace {

void check_partition(std::span<const int> partition) {
    if (partition.empty()) throw ParameterError("partition must contain at least one group");
    for (int n : partition)
        if (n < 1) throw ParameterError("every bundle order must be >= 1");
}

// All coefficient vectors 0 <= c <= n (odometer order), excluding zero.
std::vector<std::vector<int>> sub_multisets(std::span<const int> partition) {
    std::vector<std::vector<int>> out;
    std::vector<int> c(partition.size(), 0);
    for (;;) {
        std::size_t k = 0;
        while (k < c.size() && c[k] == partition[k]) c[k++] = 0;
        if (k == c.size()) break;
        ++c[k];
        out.push_back(c);
    }
    return out;
}

double weighted_sum(std::span<const int> c, std::span<const double> w) {
    double s = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) s += c[k] * w[k];
    return s;
}

double distance_to_real(double s, double omega_plus) {
    return std::min({std::abs(s), std::abs(s - omega_plus), std::abs(s + omega_plus)});
}

double spread(std::span<const double> w) {
    const auto [lo, hi] = std::minmax_element(w.begin(), w.end());
    return *hi - *lo;
}

}  // namespace

int LeapfrogCondition::order() const {
    int n = 0;
    for (int c : coefficients) n += c;
    return n;
}

double LeapfrogCondition::residual(std::span<const double> frequencies) const {
    if (frequencies.size() != coefficients.size()) throw ParameterError("frequency count does not match condition");
    return weighted_sum(coefficients, frequencies) - delta;
}

bool LeapfrogCondition::contains(std::span<const double> frequencies, double tolerance) const {
    return std::abs(residual(frequencies)) <= tolerance;
}

std::string LeapfrogCondition::label() const {
    std::ostringstream os;
    bool first = true;
    for (std::size_t k = 0; k < coefficients.size(); ++k) {
        if (coefficients[k] == 0) continue;
        if (!first) os << '+';
        if (coefficients[k] > 1) os << coefficients[k];
        os << 'w' << k + 1;
        first = false;
    }
    os << '=' << (branch > 0 ? "+W" : branch < 0 ? "-W" : "0");
    return os.str();
}

std::vector<LeapfrogCondition> enumerate_conditions(std::span<const int> partition, double omega_plus) {
    check_partition(partition);
    if (!(omega_plus > 0.0)) throw ParameterError("omega_plus must be positive");

    std::vector<std::vector<int>> families{std::vector<int>(partition.begin(), partition.end())};
    std::vector<std::vector<int>> subs;
    for (auto& c : sub_multisets(partition)) {
        int photons = 0, groups = 0;
        bool full = true;
        for (std::size_t k = 0; k < c.size(); ++k) {
            photons += c[k];
            groups += c[k] > 0;
            full = full && c[k] == partition[k];
        }
        if (!full && photons >= 2 && groups >= 2) subs.push_back(std::move(c));
    }
    // Higher orders first, then lexicographically descending coefficients.
    std::sort(subs.begin(), subs.end(), [](const auto& a, const auto& b) {
        const int oa = std::accumulate(a.begin(), a.end(), 0), ob = std::accumulate(b.begin(), b.end(), 0);
        if (oa != ob) return oa > ob;
        return a > b;
    });
    families.insert(families.end(), subs.begin(), subs.end());

    std::vector<LeapfrogCondition> out;
    for (const auto& c : families) {
        for (int branch : {-1, 0, 1}) out.push_back(LeapfrogCondition{c, branch, branch * omega_plus});
    }
    return out;
}

Overlay annotate(const ResultGrid& grid, const PlaneSpec& plane, std::span<const LeapfrogCondition> conditions) {
    if (grid.axes.empty() || grid.axes.size() > 2) throw LayoutError("overlays need a grid with one or two axes");
    const bool two = grid.axes.size() == 2;
    auto range = [](const Axis& a) { return std::minmax_element(a.values.begin(), a.values.end()); };
    const auto [u_lo_it, u_hi_it] = range(grid.axes[0]);
    const double u_lo = *u_lo_it, u_hi = *u_hi_it;
    double v_lo = 0.0, v_hi = 0.0;
    if (two) {
        const auto [lo, hi] = range(grid.axes[1]);
        v_lo = *lo;
        v_hi = *hi;
    }

    Overlay overlay;
    for (const auto& cond : conditions) {
        if (cond.coefficients.size() != plane.origin.size()) throw ParameterError("condition does not match plane groups");
        OverlayLine line{cond, {}, false, {}};
        // On the plane: a u + b v = r.
        const double a = weighted_sum(cond.coefficients, plane.u_dir);
        const double b = two ? weighted_sum(cond.coefficients, plane.v_dir) : 0.0;
        const double r = cond.delta - weighted_sum(cond.coefficients, plane.origin);
        const double scale = std::max({std::abs(u_hi), std::abs(u_lo), std::abs(v_hi), std::abs(v_lo), std::abs(cond.delta), 1.0});
        const double tiny = 1e-12;

        if (std::abs(a) < tiny && std::abs(b) < tiny) {
            line.skipped = true;
            line.note = std::abs(r) < tiny * scale ? "condition holds on the whole grid; no line"
                                                   : "condition does not depend on the free axes";
        } else if (!two) {
            const double u = r / a;
            if (u >= u_lo - tiny * scale && u <= u_hi + tiny * scale) {
                line.points.push_back({u, 0.0});
            } else {
                line.skipped = true;
                line.note = "condition falls outside the grid";
            }
        } else {
            // Intersections with the four edges, deduplicated.
            std::vector<std::array<double, 2>> hits;
            auto add = [&](double u, double v) {
                const double eps = 1e-9 * scale;
                if (u < u_lo - eps || u > u_hi + eps || v < v_lo - eps || v > v_hi + eps) return;
                u = std::clamp(u, u_lo, u_hi);
                v = std::clamp(v, v_lo, v_hi);
                for (const auto& h : hits)
                    if (std::abs(h[0] - u) <= eps && std::abs(h[1] - v) <= eps) return;
                hits.push_back({u, v});
            };
            if (std::abs(b) >= tiny) {
                add(u_lo, (r - a * u_lo) / b);
                add(u_hi, (r - a * u_hi) / b);
            }
            if (std::abs(a) >= tiny) {
                add((r - b * v_lo) / a, v_lo);
                add((r - b * v_hi) / a, v_hi);
            }
            if (hits.size() < 2) {
                line.skipped = true;
                line.note = "condition falls outside the grid";
            } else {
                std::sort(hits.begin(), hits.end());
                line.points = {hits.front(), hits.back()};
            }
        }
        overlay.lines.push_back(std::move(line));
    }
    return overlay;
}

double exclusion_distance(std::span<const int> partition, std::span<const double> frequencies, double omega_plus) {
    check_partition(partition);
    if (frequencies.size() != partition.size()) throw ParameterError("frequency count does not match partition");
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : sub_multisets(partition)) {
        if (std::equal(c.begin(), c.end(), partition.begin())) continue;
        best = std::min(best, distance_to_real(weighted_sum(c, frequencies), omega_plus));
    }
    return best;
}

FilterRecommendation recommend_filters(std::span<const int> partition, int branch, double omega_plus,
                                       double margin, double linewidth, const RecommendOptions& options) {
    check_partition(partition);
    if (branch < -1 || branch > 1) throw ParameterError("branch must be -1, 0 or +1");
    if (!(omega_plus > 0.0)) throw ParameterError("omega_plus must be positive");
    if (!(margin > 0.0)) throw ParameterError("margin must be positive");
    if (!(linewidth > 0.0)) throw ParameterError("linewidth must be positive");
    if (!(options.band > 0.0)) throw ParameterError("band must be positive");

    const std::size_t groups = partition.size();
    if (groups > 4) throw ParameterError("filter recommendation supports at most four groups");
    const std::size_t free = groups - 1;
    const double delta = branch * omega_plus;
    const double band = options.band * omega_plus;
    const int last = partition.back();

    // Candidate from the free frequencies; the last group closes the condition.
    auto complete = [&](const std::vector<double>& x, std::vector<double>& w) {
        w.assign(x.begin(), x.end());
        double rest = delta;
        for (std::size_t k = 0; k < free; ++k) rest -= partition[k] * x[k];
        w.push_back(rest / last);
        return std::abs(w.back()) <= band;
    };
    auto score = [&](const std::vector<double>& x, std::vector<double>& w) {
        if (!complete(x, w)) return -std::numeric_limits<double>::infinity();
        for (double f : x)
            if (std::abs(f) > band) return -std::numeric_limits<double>::infinity();
        return exclusion_distance(partition, w, omega_plus);
    };
    const double tie = 1e-9 * omega_plus;
    // Better distance wins; within the tie window the most nearly equal set wins,
    // then the lexicographically smaller one.
    auto better = [&](double s1, const std::vector<double>& w1, double s2, const std::vector<double>& w2) {
        if (s1 > s2 + tie) return true;
        if (s1 < s2 - tie) return false;
        const double d1 = spread(w1), d2 = spread(w2);
        if (d1 < d2 - tie) return true;
        if (d1 > d2 + tie) return false;
        return w1 < w2;
    };

    std::vector<double> best_x(free, 0.0), best_w, w;
    double best = score(best_x, best_w);

    if (free > 0) {
        static constexpr std::array<int, 4> kPoints{4001, 401, 61, 1};
        const int n = kPoints[free - 1];
        const double h = 2.0 * band / (n - 1);
        std::vector<int> idx(free, 0);
        std::vector<double> x(free);
        for (;;) {
            for (std::size_t k = 0; k < free; ++k) x[k] = -band + h * idx[k];
            const double s = score(x, w);
            if (better(s, w, best, best_w)) {
                best = s;
                best_x = x;
                best_w = w;
            }
            std::size_t k = 0;
            while (k < free && ++idx[k] == n) idx[k++] = 0;
            if (k == free) break;
        }
        // Pattern search over all 3^free - 1 directions with a shrinking step.
        for (double step = h; step > 1e-10 * omega_plus; step *= 0.5) {
            bool moved = true;
            while (moved) {
                moved = false;
                std::vector<int> dir(free, -1);
                for (;;) {
                    if (std::any_of(dir.begin(), dir.end(), [](int d) { return d != 0; })) {
                        for (std::size_t k = 0; k < free; ++k) x[k] = best_x[k] + step * dir[k];
                        const double s = score(x, w);
                        if (s > best + 1e-14 * omega_plus) {
                            best = s;
                            best_x = x;
                            best_w = w;
                            moved = true;
                        }
                    }
                    std::size_t k = 0;
                    while (k < free && ++dir[k] == 2) dir[k++] = -1;
                    if (k == free) break;
                }
            }
        }
    }

    if (!std::isfinite(best)) {
        throw FeasibilityError("no frequencies inside the band satisfy the condition", 0.0);
    }
    const double achieved = best / linewidth;
    if (achieved < margin) {
        std::ostringstream msg;
        msg << "requested margin " << margin << " linewidths is infeasible; best achievable is " << achieved;
        throw FeasibilityError(msg.str(), achieved);
    }

    FilterRecommendation rec;
    rec.frequencies = best_w;
    rec.condition = LeapfrogCondition{std::vector<int>(partition.begin(), partition.end()), branch, delta};
    rec.margin = achieved;
    rec.requested_margin = margin;
    std::ostringstream why;
    why << "real-state-free: every partial photon sum stays " << best << " (" << achieved
        << " linewidths) from the transitions {-W, 0, +W}";
    rec.rationale = why.str();
    return rec;
}

}  // namespace mollow
