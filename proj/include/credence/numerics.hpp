#pragma once

#include <cmath>
#include <optional>
#include <vector>

namespace credence::num {

inline constexpr int kMaxBisect = 200;
inline constexpr double kResidualTol = 1e-12;

// Bisection on a bracket with f(lo), f(hi) of opposite sign. Runs until the
// bracket stops shrinking (about 60 halvings in double), capped at
// kMaxBisect; callers check the residual against kResidualTol.
template <class F>
std::optional<double> bisect(F&& f, double lo, double hi, double flo, double fhi) {
    if (flo == 0) return lo;
    if (fhi == 0) return hi;
    if ((flo < 0) == (fhi < 0)) return std::nullopt;
    double mid = 0.5 * (lo + hi);
    for (int it = 0; it < kMaxBisect; ++it) {
        mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        double fm = f(mid);
        if (fm == 0) return mid;
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    return std::abs(flo) < std::abs(fhi) ? lo : hi;
}

template <class F>
std::optional<double> bisect(F&& f, double lo, double hi) {
    return bisect(f, lo, hi, f(lo), f(hi));
}

// All sign changes of f on an n-point scan of [lo, hi], each refined.
template <class F>
std::vector<double> scan_roots(F&& f, double lo, double hi, int n) {
    std::vector<double> out;
    double x0 = lo, f0 = f(lo);
    if (f0 == 0) out.push_back(lo);
    for (int i = 1; i < n; ++i) {
        double x1 = (i == n - 1) ? hi : lo + (hi - lo) * i / (n - 1);
        double f1 = f(x1);
        if (f1 == 0) {
            out.push_back(x1);
        } else if (f0 != 0 && (f0 < 0) != (f1 < 0)) {
            if (auto r = bisect(f, x0, x1, f0, f1)) out.push_back(*r);
        }
        x0 = x1;
        f0 = f1;
    }
    return out;
}

}  // namespace credence::num
