#ifndef PARTWEYL_BESSEL_HPP
#define PARTWEYL_BESSEL_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <vector>

#include "partweyl/common.hpp"

// Bessel functions J_nu of real order nu >= 0, self-contained so that the
// fractional orders needed by corner-adapted bases do not depend on the
// platform math library.  Three regimes:
//   - ascending power series for small argument,
//   - Steed's continued-fraction method (CF1 ratio, downward recurrence,
//     complex CF2, Wronskian normalization) for the general case,
//   - Hankel asymptotic expansion for large argument at low order.
// Validated against an arbitrary-precision reference table in the tests.

namespace partweyl::bessel {

namespace detail {

inline constexpr double kEps = 1e-16;
inline constexpr double kTiny = 1e-290;
inline constexpr int kMaxIter = 20000;

// Ascending series; safe whenever x*x/4 < nu+1 or x is small.
inline double series(double nu, double x) {
    if (x == 0.0) return nu == 0.0 ? 1.0 : 0.0;
    const double lnpre = nu * std::log(0.5 * x) - std::lgamma(nu + 1.0);
    if (lnpre < -700.0) return 0.0;
    const double q = -0.25 * x * x;
    double term = 1.0, sum = 1.0;
    for (int m = 1; m < 500; ++m) {
        term *= q / (m * (nu + m));
        sum += term;
        if (std::abs(term) < kEps * std::abs(sum)) break;
    }
    return std::exp(lnpre) * sum;
}

// Hankel expansion J_nu(x) = sqrt(2/(pi x)) [P cos(chi) - Q sin(chi)],
// chi = x - (nu/2 + 1/4) pi.  Returns false if the series fails to reach
// machine accuracy before its terms start growing.
inline bool asymptotic(double nu, double x, double& out) {
    const double mu = 4.0 * nu * nu;
    double p = 1.0, q = 0.0;
    double term = 1.0;
    bool converged = false;
    for (int k = 1; k < 40; ++k) {
        const double odd = 2.0 * k - 1.0;
        const double next = term * (mu - odd * odd) / (8.0 * x * k);
        if (std::abs(next) >= std::abs(term) && k > 2) break;
        term = next;
        if (k % 2 == 1)
            q += (k % 4 == 1 ? term : -term);
        else
            p += (k % 4 == 2 ? -term : term);
        if (std::abs(term) < 3e-16) {
            converged = true;
            break;
        }
    }
    if (!converged) return false;
    const double chi = x - (0.5 * nu + 0.25) * pi;
    out = std::sqrt(2.0 / (pi * x)) * (p * std::cos(chi) - q * std::sin(chi));
    return true;
}

// CF1: returns h = J'_nu/J_nu; sign receives the sign of J_nu.
inline double cf1(double nu, double x, int& sign) {
    const double xi = 1.0 / x;
    const double xi2 = 2.0 * xi;
    sign = 1;
    double h = nu * xi;
    if (h < kTiny) h = kTiny;
    double b = xi2 * nu;
    double d = 0.0, c = h;
    for (int i = 1;; ++i) {
        if (i > kMaxIter) throw numerical_failure("bessel CF1 failed to converge");
        b += xi2;
        d = b - d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = b - 1.0 / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = c * d;
        h *= del;
        if (d < 0.0) sign = -sign;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return h;
}

// Shared downward recurrence (J, J') from nu over nl integer steps.
// On return rjl/rjpl hold the (unnormalized) values at mu = nu - nl and
// rjl_top the seed value at nu.
struct DownChain {
    double rjl, rjpl, rjl_top;
};

inline DownChain recur_down(double nu, double x, double h, int sign, int nl) {
    const double xi = 1.0 / x;
    DownChain ch{};
    ch.rjl = sign * kTiny;
    ch.rjpl = h * ch.rjl;
    ch.rjl_top = ch.rjl;
    double fact = nu * xi;
    for (int l = nl; l >= 1; --l) {
        const double rjtemp = fact * ch.rjl + ch.rjpl;
        fact -= xi;
        ch.rjpl = fact * rjtemp - ch.rjl;
        ch.rjl = rjtemp;
    }
    if (ch.rjl == 0.0) ch.rjl = kEps;
    return ch;
}

// Large argument: Miller's downward recurrence started safely above the
// turning point, normalized against the Hankel expansion at order < 2.
// Avoids the slow pre-asymptotic phase of CF1 when x is well above nu.
inline double miller_asymptotic_norm(double nu, double x) {
    const int nl = static_cast<int>(nu);
    const double mu = nu - nl; // in [0, 1)
    const double top = std::max(nu, x);
    const int m_start =
        static_cast<int>(top - mu) + 30 + static_cast<int>(12.0 * std::cbrt(top));

    double jp = 0.0;       // J_{mu+k+1}, unnormalized
    double jc = 1e-300;    // J_{mu+k}
    double at_nu = 0.0;
    double stored_scale = 1.0;
    for (int k = m_start; k >= 0; --k) {
        const double prev = (2.0 * (mu + k + 1.0) / x) * jc - jp;
        jp = jc;
        jc = prev;
        if (std::abs(jc) > 1e250) {
            jc *= 1e-250;
            jp *= 1e-250;
            at_nu *= 1e-250;
            stored_scale *= 1e-250;
        }
        if (k == nl) at_nu = jc;
    }
    (void)stored_scale;
    const double j_mu0 = jc;                       // unnormalized J_mu
    const double j_mu1 = jp;                       // unnormalized J_{mu+1}
    double ref_mu, ref_mu1;
    if (!asymptotic(mu, x, ref_mu) || !asymptotic(mu + 1.0, x, ref_mu1))
        throw numerical_failure("bessel asymptotic normalization failed");
    const double scale = std::abs(j_mu0) >= std::abs(j_mu1) ? ref_mu / j_mu0 : ref_mu1 / j_mu1;
    return scale * at_nu;
}

// Steed's method for J_nu(x), x >= ~1.5, any nu >= 0.
inline double steed(double nu, double x) {
    const double xi = 1.0 / x;
    const double xi2 = 2.0 * xi;
    const double wron = xi2 / pi;

    int isign;
    const double h = cf1(nu, x, isign);

    // Downward recurrence from nu to mu <= x (CF2 converges there).
    const int nl = std::max(0, static_cast<int>(nu - x + 1.5));
    const double mu = nu - nl;
    const auto ch = recur_down(nu, x, h, isign, nl);
    const double rjl = ch.rjl, rjl_top = ch.rjl_top;
    const double fmu = ch.rjpl / ch.rjl;

    // CF2: p + i q = (J'_mu + i Y'_mu)/(J_mu + i Y_mu).
    double a = 0.25 - mu * mu;
    double p = -0.5 * xi, q = 1.0;
    const double br = 2.0 * x;
    double bi = 2.0;
    double fct = a * xi / (p * p + q * q);
    double cr = br + q * fct, ci = bi + p * fct;
    double den = br * br + bi * bi;
    double dr = br / den, di = -bi / den;
    double dlr = cr * dr - ci * di;
    double dli = cr * di + ci * dr;
    double temp = p * dlr - q * dli;
    q = p * dli + q * dlr;
    p = temp;
    for (int i = 2;; ++i) {
        if (i > kMaxIter) throw numerical_failure("bessel CF2 failed to converge");
        a += 2 * (i - 1);
        bi += 2.0;
        dr = a * dr + br;
        di = a * di + bi;
        if (std::abs(dr) + std::abs(di) < kTiny) dr = kTiny;
        fct = a / (cr * cr + ci * ci);
        cr = br + cr * fct;
        ci = bi - ci * fct;
        if (std::abs(cr) + std::abs(ci) < kTiny) cr = kTiny;
        den = dr * dr + di * di;
        dr /= den;
        di = -di / den;
        dlr = cr * dr - ci * di;
        dli = cr * di + ci * dr;
        temp = p * dlr - q * dli;
        q = p * dli + q * dlr;
        p = temp;
        if (std::abs(dlr - 1.0) + std::abs(dli) < kEps) break;
    }

    const double gam = (p - fmu) / q;
    double rjmu = std::sqrt(wron / ((p - fmu) * gam + q));
    rjmu = std::copysign(rjmu, rjl);
    return rjmu * (rjl_top / rjl);
}

} // namespace detail

/// J_nu(x) for real order nu >= 0 and x >= 0.
inline double j(double nu, double x) {
    if (nu < 0.0 || x < 0.0) throw invalid_parameter("bessel::j requires nu >= 0, x >= 0");
    if (x == 0.0) return nu == 0.0 ? 1.0 : 0.0;
    if (x < 1.5 || x * x < 2.0 * (nu + 1.0)) return detail::series(nu, x);
    if (x >= 18.0) {
        if (2.0 * x >= nu * nu) {
            double out;
            if (detail::asymptotic(nu, x, out)) return out;
        }
        return detail::miller_asymptotic_norm(nu, x);
    }
    return detail::steed(nu, x);
}

inline double j0(double x) { return j(0.0, x); }
inline double j1(double x) { return j(1.0, x); }

/// d/dx J_nu(x).
inline double j_derivative(double nu, double x) {
    if (x == 0.0) {
        if (nu == 0.0) return 0.0;
        if (nu == 1.0) return 0.5;
        return nu < 1.0 ? std::numeric_limits<double>::infinity() : 0.0;
    }
    if (nu == 0.0) return -j(1.0, x);
    if (nu < 1.0) return (nu / x) * j(nu, x) - j(nu + 1.0, x);
    return j(nu - 1.0, x) - (nu / x) * j(nu, x);
}

/// Fills out[k] = J_{mu+k}(x) for k = 0..out.size()-1 with one downward
/// recurrence, normalized against the scalar routine at the bottom of the
/// ladder.  Much cheaper than individual evaluations when a whole family of
/// orders mu, mu+1, mu+2, ... is needed at a fixed argument.
inline void j_ladder(double mu, double x, std::span<double> out) {
    const std::size_t n = out.size();
    if (n == 0) return;
    if (x == 0.0) {
        for (std::size_t k = 0; k < n; ++k) out[k] = (mu + double(k) == 0.0) ? 1.0 : 0.0;
        return;
    }
    if (n <= 2) {
        for (std::size_t k = 0; k < n; ++k) out[k] = j(mu + double(k), x);
        return;
    }
    const double nu_top = mu + double(n - 1);
    const int extra = 40 + static_cast<int>(0.07 * x);
    const int m_start = static_cast<int>(std::max(nu_top, x) - mu) + extra;

    double jp = 0.0;       // J_{mu+k+1} (unnormalized)
    double jc = 1e-300;    // J_{mu+k}
    for (int k = m_start; k >= 0; --k) {
        const double prev = (2.0 * (mu + k + 1.0) / x) * jc - jp;
        jp = jc;
        jc = prev;
        if (std::abs(jc) > 1e250) {
            jc *= 1e-250;
            jp *= 1e-250;
            for (std::size_t i = 0; i < n; ++i) out[i] *= 1e-250;
        }
        if (std::size_t(k) < n) out[k] = jc;
    }

    // Normalize where the unnormalized ladder is largest near the bottom,
    // avoiding division by a value sitting on a zero of J.
    std::size_t k_ref = 0;
    double best = std::abs(out[0]);
    for (std::size_t k = 1; k < std::min<std::size_t>(3, n); ++k) {
        if (std::abs(out[k]) > best) {
            best = std::abs(out[k]);
            k_ref = k;
        }
    }
    const double ref = j(mu + double(k_ref), x);
    const double scale = (best > 0.0) ? ref / out[k_ref] : 0.0;
    for (std::size_t k = 0; k < n; ++k) out[k] *= scale;
}

/// n-th positive zero of J_m (integer m >= 0, n >= 1), located by sequential
/// bracketing from below and bisection/secant polish.
inline double j_zero(int m, int n) {
    if (m < 0 || n < 1) throw invalid_parameter("bessel::j_zero requires m >= 0, n >= 1");
    const double dm = m;
    // Scan starts just below the first zero.
    double x = (m == 0) ? 2.0 : dm + 1.5 * std::cbrt(dm);
    double fprev = j(dm, x);
    const double step = 0.25 * pi;
    int found = 0;
    for (int it = 0; it < 200000; ++it) {
        const double x2 = x + step;
        const double f2 = j(dm, x2);
        if ((fprev < 0.0) != (f2 < 0.0)) {
            ++found;
            if (found == n) {
                double lo = x, hi = x2, flo = fprev;
                for (int b = 0; b < 200; ++b) {
                    const double mid = 0.5 * (lo + hi);
                    const double fm = j(dm, mid);
                    if ((flo < 0.0) != (fm < 0.0))
                        hi = mid;
                    else {
                        lo = mid;
                        flo = fm;
                    }
                    if (hi - lo < 1e-15 * hi) break;
                }
                // one Newton polish
                double z = 0.5 * (lo + hi);
                const double dz = j(dm, z) / j_derivative(dm, z);
                if (std::isfinite(dz) && std::abs(dz) < (hi - lo)) z -= dz;
                return z;
            }
        }
        x = x2;
        fprev = f2;
    }
    throw numerical_failure("bessel::j_zero: zero not found");
}

/// Cache of Bessel zeros, keyed by order; grows on demand.
class ZeroTable {
public:
    /// Zeros of J_m up to (and one past) xmax; callers filter by value.
    const std::vector<double>& zeros_up_to(int m, double xmax) {
        auto& zs = cache_[m];
        while (zs.empty() || zs.back() <= xmax)
            zs.push_back(j_zero(m, static_cast<int>(zs.size()) + 1));
        return zs;
    }

    double zero(int m, int n) {
        auto& zs = cache_[m];
        while (static_cast<int>(zs.size()) < n) zs.push_back(j_zero(m, static_cast<int>(zs.size()) + 1));
        return zs[n - 1];
    }

private:
    std::map<int, std::vector<double>> cache_;
};

} // namespace partweyl::bessel

#endif
