#include "degenwave/specfun.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

namespace degenwave::specfun {

namespace {

constexpr double kPi = std::numbers::pi;

// Lanczos coefficients for g = 7, n = 9.
constexpr double kLanczosG = 7.0;
constexpr std::array<double, 9> kLanczos = {
    0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
    771.32342877765313,   -176.61502916214059,   12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};

bool is_nonpositive_integer(cplx z) {
  return z.imag() == 0.0 && z.real() <= 0.0 && z.real() == std::floor(z.real());
}

// sin(pi z) with the real part reduced first, so the result keeps its
// relative accuracy close to the integers.
cplx sin_pi(cplx z) {
  const double n = std::round(z.real());
  const cplx s = std::sin(kPi * cplx(z.real() - n, z.imag()));
  return std::fmod(n, 2.0) == 0.0 ? s : -s;
}

cplx gamma_lanczos(cplx z) {
  // valid for Re z >= 1/2
  z -= 1.0;
  cplx acc = kLanczos[0];
  for (std::size_t i = 1; i < kLanczos.size(); ++i) {
    acc += kLanczos[i] / (z + static_cast<double>(i));
  }
  const cplx t = z + kLanczosG + 0.5;
  return std::sqrt(2.0 * kPi) * std::exp((z + 0.5) * std::log(t) - t) * acc;
}

// Minimal complex arithmetic in binary128. Used only for the power series,
// where the alternating terms grow like e^{|z|} before cancelling.
struct Quad {
  __float128 re = 0;
  __float128 im = 0;
};

Quad mul(Quad a, Quad b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}

__float128 abs2(Quad a) { return a.re * a.re + a.im * a.im; }

cplx scaled_series(double nu, cplx z) {
  const __float128 zr = z.real();
  const __float128 zi = z.imag();
  // w = -z^2/4
  const Quad w{-(zr * zr - zi * zi) / 4, -(2 * zr * zi) / 4};
  const double wabs = std::abs(z) * std::abs(z) / 4.0;
  Quad term{1, 0};
  Quad sum{1, 0};
  const __float128 nuq = nu;
  const __float128 eps2 = static_cast<__float128>(1e-34) * static_cast<__float128>(1e-34);
  for (int m = 1; m < 2000; ++m) {
    const __float128 denom = static_cast<__float128>(m) * (static_cast<__float128>(m) + nuq);
    term = mul(term, w);
    term.re /= denom;
    term.im /= denom;
    sum.re += term.re;
    sum.im += term.im;
    if (m * (m + nu) > wabs && abs2(term) <= eps2 * abs2(sum)) {
      break;
    }
  }
  const double inv_gamma = 1.0 / gamma(nu + 1.0);
  return cplx(static_cast<double>(sum.re), static_cast<double>(sum.im)) * inv_gamma;
}

// Hankel asymptotic series for J_nu(z), Re z >= 0, summed to the smallest
// term.
cplx hankel_j(double nu, cplx z) {
  const double mu = 4.0 * nu * nu;
  cplx p = 1.0;
  cplx q = 0.0;
  cplx term = 1.0;
  double prev = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    const cplx next = term * (mu - odd * odd) / (8.0 * k * z);
    const double mag = std::abs(next);
    if (mag > prev) {
      break;  // asymptotic series started to diverge
    }
    term = next;
    prev = mag;
    // P = t0 - t2 + t4 ..., Q = t1 - t3 + t5 ...
    switch (k % 4) {
      case 1: q += term; break;
      case 2: p -= term; break;
      case 3: q -= term; break;
      default: p += term; break;
    }
    if (mag < 1e-17) {
      break;
    }
  }
  const cplx chi = z - (0.5 * nu + 0.25) * kPi;
  return std::sqrt(2.0 / (kPi * z)) * (p * std::cos(chi) - q * std::sin(chi));
}

cplx scaled_asymptotic(double nu, cplx z) {
  // Jhat is even in z, so move to the right half plane first.
  if (z.real() < 0.0 || (z.real() == 0.0 && z.imag() < 0.0)) {
    z = -z;
  }
  return std::pow(z / 2.0, -nu) * hankel_j(nu, z);
}

void check_order(double nu) {
  if (!(nu >= -1.0)) {
    throw DomainError("bessel: order must be >= -1, got " + std::to_string(nu));
  }
}

bool on_cut(cplx z) { return z.imag() == 0.0 && z.real() < 0.0; }

cplx from_scaled(double nu, cplx z, cplx scaled) {
  if (z == cplx(0.0)) {
    if (nu == 0.0) return 1.0;
    if (nu > 0.0) return 0.0;
    throw DomainError("bessel_j: J_nu(0) is unbounded for nu < 0");
  }
  return std::pow(z / 2.0, nu) * scaled;
}

}  // namespace

cplx gamma(cplx z) {
  if (is_nonpositive_integer(z)) {
    throw PoleError("gamma: pole at z = " + std::to_string(z.real()));
  }
  if (z.real() < 0.5) {
    return kPi / (sin_pi(z) * gamma_lanczos(1.0 - z));
  }
  return gamma_lanczos(z);
}

double gamma(double x) { return gamma(cplx(x, 0.0)).real(); }

double bessel_crossover(double /*nu*/) { return 25.0; }

cplx bessel_j_scaled(double nu, cplx z) {
  check_order(nu);
  if (nu == -1.0) {
    // J_{-1} = -J_1  =>  Jhat_{-1}(z) = -(z/2)^2 Jhat_1(z)
    return -(z * z / 4.0) * bessel_j_scaled(1.0, z);
  }
  if (std::abs(z) <= bessel_crossover(nu)) {
    return scaled_series(nu, z);
  }
  return scaled_asymptotic(nu, z);
}

BesselEval bessel_j_series(double nu, cplx z) {
  check_order(nu);
  if (on_cut(z)) throw DomainError("bessel_j: argument on the branch cut arg z = pi");
  cplx scaled = nu == -1.0 ? -(z * z / 4.0) * scaled_series(1.0, z) : scaled_series(nu, z);
  return {nu, z, from_scaled(nu, z, scaled), BesselMethod::series};
}

BesselEval bessel_j_asymptotic(double nu, cplx z) {
  check_order(nu);
  if (on_cut(z)) throw DomainError("bessel_j: argument on the branch cut arg z = pi");
  if (z == cplx(0.0)) throw DomainError("bessel_j_asymptotic: z = 0");
  cplx scaled = nu == -1.0 ? -(z * z / 4.0) * scaled_asymptotic(1.0, z) : scaled_asymptotic(nu, z);
  return {nu, z, from_scaled(nu, z, scaled), BesselMethod::asymptotic};
}

BesselEval bessel_j_eval(double nu, cplx z) {
  if (std::abs(z) <= bessel_crossover(nu)) {
    return bessel_j_series(nu, z);
  }
  return bessel_j_asymptotic(nu, z);
}

cplx bessel_j(double nu, cplx z) { return bessel_j_eval(nu, z).value; }

cplx bessel_j_prime(double nu, cplx z) {
  if (z == cplx(0.0)) {
    throw DomainError("bessel_j_prime: singular at z = 0");
  }
  return (nu / z) * bessel_j(nu, z) - bessel_j(nu + 1.0, z);
}

double bessel_zero(double nu, int k) {
  if (k < 1) throw DomainError("bessel_zero: k must be >= 1");
  check_order(nu);
  auto J = [nu](double x) { return bessel_j(nu, cplx(x, 0.0)).real(); };
  auto dJ = [nu](double x) { return bessel_j_prime(nu, cplx(x, 0.0)).real(); };

  // McMahon expansion
  const double b = (k + 0.5 * nu - 0.25) * kPi;
  const double mu = 4.0 * nu * nu;
  const double b8 = 8.0 * b;
  double guess = b - (mu - 1.0) / b8 - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * b8 * b8 * b8);

  double lo = 0.0, hi = 0.0;
  bool bracketed = false;
  for (double half = 0.5; half <= 1.4 + 1e-12; half += 0.15) {
    lo = std::max(guess - half, 1e-6);
    hi = guess + half;
    if (J(lo) * J(hi) <= 0.0) {
      bracketed = true;
      break;
    }
  }
  if (!bracketed) {
    throw ConvergenceError("bessel_zero: no sign change near McMahon guess for nu=" +
                           std::to_string(nu) + ", k=" + std::to_string(k));
  }
  double x = std::clamp(guess, lo, hi);
  double flo = J(lo);
  for (int it = 0; it < 100; ++it) {
    const double fx = J(x);
    if (fx == 0.0) return x;
    if ((fx < 0.0) == (flo < 0.0)) {
      lo = x;
      flo = fx;
    } else {
      hi = x;
    }
    double next = x - fx / dJ(x);
    if (!(next > lo && next < hi)) {
      next = 0.5 * (lo + hi);
    }
    if (std::abs(next - x) <= 4e-16 * std::abs(x)) {
      return next;
    }
    x = next;
  }
  throw ConvergenceError("bessel_zero: Newton did not converge");
}

}  // namespace degenwave::specfun
